use rand::Rng;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

use super::config::SessionConfig;
use super::round::RoundRecord;
use crate::channel::{estimator_stats, EstimatorKind};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianMode, Quadrature};

/// Fewest check rounds a detection test will run on.
pub const MIN_CHECK_ROUNDS: usize = 10;

/// Fewest wrong-amplifier rounds the audit needs before it can flag.
pub const MIN_AUDIT_ROUNDS: usize = 10;

/// Spread test on rounds where preparation and measurement agree but the
/// amplifier boosted the other quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifierAudit {
    pub rounds: usize,
    pub mismatches: usize,
    /// `Σ(ξ₂ − alice_value)² / (n Δξ₂²)`; one for an honest link.
    pub spread_ratio: f64,
    /// Two-sided χ² p-value of the spread.
    pub p_value: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionReport {
    pub checked_rounds: usize,
    pub mismatches: usize,
    pub observed_error_rate: f64,
    pub expected_error_rate: f64,
    /// One-sided binomial `P(X ≥ mismatches)` under the expected rate.
    pub p_value: f64,
    pub eavesdropper_flagged: bool,
    pub wrong_amp_check: Option<AmplifierAudit>,
}

impl DetectionReport {
    pub fn any_flag(&self) -> bool {
        self.eavesdropper_flagged || self.wrong_amp_check.is_some_and(|a| a.flagged)
    }
}

/// Upper binomial tail `P(X ≥ k)` for `X ~ Bin(n, p)`.
pub fn binomial_upper_tail(k: usize, n: usize, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    let dist = Binomial::new(p.min(1.0), n as u64).expect("p in [0, 1]");
    dist.sf(k as u64 - 1)
}

/// Samples `check_fraction` of the kept rounds, marks them
/// `used_for_check`, and tests their symbol error rate against the
/// baseline. With a randomized amplifier it also audits the wrong-amplifier
/// rounds.
pub fn detect<R: Rng + ?Sized>(
    transcript: &mut [RoundRecord],
    config: &SessionConfig,
    rng: &mut R,
) -> Result<DetectionReport> {
    let kept: Vec<usize> = (0..transcript.len()).filter(|&i| transcript[i].kept).collect();
    let n_check = (config.check_fraction * kept.len() as f64).round() as usize;
    if n_check < MIN_CHECK_ROUNDS {
        return Err(Error::InsufficientCheckSample {
            available: kept.len(),
            required: MIN_CHECK_ROUNDS,
        });
    }
    let mut mismatches = 0;
    for pick in rand::seq::index::sample(rng, kept.len(), n_check) {
        let rec = &mut transcript[kept[pick]];
        rec.used_for_check = true;
        mismatches += rec.is_mismatch(&config.binning) as usize;
    }

    let expected = config.baseline_error()?;
    let observed = mismatches as f64 / n_check as f64;
    let p_value = binomial_upper_tail(mismatches, n_check, expected);
    let flagged = observed > config.detection.threshold_multiplier * expected
        && p_value < config.detection.significance;

    let wrong_amp_check = if config.randomized_amplifier() {
        Some(audit_wrong_amplifier(transcript, config)?)
    } else {
        None
    };

    Ok(DetectionReport {
        checked_rounds: n_check,
        mismatches,
        observed_error_rate: observed,
        expected_error_rate: expected,
        p_value,
        eavesdropper_flagged: flagged,
        wrong_amp_check,
    })
}

pub fn audit_wrong_amplifier(transcript: &[RoundRecord], config: &SessionConfig) -> Result<AmplifierAudit> {
    let mode = GaussianMode::squeezed(Quadrature::X1, 0.0, config.r)?;
    let predicted = estimator_stats(
        EstimatorKind::AmplifiedWrong,
        &mode,
        Quadrature::X1,
        config.gamma_t,
        config.gain(),
    )?
    .stddev;

    let mut rounds = 0;
    let mut mismatches = 0;
    let mut sum_sq = 0.0;
    for rec in transcript {
        let audited = rec.alice_axis == rec.bob_axis && rec.amp_axis.is_some_and(|a| a != rec.alice_axis);
        if !audited {
            continue;
        }
        rounds += 1;
        let z = (rec.bob_estimate - rec.alice_value) / predicted;
        sum_sq += z * z;
        if rec.bob_bin != Some(rec.alice_bin) {
            mismatches += 1;
        }
    }
    if rounds < MIN_AUDIT_ROUNDS {
        return Ok(AmplifierAudit {
            rounds,
            mismatches,
            spread_ratio: f64::NAN,
            p_value: 1.0,
            flagged: false,
        });
    }
    let chi2 = ChiSquared::new(rounds as f64).expect("positive degrees of freedom");
    let p_value = (2.0 * chi2.cdf(sum_sq).min(chi2.sf(sum_sq))).min(1.0);
    let spread_ratio = sum_sq / rounds as f64;
    let m = config.detection.threshold_multiplier;
    let flagged = (spread_ratio > m || spread_ratio < 1.0 / m) && p_value < config.detection.significance;
    Ok(AmplifierAudit {
        rounds,
        mismatches,
        spread_ratio,
        p_value,
        flagged,
    })
}
