use serde::{Deserialize, Serialize};

use super::binning::BinningScheme;
use crate::channel::{estimator_stats, EstimatorKind};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianMode, Quadrature};

/// Smallest expected number of check rounds a session may be configured for.
pub const MIN_EXPECTED_CHECKS: f64 = 30.0;

/// How Eve intervenes in each round.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EveStrategy {
    #[default]
    None,
    /// 50-50 split, `X1` on one port and `X2` on the other, coherent resend.
    InterceptResendCoherent,
    /// Homodyne on a random axis, resend a squeezed state centred on the
    /// result. `r_eve = None` uses Alice's squeeze parameter.
    InterceptResendSqueezed { r_eve: Option<f64> },
    /// Divert a fraction `reflection` before the fibre and homodyne it.
    BeamSplitterTap { reflection: f64 },
    /// Measure whichever quadrature the amplifier boosts, resend squeezed.
    AmplifierAware,
}

impl EveStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EveStrategy::BeamSplitterTap { reflection } if !(reflection > 0.0 && reflection < 1.0) => {
                Err(Error::InvalidSession(format!(
                    "tap reflection must be in (0, 1), got {reflection}"
                )))
            }
            EveStrategy::InterceptResendSqueezed { r_eve: Some(r) } if !(r >= 0.0 && r.is_finite()) => {
                Err(Error::InvalidSession(format!("r_eve must be >= 0, got {r}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_present(&self) -> bool {
        !matches!(self, EveStrategy::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierSetting {
    pub gain: f64,
    /// Draw the amplified axis per round instead of matching Alice's.
    pub randomized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionSettings {
    /// Honest per-symbol error rate; `None` uses the analytic prediction.
    pub baseline_error: Option<f64>,
    pub threshold_multiplier: f64,
    pub significance: f64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        DetectionSettings {
            baseline_error: None,
            threshold_multiplier: 3.0,
            significance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub r: f64,
    pub binning: BinningScheme,
    pub gamma_t: f64,
    pub amplifier: Option<AmplifierSetting>,
    pub n_rounds: usize,
    pub check_fraction: f64,
    pub detection: DetectionSettings,
    pub eve: EveStrategy,
    pub seed: u64,
}

impl SessionConfig {
    /// Lossless, unamplified, Eve-free session with a 30% check fraction.
    pub fn new(r: f64, binning: BinningScheme, n_rounds: usize, seed: u64) -> Self {
        SessionConfig {
            r,
            binning,
            gamma_t: 0.0,
            amplifier: None,
            n_rounds,
            check_fraction: 0.3,
            detection: DetectionSettings::default(),
            eve: EveStrategy::None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSession(msg));
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return fail(format!("r must be >= 0, got {}", self.r));
        }
        if !(self.gamma_t >= 0.0 && self.gamma_t.is_finite()) {
            return fail(format!("gamma_t must be >= 0 and finite, got {}", self.gamma_t));
        }
        if let Some(a) = self.amplifier {
            if !(a.gain >= 1.0 && a.gain.is_finite()) {
                return fail(format!("amplifier gain must be >= 1, got {}", a.gain));
            }
        }
        if self.n_rounds == 0 {
            return fail("n_rounds must be >= 1".into());
        }
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return fail(format!("check_fraction must be in (0, 1), got {}", self.check_fraction));
        }
        if self.check_fraction * (self.n_rounds as f64) < MIN_EXPECTED_CHECKS {
            return fail(format!(
                "check_fraction * n_rounds must be >= {MIN_EXPECTED_CHECKS}, got {}",
                self.check_fraction * self.n_rounds as f64
            ));
        }
        let d = &self.detection;
        if let Some(b) = d.baseline_error {
            if !(0.0..1.0).contains(&b) {
                return fail(format!("baseline_error must be in [0, 1), got {b}"));
            }
        }
        if !(d.threshold_multiplier > 0.0) {
            return fail(format!("threshold_multiplier must be > 0, got {}", d.threshold_multiplier));
        }
        if !(d.significance > 0.0 && d.significance < 1.0) {
            return fail(format!("significance must be in (0, 1), got {}", d.significance));
        }
        self.eve.validate()
    }

    pub fn gain(&self) -> f64 {
        self.amplifier.map_or(1.0, |a| a.gain)
    }

    pub fn randomized_amplifier(&self) -> bool {
        self.amplifier.is_some_and(|a| a.randomized)
    }

    /// Estimator Bob uses on kept rounds.
    pub fn kept_estimator(&self) -> EstimatorKind {
        if self.amplifier.is_some() {
            EstimatorKind::AmplifiedRight
        } else {
            EstimatorKind::Plain
        }
    }

    /// Spread of Bob's estimator on a kept honest round.
    pub fn kept_estimator_stddev(&self) -> Result<f64> {
        let mode = GaussianMode::squeezed(Quadrature::X1, 0.0, self.r)?;
        Ok(estimator_stats(self.kept_estimator(), &mode, Quadrature::X1, self.gamma_t, self.gain())?.stddev)
    }

    /// Detection baseline: the configured value or the analytic prediction.
    pub fn baseline_error(&self) -> Result<f64> {
        match self.detection.baseline_error {
            Some(b) => Ok(b),
            None => expected_honest_error(self),
        }
    }
}

/// Probability that Bob's estimator leaves Alice's bin on a kept round with
/// no Eve, for an interior bin.
pub fn expected_honest_error(config: &SessionConfig) -> Result<f64> {
    let sd = config.kept_estimator_stddev()?;
    let half = config.binning.delta() / 2.0;
    Ok(libm::erfc(half / (std::f64::consts::SQRT_2 * sd)))
}
