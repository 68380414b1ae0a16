use rand::Rng;

use super::binning::BinningScheme;
use super::config::{EveStrategy, SessionConfig};
use crate::channel::{amplified_link, loss_evolve, EstimatorKind, PhaseSensitiveAmplifier};
use crate::error::Result;
use crate::gaussian::{
    BeamSplitter, GaussianMode, HomodyneSample, ModeIndex, Quadrature, TwoModeGaussianState,
};

/// Alice's choice for one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preparation {
    pub mode: GaussianMode,
    pub axis: Quadrature,
    pub bin: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub alice_axis: Quadrature,
    pub alice_bin: usize,
    /// Centre of Alice's bin.
    pub alice_value: f64,
    pub amp_axis: Option<Quadrature>,
    pub eve_axis: Option<Quadrature>,
    pub bob_axis: Quadrature,
    /// Raw homodyne outcome.
    pub bob_value: f64,
    /// Outcome rescaled by the estimator matching the link.
    pub bob_estimate: f64,
    /// Only assigned when Bob measured Alice's axis.
    pub bob_bin: Option<usize>,
    pub kept: bool,
    pub used_for_check: bool,
}

impl RoundRecord {
    /// Kept round whose symbols disagree.
    pub fn is_mismatch(&self, binning: &BinningScheme) -> bool {
        self.kept
            && self
                .bob_bin
                .map_or(true, |b| binning.symbol(b) != binning.symbol(self.alice_bin))
    }
}

pub fn alice_prepare<R: Rng + ?Sized>(binning: &BinningScheme, r: f64, rng: &mut R) -> Result<Preparation> {
    let axis = Quadrature::random(rng);
    let bin = rng.random_range(0..binning.n_bins());
    let mode = GaussianMode::squeezed(axis, binning.bin_center(bin), r)?;
    Ok(Preparation { mode, axis, bin })
}

pub fn bob_measure<R: Rng + ?Sized>(mode: &GaussianMode, rng: &mut R) -> (Quadrature, HomodyneSample) {
    let axis = Quadrature::random(rng);
    (axis, mode.sample_homodyne(axis, rng))
}

/// One full round: preparation, optional tap, link, optional intercept,
/// Bob's measurement and the sift decision.
pub fn run_round<R: Rng + ?Sized>(config: &SessionConfig, rng: &mut R) -> Result<RoundRecord> {
    let prep = alice_prepare(&config.binning, config.r, rng)?;
    let amp_axis = config.amplifier.map(|a| {
        if a.randomized {
            Quadrature::random(rng)
        } else {
            prep.axis
        }
    });

    let mut mode = prep.mode;
    let mut eve_axis = None;

    if let EveStrategy::BeamSplitterTap { reflection } = config.eve {
        let axis = Quadrature::random(rng);
        let split = TwoModeGaussianState::embed_with_vacuum(&mode)
            .apply_beam_splitter(&BeamSplitter::from_reflection(reflection)?);
        mode = split.measure(ModeIndex::Two, axis, rng)?.1;
        eve_axis = Some(axis);
    }

    mode = match amp_axis {
        None => loss_evolve(&mode, config.gamma_t)?,
        Some(axis) => amplified_link(
            &mode,
            config.gamma_t,
            &PhaseSensitiveAmplifier::new(config.gain(), axis)?,
        )?,
    };

    match config.eve {
        EveStrategy::InterceptResendCoherent => {
            let split = TwoModeGaussianState::embed_with_vacuum(&mode).apply_beam_splitter(&BeamSplitter::balanced());
            let (s1, rest) = split.measure(ModeIndex::One, Quadrature::X1, rng)?;
            let s2 = rest.sample_homodyne(Quadrature::X2, rng);
            // Output 1 carries +a/√2, output 2 carries −a/√2.
            let sqrt2 = std::f64::consts::SQRT_2;
            mode = GaussianMode::coherent(sqrt2 * s1.value, -sqrt2 * s2.value);
        }
        EveStrategy::InterceptResendSqueezed { r_eve } => {
            let axis = Quadrature::random(rng);
            let guess = mode.sample_homodyne(axis, rng).value;
            mode = GaussianMode::squeezed(axis, guess, r_eve.unwrap_or(config.r))?;
            eve_axis = Some(axis);
        }
        EveStrategy::AmplifierAware => {
            let axis = amp_axis.unwrap_or_else(|| Quadrature::random(rng));
            let guess = mode.sample_homodyne(axis, rng).value;
            mode = GaussianMode::squeezed(axis, guess, config.r)?;
            eve_axis = Some(axis);
        }
        EveStrategy::None | EveStrategy::BeamSplitterTap { .. } => {}
    }

    let (bob_axis, sample) = bob_measure(&mode, rng);
    let kind = EstimatorKind::for_link(amp_axis, bob_axis);
    let bob_estimate = sample.value * kind.scale(config.gamma_t, config.gain());
    let matched = bob_axis == prep.axis;
    let kept = matched && (!config.randomized_amplifier() || amp_axis == Some(prep.axis));

    Ok(RoundRecord {
        alice_axis: prep.axis,
        alice_bin: prep.bin,
        alice_value: config.binning.bin_center(prep.bin),
        amp_axis,
        eve_axis,
        bob_axis,
        bob_value: sample.value,
        bob_estimate,
        bob_bin: matched.then(|| config.binning.bin_of(bob_estimate)),
        kept,
        used_for_check: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::config::AmplifierSetting;
    use crate::rng::stream_rng;

    fn config() -> SessionConfig {
        SessionConfig::new(3.35, BinningScheme::for_squeezing(0.125, 3.35).unwrap(), 1000, 1)
    }

    #[test]
    fn alice_mode_is_squeezed_on_chosen_axis() {
        let b = BinningScheme::for_squeezing(0.125, 3.35).unwrap();
        let mut rng = stream_rng(3, 0);
        for _ in 0..20 {
            let p = alice_prepare(&b, 3.35, &mut rng).unwrap();
            assert!((p.mode.var(p.axis) - (-6.7f64).exp() / 4.0).abs() < 1e-15);
            assert_eq!(p.mode.mean(p.axis), b.bin_center(p.bin));
        }
    }

    #[test]
    fn same_stream_same_record() {
        let c = config();
        let a = run_round(&c, &mut stream_rng(9, 4)).unwrap();
        let b = run_round(&c, &mut stream_rng(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn honest_lossless_rounds_agree() {
        let c = config();
        let mut rng = stream_rng(11, 0);
        let mut kept = 0;
        let mut errors = 0;
        for _ in 0..4000 {
            let rec = run_round(&c, &mut rng).unwrap();
            assert_eq!(rec.kept, rec.alice_axis == rec.bob_axis);
            if rec.kept {
                kept += 1;
                errors += rec.is_mismatch(&c.binning) as usize;
            }
        }
        assert!(kept > 1800);
        assert!(errors <= 5, "errors = {errors}");
    }

    #[test]
    fn randomized_amplifier_discards_mismatched_amp() {
        let mut c = config();
        c.gamma_t = 1e-3;
        c.amplifier = Some(AmplifierSetting { gain: 10.0, randomized: true });
        let mut rng = stream_rng(2, 0);
        for _ in 0..500 {
            let rec = run_round(&c, &mut rng).unwrap();
            if rec.amp_axis != Some(rec.alice_axis) {
                assert!(!rec.kept);
            }
            assert_eq!(rec.kept, rec.alice_axis == rec.bob_axis && rec.amp_axis == Some(rec.alice_axis));
        }
    }

    #[test]
    fn coherent_eve_is_exact_on_wide_bins() {
        // Coherent resend leaves Bob with variance 1/2 around Alice's centre.
        let mut c = config();
        c.binning = BinningScheme::insecure(6.0, 60.0).unwrap();
        c.eve = EveStrategy::InterceptResendCoherent;
        let mut rng = stream_rng(5, 0);
        let mut dev2 = 0.0;
        let mut n = 0;
        for _ in 0..4000 {
            let rec = run_round(&c, &mut rng).unwrap();
            if rec.kept {
                dev2 += (rec.bob_estimate - rec.alice_value).powi(2);
                n += 1;
            }
        }
        let var = dev2 / n as f64;
        assert!((var - 0.5).abs() < 0.05, "var = {var}");
    }
}
