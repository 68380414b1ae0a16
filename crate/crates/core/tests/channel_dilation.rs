//! Channel moments checked against sampled Heisenberg-picture dilations:
//! loss is `x → √η x + √(1−η) v` with `v` a vacuum quadrature, the amplifier
//! is `x → G x`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use sqkd_core::channel::{amplified_link, estimator_stats, loss_evolve, EstimatorKind, PhaseSensitiveAmplifier};
use sqkd_core::{BeamSplitter, GaussianMode, ModeIndex, Quadrature, TwoModeGaussianState};

const N: usize = 200_000;

fn lossy(x: f64, eta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let vac = Normal::new(0.0, 0.5).unwrap();
    eta.sqrt() * x + (1.0 - eta).sqrt() * vac.sample(rng)
}

fn sample_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

fn assert_moments(xs: &[f64], mean: f64, var: f64, what: &str) {
    let (m, v) = sample_moments(xs);
    let n = xs.len() as f64;
    let mean_tol = 4.0 * (var / n).sqrt();
    let var_tol = 4.0 * var * (2.0 / (n - 1.0)).sqrt();
    assert!((m - mean).abs() < mean_tol, "{what}: mean {m} vs {mean} (tol {mean_tol})");
    assert!((v - var).abs() < var_tol, "{what}: var {v} vs {var} (tol {var_tol})");
}

#[test]
fn loss_is_a_beam_splitter_with_vacuum() {
    let mode = GaussianMode::squeezed(Quadrature::X2, -1.3, 1.1).unwrap();
    for gamma_t in [0.0f64, 1e-3, 0.4, 3.0] {
        let eta = (-gamma_t).exp();
        let dilated = TwoModeGaussianState::embed_with_vacuum(&mode)
            .apply_beam_splitter(&BeamSplitter::new(eta, 1.0 - eta).unwrap())
            .reduced(ModeIndex::One);
        let direct = loss_evolve(&mode, gamma_t).unwrap();
        for q in Quadrature::ALL {
            assert!((dilated.mean(q) - direct.mean(q)).abs() < 1e-12);
            assert!((dilated.var(q) - direct.var(q)).abs() < 1e-12 * direct.var(q).max(1.0));
        }
    }
}

#[test]
fn sampled_fibre_matches_loss_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mode = GaussianMode::squeezed(Quadrature::X1, 0.9, 1.5).unwrap();
    let gamma_t: f64 = 0.3;
    let eta = (-gamma_t).exp();
    let out = loss_evolve(&mode, gamma_t).unwrap();
    for q in Quadrature::ALL {
        let xs: Vec<f64> = (0..N)
            .map(|_| {
                let x = mode.sample_homodyne(q, &mut rng).value;
                lossy(x, eta, &mut rng)
            })
            .collect();
        assert_moments(&xs, out.mean(q), out.var(q), &format!("fibre {q}"));
    }
}

#[test]
fn sampled_amplified_link_matches_estimators() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let r = 3.0;
    let gamma_t: f64 = 2e-3;
    let gain = 10.0;
    let mode = GaussianMode::squeezed(Quadrature::X1, 1.25, r).unwrap();
    let half = (-gamma_t / 2.0).exp();
    for (amp_axis, kind) in [
        (Quadrature::X1, EstimatorKind::AmplifiedRight),
        (Quadrature::X2, EstimatorKind::AmplifiedWrong),
    ] {
        let g = if amp_axis == Quadrature::X1 { gain } else { 1.0 / gain };
        let scale = kind.scale(gamma_t, gain);
        let xs: Vec<f64> = (0..N)
            .map(|_| {
                let x = mode.sample_homodyne(Quadrature::X1, &mut rng).value;
                scale * lossy(g * lossy(x, half, &mut rng), half, &mut rng)
            })
            .collect();
        let stats = estimator_stats(kind, &mode, Quadrature::X1, gamma_t, gain).unwrap();
        assert_moments(&xs, stats.mean, stats.stddev.powi(2), &format!("{kind:?}"));

        let link = amplified_link(&mode, gamma_t, &PhaseSensitiveAmplifier::new(gain, amp_axis).unwrap()).unwrap();
        assert!((scale * link.mean(Quadrature::X1) - stats.mean).abs() < 1e-12);
        assert!((scale * scale * link.var(Quadrature::X1) - stats.stddev.powi(2)).abs() < 1e-12);
    }
}

#[test]
fn sampled_plain_estimator_matches() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mode = GaussianMode::squeezed(Quadrature::X1, -0.4, 3.35).unwrap();
    let gamma_t: f64 = 1.24e-3;
    let scale = EstimatorKind::Plain.scale(gamma_t, 1.0);
    let xs: Vec<f64> = (0..N)
        .map(|_| scale * lossy(mode.sample_homodyne(Quadrature::X1, &mut rng).value, (-gamma_t).exp(), &mut rng))
        .collect();
    let stats = estimator_stats(EstimatorKind::Plain, &mode, Quadrature::X1, gamma_t, 1.0).unwrap();
    assert_moments(&xs, stats.mean, stats.stddev.powi(2), "plain");
}
