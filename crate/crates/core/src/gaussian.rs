//! Single- and two-mode Gaussian states in the quadrature picture.
//!
//! Quadratures follow the `X1 = (a† + a)/2`, `X2 = i(a† − a)/2` convention, so
//! the vacuum has variance 1/4 on both axes and every physical state obeys
//! `ΔX1·ΔX2 ≥ 1/4`. Single modes carry only the two quadrature variances:
//! every state the protocol produces has uncorrelated quadratures. Two-mode
//! states carry a full 4×4 covariance because a beam splitter correlates the
//! modes.

use std::fmt;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for identities that hold exactly in closed form.
pub const EPS_NUM: f64 = 1e-12;

/// Vacuum variance of either quadrature.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// One of the two conjugate field quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X1,
    X2,
}

impl Quadrature {
    pub const ALL: [Quadrature; 2] = [Quadrature::X1, Quadrature::X2];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Quadrature::X1 => 0,
            Quadrature::X2 => 1,
        }
    }

    #[inline]
    pub fn conjugate(self) -> Quadrature {
        match self {
            Quadrature::X1 => Quadrature::X2,
            Quadrature::X2 => Quadrature::X1,
        }
    }

    /// Fair coin over the two axes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Quadrature {
        if rng.random::<bool>() {
            Quadrature::X1
        } else {
            Quadrature::X2
        }
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quadrature::X1 => f.write_str("x1"),
            Quadrature::X2 => f.write_str("x2"),
        }
    }
}

/// The outcome of a homodyne measurement of one quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneSample {
    pub axis: Quadrature,
    pub value: f64,
}

/// A single-mode Gaussian state with uncorrelated quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMode {
    mean: [f64; 2],
    var: [f64; 2],
}

impl GaussianMode {
    /// Builds a mode from quadrature means and variances, rejecting
    /// non-positive variances and states below the uncertainty bound.
    pub fn new(mean1: f64, mean2: f64, var1: f64, var2: f64) -> Result<Self> {
        for (axis, value) in [(Quadrature::X1, var1), (Quadrature::X2, var2)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidVariance { axis, value });
            }
        }
        let mode = GaussianMode {
            mean: [mean1, mean2],
            var: [var1, var2],
        };
        let product = mode.uncertainty_product();
        if product < 0.25 - EPS_NUM {
            return Err(Error::UncertaintyViolation { product });
        }
        Ok(mode)
    }

    /// Constructor for results of operations that map physical states to
    /// physical states.
    pub(crate) fn from_parts(mean: [f64; 2], var: [f64; 2]) -> Self {
        debug_assert!(var[0] > 0.0 && var[1] > 0.0, "non-positive variance {var:?}");
        GaussianMode { mean, var }
    }

    pub fn vacuum() -> Self {
        GaussianMode::from_parts([0.0, 0.0], [VACUUM_VARIANCE; 2])
    }

    /// Coherent state centred at `(x1, x2)`.
    pub fn coherent(x1: f64, x2: f64) -> Self {
        GaussianMode::from_parts([x1, x2], [VACUUM_VARIANCE; 2])
    }

    /// Displaced squeezed vacuum squeezed along `axis` and centred on `center`
    /// on that axis (mean zero on the conjugate axis).
    ///
    /// The squeezed axis has variance `e^{-2r}/4`, the conjugate axis `e^{2r}/4`.
    pub fn squeezed(axis: Quadrature, center: f64, r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::NegativeSqueezing(r));
        }
        let mut mean = [0.0; 2];
        let mut var = [0.0; 2];
        mean[axis.index()] = center;
        var[axis.index()] = (-2.0 * r).exp() / 4.0;
        var[axis.conjugate().index()] = (2.0 * r).exp() / 4.0;
        Ok(GaussianMode::from_parts(mean, var))
    }

    #[inline]
    pub fn mean(&self, axis: Quadrature) -> f64 {
        self.mean[axis.index()]
    }

    #[inline]
    pub fn var(&self, axis: Quadrature) -> f64 {
        self.var[axis.index()]
    }

    #[inline]
    pub fn stddev(&self, axis: Quadrature) -> f64 {
        self.var(axis).sqrt()
    }

    /// Width in the `v = 2·Var` convention used for `p(x) = e^{-x²/v}/√(πv)`.
    #[inline]
    pub fn v(&self, axis: Quadrature) -> f64 {
        2.0 * self.var(axis)
    }

    /// `ΔX1·ΔX2`, at least 1/4 for physical states.
    pub fn uncertainty_product(&self) -> f64 {
        (self.var[0] * self.var[1]).sqrt()
    }

    /// `⟨a†a⟩ = Var X1 + Var X2 + ⟨X1⟩² + ⟨X2⟩² − 1/2`.
    pub fn mean_photon_number(&self) -> f64 {
        self.var[0] + self.var[1] + self.mean[0].powi(2) + self.mean[1].powi(2) - 0.5
    }

    pub(crate) fn means(&self) -> [f64; 2] {
        self.mean
    }

    pub(crate) fn variances(&self) -> [f64; 2] {
        self.var
    }

    /// Marginal density of the quadrature `axis` at `x`.
    pub fn pdf(&self, axis: Quadrature, x: f64) -> f64 {
        let v = self.v(axis);
        let d = x - self.mean(axis);
        (-(d * d) / v).exp() / (std::f64::consts::PI * v).sqrt()
    }

    /// Probability that a homodyne measurement of `axis` lands in `[lo, hi]`.
    pub fn bin_probability(&self, axis: Quadrature, lo: f64, hi: f64) -> Result<f64> {
        if !(lo < hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(normal_interval(self.mean(axis), self.stddev(axis), lo, hi))
    }

    /// `1 − bin_probability`, evaluated from the two tails so that small miss
    /// probabilities keep full relative precision.
    pub fn bin_miss_probability(&self, axis: Quadrature, lo: f64, hi: f64) -> Result<f64> {
        if !(lo < hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        let m = self.mean(axis);
        let scale = std::f64::consts::SQRT_2 * self.stddev(axis);
        let below = 0.5 * libm::erfc((m - lo) / scale);
        let above = 0.5 * libm::erfc((hi - m) / scale);
        Ok(below + above)
    }

    /// Draws a homodyne outcome from the marginal of `axis`.
    pub fn sample_homodyne<R: Rng + ?Sized>(&self, axis: Quadrature, rng: &mut R) -> HomodyneSample {
        let z: f64 = rng.sample(StandardNormal);
        HomodyneSample {
            axis,
            value: self.mean(axis) + self.stddev(axis) * z,
        }
    }
}

/// `P(lo ≤ X ≤ hi)` for `X ~ N(mean, sd²)`, choosing the erf/erfc form that
/// avoids cancellation.
pub fn normal_interval(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let scale = std::f64::consts::SQRT_2 * sd;
    let za = (lo - mean) / scale;
    let zb = (hi - mean) / scale;
    if za >= 0.0 {
        0.5 * (libm::erfc(za) - libm::erfc(zb))
    } else if zb <= 0.0 {
        0.5 * (libm::erfc(-zb) - libm::erfc(-za))
    } else {
        1.0 - 0.5 * libm::erfc(-za) - 0.5 * libm::erfc(zb)
    }
}

/// Which of the two modes a two-mode operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeIndex {
    One,
    Two,
}

impl ModeIndex {
    #[inline]
    pub fn other(self) -> ModeIndex {
        match self {
            ModeIndex::One => ModeIndex::Two,
            ModeIndex::Two => ModeIndex::One,
        }
    }

    #[inline]
    fn offset(self) -> usize {
        match self {
            ModeIndex::One => 0,
            ModeIndex::Two => 2,
        }
    }
}

#[inline]
fn slot(mode: ModeIndex, axis: Quadrature) -> usize {
    mode.offset() + axis.index()
}

/// A lossless beam splitter with intensity transmission `T` and reflection `R`.
///
/// Acts on annihilation operators as `a1 → √T a1 + √R a2`,
/// `a2 → −√R a1 + √T a2`, identically on both quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    transmission: f64,
    reflection: f64,
}

impl BeamSplitter {
    pub fn new(transmission: f64, reflection: f64) -> Result<Self> {
        let in_range = |x: f64| (0.0..=1.0).contains(&x);
        if !in_range(transmission)
            || !in_range(reflection)
            || (transmission + reflection - 1.0).abs() > EPS_NUM
        {
            return Err(Error::InvalidBeamSplitter {
                t: transmission,
                r: reflection,
            });
        }
        Ok(BeamSplitter {
            transmission,
            reflection,
        })
    }

    pub fn from_reflection(reflection: f64) -> Result<Self> {
        BeamSplitter::new(1.0 - reflection, reflection)
    }

    pub fn balanced() -> Self {
        BeamSplitter {
            transmission: 0.5,
            reflection: 0.5,
        }
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn reflection(&self) -> f64 {
        self.reflection
    }

    /// The orthogonal 4×4 map on `(X11, X21, X12, X22)`.
    pub fn matrix(&self) -> Matrix4<f64> {
        let t = self.transmission.sqrt();
        let r = self.reflection.sqrt();
        #[rustfmt::skip]
        let s = Matrix4::new(
             t, 0.0,   r, 0.0,
           0.0,   t, 0.0,   r,
            -r, 0.0,   t, 0.0,
           0.0,  -r, 0.0,   t,
        );
        s
    }
}

/// Two-mode Gaussian state: means and covariance over `(X11, X21, X12, X22)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeGaussianState {
    mean: Vector4<f64>,
    cov: Matrix4<f64>,
}

impl TwoModeGaussianState {
    /// Validates symmetry and positive semi-definiteness of `cov`.
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self> {
        let scale = cov.amax().max(1.0);
        if (cov - cov.transpose()).amax() > EPS_NUM * scale {
            return Err(Error::InvalidCovariance);
        }
        let eig = SymmetricEigen::new(cov);
        if eig.eigenvalues.min() < -EPS_NUM * scale {
            return Err(Error::InvalidCovariance);
        }
        Ok(TwoModeGaussianState { mean, cov })
    }

    /// Product state of two uncorrelated single modes.
    pub fn product(first: &GaussianMode, second: &GaussianMode) -> Self {
        let mut mean = Vector4::zeros();
        let mut cov = Matrix4::zeros();
        for (mode, state) in [(ModeIndex::One, first), (ModeIndex::Two, second)] {
            for axis in Quadrature::ALL {
                let i = slot(mode, axis);
                mean[i] = state.mean(axis);
                cov[(i, i)] = state.var(axis);
            }
        }
        TwoModeGaussianState { mean, cov }
    }

    /// Signal in mode 1, vacuum in mode 2.
    pub fn embed_with_vacuum(signal: &GaussianMode) -> Self {
        TwoModeGaussianState::product(signal, &GaussianMode::vacuum())
    }

    pub fn mean(&self) -> &Vector4<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix4<f64> {
        &self.cov
    }

    /// `(mean, variance)` of one quadrature of one mode.
    pub fn quadrature_moments(&self, mode: ModeIndex, axis: Quadrature) -> (f64, f64) {
        let i = slot(mode, axis);
        (self.mean[i], self.cov[(i, i)])
    }

    /// Reduced single-mode state; intra-mode X1/X2 covariance is dropped.
    pub fn reduced(&self, mode: ModeIndex) -> GaussianMode {
        let (m1, v1) = self.quadrature_moments(mode, Quadrature::X1);
        let (m2, v2) = self.quadrature_moments(mode, Quadrature::X2);
        GaussianMode::from_parts([m1, m2], [v1, v2])
    }

    /// `mean → S·mean`, `cov → S·cov·Sᵀ`.
    pub fn apply_beam_splitter(&self, splitter: &BeamSplitter) -> Self {
        self.transform(&splitter.matrix())
    }

    /// Applies an arbitrary real linear map to the quadrature vector.
    pub fn transform(&self, s: &Matrix4<f64>) -> Self {
        TwoModeGaussianState {
            mean: s * self.mean,
            cov: s * self.cov * s.transpose(),
        }
    }

    /// State of the unmeasured mode after a homodyne measurement of
    /// `axis` on `measured` returned `outcome`.
    ///
    /// Each quadrature of the other mode gets the Gaussian conditional
    /// `μ_a + Σ_ab (y − μ_b)/Σ_bb`, `Σ_aa − Σ_ab²/Σ_bb`.
    pub fn condition_on_homodyne(
        &self,
        measured: ModeIndex,
        axis: Quadrature,
        outcome: f64,
    ) -> Result<GaussianMode> {
        let b = slot(measured, axis);
        let var_b = self.cov[(b, b)];
        if !(var_b > 0.0) {
            return Err(Error::DegenerateMeasurement(var_b));
        }
        let other = measured.other();
        let mut mean = [0.0; 2];
        let mut var = [0.0; 2];
        for q in Quadrature::ALL {
            let a = slot(other, q);
            let cross = self.cov[(a, b)];
            mean[q.index()] = self.mean[a] + cross * (outcome - self.mean[b]) / var_b;
            var[q.index()] = self.cov[(a, a)] - cross * cross / var_b;
        }
        Ok(GaussianMode::from_parts(mean, var))
    }

    /// Samples a homodyne outcome on `measured` and returns it together with
    /// the conditioned state of the other mode.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        measured: ModeIndex,
        axis: Quadrature,
        rng: &mut R,
    ) -> Result<(HomodyneSample, GaussianMode)> {
        let (m, v) = self.quadrature_moments(measured, axis);
        let z: f64 = rng.sample(StandardNormal);
        let value = m + v.sqrt() * z;
        let rest = self.condition_on_homodyne(measured, axis, value)?;
        Ok((HomodyneSample { axis, value }, rest))
    }

    /// Symplectic eigenvalues `(ν−, ν+)`; both equal 1/4 for pure states.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let c = &self.cov;
        let det2 = |i: usize, j: usize| c[(i, i)] * c[(j, j)] - c[(i, j)] * c[(j, i)];
        let det_a = det2(0, 1);
        let det_b = det2(2, 3);
        let det_c = c[(0, 2)] * c[(1, 3)] - c[(0, 3)] * c[(1, 2)];
        let seralian = det_a + det_b + 2.0 * det_c;
        let det = c.determinant();
        let disc = (seralian * seralian - 4.0 * det).max(0.0).sqrt();
        let lo = ((seralian - disc) / 2.0).max(0.0).sqrt();
        let hi = ((seralian + disc) / 2.0).sqrt();
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vacuum_is_r_zero_squeezing() {
        let m = GaussianMode::squeezed(Quadrature::X1, 0.0, 0.0).unwrap();
        assert_eq!(m, GaussianMode::vacuum());
        assert_relative_eq!(m.uncertainty_product(), 0.25);
    }

    #[test]
    fn negative_squeezing_rejected() {
        assert_eq!(
            GaussianMode::squeezed(Quadrature::X1, 0.0, -0.1),
            Err(Error::NegativeSqueezing(-0.1))
        );
        assert!(GaussianMode::squeezed(Quadrature::X1, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn squeezed_x2_moments() {
        let m = GaussianMode::squeezed(Quadrature::X2, 0.5, 1.0).unwrap();
        assert_eq!(m.mean(Quadrature::X2), 0.5);
        assert_eq!(m.mean(Quadrature::X1), 0.0);
        assert_relative_eq!(m.var(Quadrature::X2), (-2.0f64).exp() / 4.0, max_relative = 1e-15);
        assert_relative_eq!(m.var(Quadrature::X1), 2.0f64.exp() / 4.0, max_relative = 1e-15);
        assert_relative_eq!(m.uncertainty_product(), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn photon_number_of_squeezed_vacuum() {
        let r = 3.35;
        let m = GaussianMode::squeezed(Quadrature::X1, 0.0, r).unwrap();
        assert_relative_eq!(m.mean_photon_number(), r.sinh().powi(2), max_relative = 1e-12);
    }

    #[test]
    fn new_rejects_unphysical_modes() {
        assert!(matches!(
            GaussianMode::new(0.0, 0.0, 0.01, 0.01),
            Err(Error::UncertaintyViolation { .. })
        ));
        assert!(matches!(
            GaussianMode::new(0.0, 0.0, 0.0, 1.0),
            Err(Error::InvalidVariance { .. })
        ));
        assert!(GaussianMode::new(1.0, -1.0, 0.25, 0.25).is_ok());
    }

    #[test]
    fn pdf_at_origin() {
        let vac = GaussianMode::vacuum();
        let expected = 1.0 / (std::f64::consts::PI * 0.5).sqrt();
        assert_relative_eq!(vac.pdf(Quadrature::X1, 0.0), expected, max_relative = 1e-15);

        let v = 6.2e-4;
        let sq = GaussianMode::new(0.0, 0.0, v / 2.0, 0.5 / v).unwrap();
        let expected = 1.0 / (std::f64::consts::PI * v).sqrt();
        assert_relative_eq!(sq.pdf(Quadrature::X1, 0.0), expected, max_relative = 1e-14);
    }

    #[test]
    fn pdf_integrates_to_one() {
        // Composite Simpson over ±12 sd.
        for mode in [
            GaussianMode::vacuum(),
            GaussianMode::squeezed(Quadrature::X1, 0.7, 2.0).unwrap(),
            GaussianMode::squeezed(Quadrature::X2, -3.0, 1.2).unwrap(),
        ] {
            for axis in Quadrature::ALL {
                let sd = mode.stddev(axis);
                let (a, b) = (mode.mean(axis) - 12.0 * sd, mode.mean(axis) + 12.0 * sd);
                let n = 4000;
                let h = (b - a) / n as f64;
                let mut sum = mode.pdf(axis, a) + mode.pdf(axis, b);
                for i in 1..n {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    sum += w * mode.pdf(axis, a + i as f64 * h);
                }
                assert!((sum * h / 3.0 - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn centered_bin_probability_is_erf() {
        let v = 6.2e-4;
        let delta = 0.125;
        let mode = GaussianMode::new(0.0, 0.0, v / 2.0, 0.5 / v).unwrap();
        let p = mode
            .bin_probability(Quadrature::X1, -delta / 2.0, delta / 2.0)
            .unwrap();
        let miss = mode
            .bin_miss_probability(Quadrature::X1, -delta / 2.0, delta / 2.0)
            .unwrap();
        assert_relative_eq!(p, libm::erf(delta / (2.0 * v.sqrt())), max_relative = 1e-15);
        assert_relative_eq!(miss, 3.9e-4, max_relative = 0.02);
        assert!(miss < 1e-3);
        assert_relative_eq!(p + miss, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn whole_line_has_probability_one() {
        let m = GaussianMode::squeezed(Quadrature::X1, 2.0, 1.0).unwrap();
        let p = m
            .bin_probability(Quadrature::X1, f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert_eq!(p, 1.0);
        assert!(m.bin_probability(Quadrature::X1, 1.0, 1.0).is_err());
    }

    #[test]
    fn homodyne_sampling_is_seeded() {
        let m = GaussianMode::squeezed(Quadrature::X1, 0.3, 1.0).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100)
                .map(|_| m.sample_homodyne(Quadrature::X1, &mut rng).value)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn vacuum_sample_mean() {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vac = GaussianMode::vacuum();
        let mean = (0..n)
            .map(|_| vac.sample_homodyne(Quadrature::X1, &mut rng).value)
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 3.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn embedding_is_block_diagonal() {
        let sq = GaussianMode::squeezed(Quadrature::X1, 1.5, 2.0).unwrap();
        let st = TwoModeGaussianState::embed_with_vacuum(&sq);
        let c = st.cov();
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(c[(i, j)], 0.0);
                assert_eq!(c[(j, i)], 0.0);
            }
        }
        assert_eq!(c[(0, 0)], sq.var(Quadrature::X1));
        assert_eq!(c[(1, 1)], sq.var(Quadrature::X2));
        assert_eq!(c[(2, 2)], 0.25);
        assert_eq!(c[(3, 3)], 0.25);
        assert_eq!(st.mean()[0], 1.5);

        let vac2 = TwoModeGaussianState::embed_with_vacuum(&GaussianMode::vacuum());
        assert_eq!(*vac2.cov(), Matrix4::identity() * 0.25);
    }

    #[test]
    fn beam_splitter_validation() {
        assert!(BeamSplitter::new(0.7, 0.3).is_ok());
        assert!(BeamSplitter::new(0.7, 0.2).is_err());
        assert!(BeamSplitter::new(1.2, -0.2).is_err());
        let s = BeamSplitter::new(0.3, 0.7).unwrap().matrix();
        assert_relative_eq!(s * s.transpose(), Matrix4::identity(), epsilon = 1e-15);
    }

    #[test]
    fn identity_splitter_leaves_state() {
        let sq = GaussianMode::squeezed(Quadrature::X1, 0.4, 1.0).unwrap();
        let st = TwoModeGaussianState::embed_with_vacuum(&sq);
        let out = st.apply_beam_splitter(&BeamSplitter::new(1.0, 0.0).unwrap());
        assert_eq!(out, st);
    }

    #[test]
    fn reversed_balanced_splitter_undoes_itself() {
        let sq = GaussianMode::squeezed(Quadrature::X2, -0.8, 1.3).unwrap();
        let st = TwoModeGaussianState::embed_with_vacuum(&sq);
        let s = BeamSplitter::balanced().matrix();
        // Reversing the sign convention (R → −R amplitude) is the transpose.
        let back = st.transform(&s).transform(&s.transpose());
        assert_relative_eq!(back.cov(), st.cov(), epsilon = 1e-14);
        assert_relative_eq!(back.mean(), st.mean(), epsilon = 1e-14);
    }

    #[test]
    fn tapped_port_moments() {
        let (r, s, refl) = (1.7f64, 2.0, 0.1);
        let sigma = (-r).exp();
        let sq = GaussianMode::squeezed(Quadrature::X1, s, r).unwrap();
        let out = TwoModeGaussianState::embed_with_vacuum(&sq)
            .apply_beam_splitter(&BeamSplitter::from_reflection(refl).unwrap());
        let (m, v) = out.quadrature_moments(ModeIndex::Two, Quadrature::X1);
        assert_relative_eq!(m, -refl.sqrt() * s, max_relative = 1e-14);
        assert_relative_eq!(v, (1.0 - refl + refl * sigma * sigma) / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn conditioning_without_coupling_is_identity() {
        let sq = GaussianMode::squeezed(Quadrature::X1, 0.9, 2.2).unwrap();
        let st = TwoModeGaussianState::embed_with_vacuum(&sq)
            .apply_beam_splitter(&BeamSplitter::new(1.0, 0.0).unwrap());
        for y in [-3.0, 0.0, 1.2] {
            let m = st
                .condition_on_homodyne(ModeIndex::Two, Quadrature::X1, y)
                .unwrap();
            assert_eq!(m, sq);
        }
    }

    #[test]
    fn conditioned_width_and_center() {
        let (r, s, refl, y) = (2.0f64, 1.3, 0.05, -0.2);
        let t = 1.0 - refl;
        let sigma = (-r).exp();
        let sq = GaussianMode::squeezed(Quadrature::X1, s, r).unwrap();
        let st = TwoModeGaussianState::embed_with_vacuum(&sq)
            .apply_beam_splitter(&BeamSplitter::new(t, refl).unwrap());
        let m = st
            .condition_on_homodyne(ModeIndex::Two, Quadrature::X1, y)
            .unwrap();
        let width = sigma / (t + sigma * sigma * refl).sqrt();
        assert_relative_eq!(m.var(Quadrature::X1), width * width / 4.0, max_relative = 1e-12);
        let center =
            t.sqrt() * (s + refl.sqrt() * (1.0 - sigma * sigma) * y) / (t + refl * sigma * sigma);
        assert_relative_eq!(m.mean(Quadrature::X1), center, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_measurement_rejected() {
        let mut cov = Matrix4::identity() * 0.25;
        cov[(2, 2)] = 0.0;
        let st = TwoModeGaussianState::new(Vector4::zeros(), cov).unwrap();
        assert!(matches!(
            st.condition_on_homodyne(ModeIndex::Two, Quadrature::X1, 0.0),
            Err(Error::DegenerateMeasurement(_))
        ));
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let mut cov = Matrix4::identity() * 0.25;
        cov[(0, 1)] = 0.1;
        assert_eq!(
            TwoModeGaussianState::new(Vector4::zeros(), cov),
            Err(Error::InvalidCovariance)
        );
        let neg = Matrix4::identity() * -0.25;
        assert!(TwoModeGaussianState::new(Vector4::zeros(), neg).is_err());
    }

    #[test]
    fn pure_states_have_quarter_symplectic_spectrum() {
        let sq = GaussianMode::squeezed(Quadrature::X1, 0.0, 2.5).unwrap();
        let st = TwoModeGaussianState::embed_with_vacuum(&sq)
            .apply_beam_splitter(&BeamSplitter::from_reflection(0.37).unwrap());
        let (lo, hi) = st.symplectic_eigenvalues();
        // ν± come from a square root of a near-zero discriminant.
        assert_relative_eq!(lo, 0.25, max_relative = 1e-6);
        assert_relative_eq!(hi, 0.25, max_relative = 1e-6);
    }
}
