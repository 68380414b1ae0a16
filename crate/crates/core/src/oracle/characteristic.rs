use num_complex::Complex64;

use super::grid::Grid1D;
use super::wavefunction::WavefunctionGrid1D;
use crate::error::{Error, Result};

/// Largest tolerated deviation of the inverted density's integral from one.
pub const ALIASING_TOLERANCE: f64 = 1e-4;

/// Most negative density value accepted from an inversion.
pub const NEGATIVITY_TOLERANCE: f64 = -1e-8;

/// Uniform symmetric sampling `p_k = k·Δp`, `k = −m..=m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PSampling {
    pub half_points: usize,
    pub dp: f64,
}

impl PSampling {
    pub fn new(half_points: usize, dp: f64) -> Result<Self> {
        if half_points == 0 {
            return Err(Error::InvalidPGrid("need at least one positive sample"));
        }
        if !(dp > 0.0 && dp.is_finite()) {
            return Err(Error::InvalidPGrid("spacing must be positive and finite"));
        }
        Ok(PSampling { half_points, dp })
    }

    /// Sampling for a state whose narrowest `X1` variance is `min_var`, to be
    /// evolved through loss `gamma_t` and inverted without aliasing over a
    /// window of length `period`.
    ///
    /// The samples reach `|χ| ≈ e^{-40}` and the evolved spacing
    /// `Δp·e^{γt/2}` keeps the alias period `π/Δp'` at `period`.
    pub fn for_evolution(min_var: f64, gamma_t: f64, period: f64) -> Result<Self> {
        if !(min_var > 0.0) || !(period > 0.0) || !(gamma_t >= 0.0) || !gamma_t.is_finite() {
            return Err(Error::InvalidPGrid("non-positive width, period or loss"));
        }
        let dp = std::f64::consts::PI / period * (-gamma_t / 2.0).exp();
        let p_max = (20.0 / min_var).sqrt();
        PSampling::new((p_max / dp).ceil() as usize, dp)
    }

    #[inline]
    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - self.half_points as f64) * self.dp
    }

    pub fn len(&self) -> usize {
        2 * self.half_points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Symmetrically ordered characteristic function restricted to the `q = 0`
/// line, `χ(p) = Tr(e^{2ipX1} ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFunction1D {
    sampling: PSampling,
    values: Vec<Complex64>,
}

impl CharacteristicFunction1D {
    pub fn from_fn(sampling: PSampling, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..sampling.len()).map(|k| f(sampling.p(k))).collect();
        CharacteristicFunction1D { sampling, values }
    }

    /// `χ(p) = ∫ dx e^{2ipx} ρ(x)` by quadrature over a sampled density.
    pub fn from_density(grid: &Grid1D, density: &[f64], sampling: PSampling) -> Self {
        let dx = grid.dx();
        let xs: Vec<f64> = grid.points().collect();
        let mut values = vec![Complex64::new(0.0, 0.0); sampling.len()];
        let m = sampling.half_points;
        // χ(−p) = conj χ(p) for a real density; compute p ≥ 0 only.
        values[m] = Complex64::new(density.iter().sum::<f64>() * dx, 0.0);
        for k in 1..=m {
            let p = k as f64 * sampling.dp;
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in xs.iter().zip(density) {
                let (s, c) = (2.0 * p * x).sin_cos();
                acc += Complex64::new(w * c, w * s);
            }
            acc *= dx;
            values[m + k] = acc;
            values[m - k] = acc.conj();
        }
        CharacteristicFunction1D { sampling, values }
    }

    pub fn from_wavefunction(psi: &WavefunctionGrid1D, sampling: PSampling) -> Self {
        CharacteristicFunction1D::from_density(psi.grid(), &psi.density(), sampling)
    }

    pub fn sampling(&self) -> &PSampling {
        &self.sampling
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn p(&self, k: usize) -> f64 {
        self.sampling.p(k)
    }

    pub fn at_origin(&self) -> Complex64 {
        self.values[self.sampling.half_points]
    }

    /// Largest `|χ(−p) − conj χ(p)|` over the samples.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.sampling.half_points;
        (1..=m)
            .map(|k| (self.values[m - k] - self.values[m + k].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Loss evolution `χ(p, t) = exp[−(1 − e^{-γt}) p²/2] χ(e^{-γt/2} p, 0)`.
///
/// Evaluated without interpolation: the sample at `p_k` becomes the sample
/// at `e^{γt/2} p_k`, so the returned function lives on a grid stretched by
/// `e^{γt/2}`.
pub fn evolve_characteristic(chi0: &CharacteristicFunction1D, gamma_t: f64) -> Result<CharacteristicFunction1D> {
    if !(gamma_t >= 0.0) || !gamma_t.is_finite() {
        return Err(Error::InvalidLoss(gamma_t));
    }
    let stretch = (gamma_t / 2.0).exp();
    let damping = -(-gamma_t).exp_m1();
    let sampling = PSampling::new(chi0.sampling.half_points, chi0.sampling.dp * stretch)?;
    let values = chi0
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let p = sampling.p(k);
            v * (-damping * p * p / 2.0).exp()
        })
        .collect();
    Ok(CharacteristicFunction1D { sampling, values })
}

/// `⟨x|ρ|x⟩ = (1/π) ∫ dp e^{-2ixp} χ(p)` on `grid`, by the trapezoid rule.
///
/// Rejects the inversion when the density fails to integrate to one within
/// [`ALIASING_TOLERANCE`] or dips below [`NEGATIVITY_TOLERANCE`].
pub fn pdf_from_characteristic(chi: &CharacteristicFunction1D, grid: &Grid1D) -> Result<Vec<f64>> {
    let m = chi.sampling.half_points;
    let dp = chi.sampling.dp;
    let density: Vec<f64> = grid
        .points()
        .map(|x| {
            let mut acc = 0.5 * chi.values[m].re;
            let step = Complex64::from_polar(1.0, -2.0 * x * dp);
            let mut phase = step;
            for k in 1..=m {
                let w = if k == m { 0.5 } else { 1.0 };
                // Pair p and −p: e^{-2ixp}χ(p) + e^{2ixp}χ(−p) = 2 Re[e^{-2ixp}χ(p)].
                acc += w * (phase * chi.values[m + k]).re;
                phase *= step;
            }
            2.0 * acc * dp / std::f64::consts::PI
        })
        .collect();
    let integral = density.iter().sum::<f64>() * grid.dx();
    let min_density = density.iter().copied().fold(f64::INFINITY, f64::min);
    if (integral - 1.0).abs() > ALIASING_TOLERANCE || min_density < NEGATIVITY_TOLERANCE {
        return Err(Error::Aliasing {
            integral,
            min_density,
        });
    }
    Ok(density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Quadrature;
    use crate::oracle::build_squeezed_wavefunction;
    use approx::assert_relative_eq;

    fn vacuum_chi(sampling: PSampling) -> CharacteristicFunction1D {
        CharacteristicFunction1D::from_fn(sampling, |p| Complex64::new((-p * p / 2.0).exp(), 0.0))
    }

    #[test]
    fn zero_loss_is_identity() {
        let s = PSampling::new(200, 0.05).unwrap();
        let chi = CharacteristicFunction1D::from_fn(s, |p| Complex64::from_polar((-p * p).exp(), 0.7 * p));
        let out = evolve_characteristic(&chi, 0.0).unwrap();
        assert_eq!(out, chi);
        assert!(evolve_characteristic(&chi, -0.1).is_err());
    }

    #[test]
    fn heavy_loss_approaches_vacuum() {
        let s = PSampling::new(400, 0.05).unwrap();
        let chi = CharacteristicFunction1D::from_fn(s, |p| {
            Complex64::from_polar((-2.0 * p * p * 0.01).exp(), 2.0 * p * 1.5)
        });
        let mut last = f64::INFINITY;
        for gt in [1.0, 3.0, 6.0, 10.0] {
            let out = evolve_characteristic(&chi, gt).unwrap();
            let vac = vacuum_chi(*out.sampling());
            let err = out
                .values()
                .iter()
                .zip(vac.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn evolution_preserves_normalisation_and_symmetry() {
        let grid = Grid1D::centered(0.8, 2.0, 512).unwrap();
        let psi = build_squeezed_wavefunction(Quadrature::X1, 1.0, 0.8, grid).unwrap();
        let s = PSampling::for_evolution(psi.moments().1, 0.4, 12.0).unwrap();
        let chi0 = CharacteristicFunction1D::from_wavefunction(&psi, s);
        let chi = evolve_characteristic(&chi0, 0.4).unwrap();
        assert_relative_eq!(chi.at_origin().re, 1.0, max_relative = 1e-12);
        assert!(chi.at_origin().im.abs() < 1e-15);
        assert!(chi.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn vacuum_inverts_to_vacuum_density() {
        let s = PSampling::for_evolution(0.25, 0.0, 20.0).unwrap();
        let grid = Grid1D::centered(0.0, 5.0, 256).unwrap();
        let pdf = pdf_from_characteristic(&vacuum_chi(s), &grid).unwrap();
        for (x, p) in grid.points().zip(&pdf) {
            let expected = (-2.0 * x * x).exp() / (std::f64::consts::PI * 0.5).sqrt();
            assert!((p - expected).abs() < 1e-10);
        }
        let integral: f64 = pdf.iter().sum::<f64>() * grid.dx();
        assert!((integral - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coarse_sampling_is_rejected() {
        // Alias period π/Δp = 1 is far narrower than the vacuum support.
        let s = PSampling::new(50, std::f64::consts::PI).unwrap();
        let grid = Grid1D::centered(0.0, 5.0, 256).unwrap();
        assert!(matches!(
            pdf_from_characteristic(&vacuum_chi(s), &grid),
            Err(Error::Aliasing { .. })
        ));
    }
}
