//! Side-by-side evaluations of closed forms, the Gaussian engine and the
//! grid oracle for the same physical situation.

use num_complex::Complex64;

use super::characteristic::{evolve_characteristic, pdf_from_characteristic, CharacteristicFunction1D, PSampling};
use super::grid::Grid1D;
use super::wavefunction::{build_squeezed_wavefunction, WavefunctionGrid2D};
use crate::channel::loss_evolve;
use crate::error::Result;
use crate::gaussian::{BeamSplitter, GaussianMode, ModeIndex, Quadrature, TwoModeGaussianState};

/// Points along `x₁₁` for tap comparisons.
pub const TAP_POINTS_X11: usize = 2048;
/// Points along `x₁₂` for tap comparisons.
pub const TAP_POINTS_X12: usize = 512;

/// Width (`2·sd`) and centre of Bob's state after a tap, by three routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapComparison {
    pub closed_width: f64,
    pub closed_center: f64,
    pub engine_width: f64,
    pub engine_center: f64,
    pub grid_width: f64,
    pub grid_center: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

impl TapComparison {
    pub fn engine_rel_error(&self) -> f64 {
        rel(self.engine_width, self.closed_width).max(rel(self.engine_center, self.closed_center))
    }

    pub fn grid_rel_error(&self) -> f64 {
        rel(self.grid_width, self.closed_width).max(rel(self.grid_center, self.closed_center))
    }
}

/// An `x₁` state of width `σ = e^{-r}` at `s` meets vacuum on a beam splitter
/// of reflectivity `R`; Eve reads `y` on the reflected `X₁` port.
pub fn compare_tap(reflection: f64, r: f64, s: f64, y: f64) -> Result<TapComparison> {
    let bs = BeamSplitter::from_reflection(reflection)?;
    let t = bs.transmission();
    let sigma = (-r).exp();
    let sigma2 = sigma * sigma;

    let closed_width = sigma / (t + sigma2 * reflection).sqrt();
    let closed_center = t.sqrt() * (s + reflection.sqrt() * (1.0 - sigma2) * y) / (t + sigma2 * reflection);

    let input = GaussianMode::squeezed(Quadrature::X1, s, r)?;
    let conditioned = TwoModeGaussianState::embed_with_vacuum(&input)
        .apply_beam_splitter(&bs)
        .condition_on_homodyne(ModeIndex::Two, Quadrature::X1, y)?;

    // x₁₁ grid spans the input and the conditioned slice, 8 sd each side.
    let sd = sigma / 2.0 * (t + sigma2 * reflection).sqrt().recip().max(1.0);
    let lo = s.min(closed_center) - 8.0 * sd;
    let hi = s.max(closed_center) + 8.0 * sd;
    let axis1 = Grid1D::new(lo, hi, TAP_POINTS_X11)?;
    let reach = (reflection.sqrt() * s).abs().max(y.abs()) + 4.5;
    let axis2 = Grid1D::centered(0.0, reach, TAP_POINTS_X12)?;

    let psi = build_squeezed_wavefunction(Quadrature::X1, r, s, axis1)?;
    let vac = build_squeezed_wavefunction(Quadrature::X1, 0.0, 0.0, axis2)?;
    let slice = WavefunctionGrid2D::product(&psi, &vac)
        .beam_splitter_transform(t, reflection)?
        .collapse_on_x12(y)?;
    let (grid_center, grid_var) = slice.moments();

    Ok(TapComparison {
        closed_width,
        closed_center,
        engine_width: 2.0 * conditioned.stddev(Quadrature::X1),
        engine_center: conditioned.mean(Quadrature::X1),
        grid_width: 2.0 * grid_var.sqrt(),
        grid_center,
    })
}

/// Loss-evolved `X₁` density of a squeezed state, via the characteristic
/// function, against the closed-form Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct LossComparison {
    pub grid: Grid1D,
    pub oracle_pdf: Vec<f64>,
    pub closed_pdf: Vec<f64>,
}

impl LossComparison {
    pub fn l1_distance(&self) -> f64 {
        self.oracle_pdf
            .iter()
            .zip(&self.closed_pdf)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.dx()
    }
}

pub fn compare_loss(axis: Quadrature, r: f64, center: f64, gamma_t: f64, points: usize) -> Result<LossComparison> {
    let mode0 = GaussianMode::squeezed(axis, center, r)?;
    let closed = loss_evolve(&mode0, gamma_t)?;
    let (m0, sd0) = (mode0.mean(Quadrature::X1), mode0.stddev(Quadrature::X1));
    let (m1, sd1) = (closed.mean(Quadrature::X1), closed.stddev(Quadrature::X1));

    let in_grid = Grid1D::centered(m0, 10.0 * sd0, points)?;
    let psi = build_squeezed_wavefunction(axis, r, center, in_grid)?;
    let out_grid = Grid1D::centered(m1, 10.0 * sd1, points)?;
    let period = 22.0 * sd1;
    let sampling = PSampling::for_evolution(sd0 * sd0, gamma_t, period)?;
    let chi0 = CharacteristicFunction1D::from_wavefunction(&psi, sampling);
    let chi = evolve_characteristic(&chi0, gamma_t)?;
    let oracle_pdf = pdf_from_characteristic(&chi, &out_grid)?;
    let closed_pdf = out_grid.points().map(|x| closed.pdf(Quadrature::X1, x)).collect();
    Ok(LossComparison {
        grid: out_grid,
        oracle_pdf,
        closed_pdf,
    })
}

/// Closed-form characteristic function of a one-mode Gaussian on `q = 0`.
pub fn gaussian_characteristic(mode: &GaussianMode, sampling: PSampling) -> CharacteristicFunction1D {
    let (m, v) = (mode.mean(Quadrature::X1), mode.var(Quadrature::X1));
    CharacteristicFunction1D::from_fn(sampling, |p| Complex64::from_polar((-2.0 * v * p * p).exp(), 2.0 * m * p))
}
