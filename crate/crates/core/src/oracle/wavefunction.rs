use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::Grid1D;
use crate::error::{Error, Result};
use crate::gaussian::{BeamSplitter, Quadrature};

/// Minimum number of standard deviations a wavefunction grid must cover on
/// each side of the centre.
pub const COVERAGE_SIGMAS: f64 = 6.0;

/// Slices carrying less probability density than this are rejected.
pub const MIN_SLICE_NORM: f64 = 1e-12;

/// Amplitudes `⟨x₁|ψ⟩` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid1D {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WavefunctionGrid1D {
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = grid.points().map(f).collect();
        WavefunctionGrid1D { grid, amplitudes }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `Σ|ψ|²Δx`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm > 0.0) {
            return Err(Error::NegligibleSlice { y: f64::NAN, norm });
        }
        let k = norm.sqrt().recip();
        self.amplitudes.iter_mut().for_each(|a| *a *= k);
        Ok(())
    }

    /// `|ψ(x_i)|²` at every node.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Mean and variance of `X1` from the grid density.
    pub fn moments(&self) -> (f64, f64) {
        density_moments(&self.grid, &self.density())
    }

    /// Mean and variance of `X2 = −(i/2) d/dx₁`, using a spectral derivative.
    /// The wavefunction must vanish at both grid edges.
    pub fn x2_moments(&self) -> (f64, f64) {
        let n = self.amplitudes.len();
        let dx = self.grid.dx();
        let mut buf = self.amplitudes.clone();
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(n).process(&mut buf);
        let period = n as f64 * dx;
        for (k, c) in buf.iter_mut().enumerate() {
            let freq = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let kx = 2.0 * std::f64::consts::PI * freq / period;
            // Drop the unpaired Nyquist mode.
            let kx = if 2 * k == n { 0.0 } else { kx };
            *c *= Complex64::new(0.0, kx) / n as f64;
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        let norm = self.norm();
        let half = Complex64::new(0.0, -0.5);
        let mean = self
            .amplitudes
            .iter()
            .zip(&buf)
            .map(|(psi, d)| (psi.conj() * half * d).re)
            .sum::<f64>()
            * dx
            / norm;
        let second = buf.iter().map(|d| d.norm_sqr()).sum::<f64>() * dx / (4.0 * norm);
        (mean, second - mean * mean)
    }

    /// Plain-text table: a header line, then `x re im` per node.
    pub fn write_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x re_psi im_psi")?;
        for (x, a) in self.grid.points().zip(&self.amplitudes) {
            writeln!(out, "{x:.17e} {:.17e} {:.17e}", a.re, a.im)?;
        }
        Ok(())
    }
}

pub(crate) fn density_moments(grid: &Grid1D, density: &[f64]) -> (f64, f64) {
    let mut w = 0.0;
    let mut m1 = 0.0;
    for (x, p) in grid.points().zip(density) {
        w += p;
        m1 += p * x;
    }
    let mean = m1 / w;
    let var = grid
        .points()
        .zip(density)
        .map(|(x, p)| p * (x - mean).powi(2))
        .sum::<f64>()
        / w;
    (mean, var)
}

/// Squeezed vacuum in the `x₁` representation, displaced to `center` along
/// the squeezed `axis`, normalised on the grid.
///
/// An `x₁` state is `(2/(π e^{-2r}))^{1/4} exp[−((x−s)/e^{-r})²]`. An `x₂`
/// state has width `e^{r}` in `x₁` and carries its displacement as the phase
/// `e^{2isx}`.
pub fn build_squeezed_wavefunction(
    axis: Quadrature,
    r: f64,
    center: f64,
    grid: Grid1D,
) -> Result<WavefunctionGrid1D> {
    if !(r >= 0.0) {
        return Err(Error::NegativeSqueezing(r));
    }
    let (width, x0, k) = match axis {
        Quadrature::X1 => ((-r).exp(), center, 0.0),
        Quadrature::X2 => (r.exp(), 0.0, 2.0 * center),
    };
    let sd = width / 2.0;
    grid.require_cover(x0 - COVERAGE_SIGMAS * sd, x0 + COVERAGE_SIGMAS * sd)?;
    let pref = (2.0 / (std::f64::consts::PI * width * width)).powf(0.25);
    let mut psi = WavefunctionGrid1D::from_fn(grid, |x| {
        let u = (x - x0) / width;
        Complex64::from_polar(pref * (-u * u).exp(), k * x)
    });
    psi.normalize()?;
    Ok(psi)
}

/// Two-mode amplitudes `Ψ(x₁₁, x₁₂)`, row-major in `x₁₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid2D {
    axis1: Grid1D,
    axis2: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WavefunctionGrid2D {
    pub fn from_fn(axis1: Grid1D, axis2: Grid1D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut amplitudes = Vec::with_capacity(axis1.len() * axis2.len());
        for x1 in axis1.points() {
            for x2 in axis2.points() {
                amplitudes.push(f(x1, x2));
            }
        }
        WavefunctionGrid2D {
            axis1,
            axis2,
            amplitudes,
        }
    }

    /// `ψ(x₁₁)·φ(x₁₂)`.
    pub fn product(first: &WavefunctionGrid1D, second: &WavefunctionGrid1D) -> Self {
        let mut amplitudes = Vec::with_capacity(first.amplitudes.len() * second.amplitudes.len());
        for a in &first.amplitudes {
            amplitudes.extend(second.amplitudes.iter().map(|b| a * b));
        }
        WavefunctionGrid2D {
            axis1: first.grid,
            axis2: second.grid,
            amplitudes,
        }
    }

    pub fn axis1(&self) -> &Grid1D {
        &self.axis1
    }

    pub fn axis2(&self) -> &Grid1D {
        &self.axis2
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[i * self.axis2.len() + j]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.axis1.dx() * self.axis2.dx()
    }

    /// Separable cubic interpolation; nodes off the grid count as zero.
    pub fn interpolate(&self, x1: f64, x2: f64) -> Complex64 {
        let (n1, n2) = (self.axis1.len() as isize, self.axis2.len() as isize);
        let (i0, wi) = self.axis1.cubic_stencil(x1);
        let (j0, wj) = self.axis2.cubic_stencil(x2);
        if i0 + 3 < 0 || i0 >= n1 || j0 + 3 < 0 || j0 >= n2 {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (di, w1) in wi.iter().enumerate() {
            let i = i0 + di as isize;
            if i < 0 || i >= n1 {
                continue;
            }
            let row = i as usize * n2 as usize;
            let mut inner = Complex64::new(0.0, 0.0);
            for (dj, w2) in wj.iter().enumerate() {
                let j = j0 + dj as isize;
                if j < 0 || j >= n2 {
                    continue;
                }
                inner += self.amplitudes[row + j as usize] * w2;
            }
            acc += inner * w1;
        }
        acc
    }

    /// Density of `x₁₂` after integrating out `x₁₁`.
    pub fn marginal2(&self) -> Vec<f64> {
        let n2 = self.axis2.len();
        let mut out = vec![0.0; n2];
        for row in self.amplitudes.chunks_exact(n2) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.norm_sqr();
            }
        }
        let dx1 = self.axis1.dx();
        out.iter_mut().for_each(|o| *o *= dx1);
        out
    }

    /// Mean and variance of `X₁₂`.
    pub fn marginal2_moments(&self) -> (f64, f64) {
        density_moments(&self.axis2, &self.marginal2())
    }

    /// `Ψ_out(x₁₁, x₁₂) = Ψ_in(√T x₁₁ − √R x₁₂, √R x₁₁ + √T x₁₂)`, resampled
    /// on the same grid.
    pub fn beam_splitter_transform(&self, transmission: f64, reflection: f64) -> Result<Self> {
        let bs = BeamSplitter::new(transmission, reflection)?;
        let (t, r) = (bs.transmission().sqrt(), bs.reflection().sqrt());
        Ok(WavefunctionGrid2D::from_fn(self.axis1, self.axis2, |x1, x2| {
            self.interpolate(t * x1 - r * x2, r * x1 + t * x2)
        }))
    }

    /// Mode-1 wavefunction after `X₁₂` is found equal to `y`: the `x₁₂ = y`
    /// slice, interpolated along `x₁₂`, renormalised.
    pub fn collapse_on_x12(&self, y: f64) -> Result<WavefunctionGrid1D> {
        if !self.axis2.contains(y) {
            return Err(Error::InsufficientGrid {
                x_min: self.axis2.x_min(),
                x_max: self.axis2.x_max(),
                needed_min: y,
                needed_max: y,
            });
        }
        let n2 = self.axis2.len() as isize;
        let (j0, w) = self.axis2.cubic_stencil(y);
        let amplitudes: Vec<Complex64> = self
            .amplitudes
            .chunks_exact(n2 as usize)
            .map(|row| {
                w.iter()
                    .enumerate()
                    .filter_map(|(dj, wj)| {
                        let j = j0 + dj as isize;
                        (0..n2).contains(&j).then(|| row[j as usize] * wj)
                    })
                    .sum()
            })
            .collect();
        let mut slice = WavefunctionGrid1D {
            grid: self.axis1,
            amplitudes,
        };
        let norm = slice.norm();
        if !(norm >= MIN_SLICE_NORM) {
            return Err(Error::NegligibleSlice { y, norm });
        }
        slice.normalize()?;
        Ok(slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(c: f64, h: f64, n: usize) -> Grid1D {
        Grid1D::centered(c, h, n).unwrap()
    }

    #[test]
    fn vacuum_moments() {
        let psi = build_squeezed_wavefunction(Quadrature::X1, 0.0, 0.0, grid(0.0, 5.0, 1024)).unwrap();
        let (m, v) = psi.moments();
        assert!(m.abs() < 1e-12);
        assert_relative_eq!(v, 0.25, max_relative = 1e-6);
        let (m2, v2) = psi.x2_moments();
        assert!(m2.abs() < 1e-12);
        assert_relative_eq!(v2, 0.25, max_relative = 1e-6);
        assert_relative_eq!(psi.norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn strongly_squeezed_width() {
        let r = -0.5 * (2.0f64 * 6.2e-4).ln();
        let psi = build_squeezed_wavefunction(Quadrature::X1, r, 0.0, grid(0.0, 0.3, 1024)).unwrap();
        let (_, v) = psi.moments();
        assert_relative_eq!(v, 6.2e-4 / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn x2_state_in_x1_representation() {
        let (r, s) = (1.0, 0.5);
        let psi = build_squeezed_wavefunction(Quadrature::X2, r, s, grid(0.0, 12.0, 2048)).unwrap();
        let (m1, v1) = psi.moments();
        let (m2, v2) = psi.x2_moments();
        assert!(m1.abs() < 1e-10);
        assert_relative_eq!(v1, (2.0f64).exp() / 4.0, max_relative = 1e-6);
        assert_relative_eq!(m2, s, max_relative = 1e-6);
        assert_relative_eq!(v2, (-2.0f64).exp() / 4.0, max_relative = 1e-6);
    }

    #[test]
    fn narrow_grid_rejected() {
        let err = build_squeezed_wavefunction(Quadrature::X1, 0.0, 0.0, grid(0.0, 2.0, 256));
        assert!(matches!(err, Err(Error::InsufficientGrid { .. })));
    }

    #[test]
    fn identity_splitter_reproduces_grid() {
        let a = build_squeezed_wavefunction(Quadrature::X1, 1.0, 0.4, grid(0.4, 2.0, 128)).unwrap();
        let b = build_squeezed_wavefunction(Quadrature::X1, 0.0, 0.0, grid(0.0, 4.0, 128)).unwrap();
        let psi = WavefunctionGrid2D::product(&a, &b);
        let out = psi.beam_splitter_transform(1.0, 0.0).unwrap();
        for (x, y) in out.amplitudes.iter().zip(&psi.amplitudes) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(psi.beam_splitter_transform(0.9, 0.2).is_err());
    }

    #[test]
    fn unit_transmission_slice_ignores_outcome() {
        let a = build_squeezed_wavefunction(Quadrature::X1, 1.0, 0.4, grid(0.4, 2.0, 256)).unwrap();
        let b = build_squeezed_wavefunction(Quadrature::X1, 0.0, 0.0, grid(0.0, 4.0, 256)).unwrap();
        let psi = WavefunctionGrid2D::product(&a, &b).beam_splitter_transform(1.0, 0.0).unwrap();
        for y in [-1.3, 0.0, 0.77] {
            let slice = psi.collapse_on_x12(y).unwrap();
            for (u, v) in slice.amplitudes().iter().zip(a.amplitudes()) {
                assert!((u - v).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn improbable_slice_rejected() {
        let a = build_squeezed_wavefunction(Quadrature::X1, 1.0, 0.0, grid(0.0, 2.0, 128)).unwrap();
        let b = build_squeezed_wavefunction(Quadrature::X1, 0.0, 0.0, grid(0.0, 8.0, 128)).unwrap();
        let psi = WavefunctionGrid2D::product(&a, &b);
        assert!(matches!(psi.collapse_on_x12(7.5), Err(Error::NegligibleSlice { .. })));
        assert!(matches!(psi.collapse_on_x12(9.0), Err(Error::InsufficientGrid { .. })));
    }

    #[test]
    fn table_dump_has_header() {
        let a = build_squeezed_wavefunction(Quadrature::X1, 0.0, 0.0, grid(0.0, 4.0, 64)).unwrap();
        let mut buf = Vec::new();
        a.write_table(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x re_psi im_psi"));
        assert_eq!(lines.count(), 64);
    }
}
