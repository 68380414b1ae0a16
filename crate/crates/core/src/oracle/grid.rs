use crate::error::{Error, Result};

/// Uniform grid of `n` nodes spanning `[x_min, x_max]` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

pub const MIN_POINTS: usize = 64;

impl Grid1D {
    /// `n` must be a power of two of at least 64.
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < MIN_POINTS || !n.is_power_of_two() || !(x_min < x_max) || !x_max.is_finite() || !x_min.is_finite() {
            return Err(Error::InvalidGrid { n, x_min, x_max });
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    /// Grid of `n` nodes over `center ± half_width`.
    pub fn centered(center: f64, half_width: f64, n: usize) -> Result<Self> {
        Grid1D::new(center - half_width, center + half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.n).map(move |i| self.x_min + i as f64 * dx)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Errors unless `[lo, hi]` lies inside the grid.
    pub fn require_cover(&self, lo: f64, hi: f64) -> Result<()> {
        if lo >= self.x_min && hi <= self.x_max {
            Ok(())
        } else {
            Err(Error::InsufficientGrid {
                x_min: self.x_min,
                x_max: self.x_max,
                needed_min: lo,
                needed_max: hi,
            })
        }
    }

    /// First node index and weights of the four-point cubic-convolution
    /// stencil at `x`. Nodes outside the grid must be treated as zero.
    #[inline]
    pub(crate) fn cubic_stencil(&self, x: f64) -> (isize, [f64; 4]) {
        let f = (x - self.x_min) / self.dx();
        let i = f.floor();
        let t = f - i;
        (i as isize - 1, cubic_weights(t))
    }
}

/// Keys cubic-convolution weights (a = −1/2) for nodes `i−1, i, i+1, i+2`
/// at fractional offset `t ∈ [0, 1)` past node `i`.
#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}
