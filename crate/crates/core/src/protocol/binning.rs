use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bin widths at or above this let a simultaneous X1/X2 measurement resolve
/// the key symbol.
pub const MAX_SECURE_DELTA: f64 = 0.5;

/// How bins map to key symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    /// One distinct symbol per bin.
    #[default]
    Identity,
    /// Alternating 0/1 across neighbouring bins.
    Parity,
}

/// Partition of `[−half_range, half_range]` into bins of width `delta`.
///
/// Bin `k` covers `[−H + kδ, −H + (k+1)δ)`; values beyond the range go to the
/// nearest edge bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningScheme {
    delta: f64,
    half_range: f64,
    n_bins: usize,
    alphabet: Alphabet,
}

impl BinningScheme {
    /// Secure scheme: requires `delta < 1/2`.
    pub fn new(delta: f64, half_range: f64) -> Result<Self> {
        if !(delta < MAX_SECURE_DELTA) {
            return Err(Error::InvalidBinning(format!(
                "delta must be < 1/2, got {delta}"
            )));
        }
        BinningScheme::insecure(delta, half_range)
    }

    /// Any positive width, including the `delta ≥ 1/2` regime that a
    /// simultaneous-measurement attack can read. Meant for attack studies.
    pub fn insecure(delta: f64, half_range: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidBinning(format!("delta must be positive, got {delta}")));
        }
        if !(half_range > 0.0 && half_range.is_finite()) {
            return Err(Error::InvalidBinning(format!(
                "half_range must be positive, got {half_range}"
            )));
        }
        let n_bins = (2.0 * half_range / delta).floor() as usize;
        if n_bins < 2 {
            return Err(Error::InvalidBinning(format!(
                "2*half_range/delta = {} gives fewer than 2 bins",
                2.0 * half_range / delta
            )));
        }
        Ok(BinningScheme {
            delta,
            half_range,
            n_bins,
            alphabet: Alphabet::Identity,
        })
    }

    /// Range spanning the anti-squeezed width `e^{r}/2` of the states, i.e.
    /// `half_range = e^{r}/4`.
    pub fn default_half_range(r: f64) -> f64 {
        r.exp() / 4.0
    }

    pub fn for_squeezing(delta: f64, r: f64) -> Result<Self> {
        BinningScheme::new(delta, BinningScheme::default_half_range(r))
    }

    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Self {
        self.alphabet = alphabet;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn is_secure(&self) -> bool {
        self.delta < MAX_SECURE_DELTA
    }

    /// Bin index of `x`, clamped to the edge bins.
    pub fn bin_of(&self, x: f64) -> usize {
        let k = ((x + self.half_range) / self.delta).floor();
        if k <= 0.0 || k.is_nan() {
            0
        } else {
            (k as usize).min(self.n_bins - 1)
        }
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        -self.half_range + (k as f64 + 0.5) * self.delta
    }

    pub fn bin_interval(&self, k: usize) -> (f64, f64) {
        let lo = -self.half_range + k as f64 * self.delta;
        (lo, lo + self.delta)
    }

    pub fn symbol(&self, k: usize) -> u32 {
        match self.alphabet {
            Alphabet::Identity => k as u32,
            Alphabet::Parity => (k % 2) as u32,
        }
    }
}
