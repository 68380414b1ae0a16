use thiserror::Error;

use crate::gaussian::Quadrature;

/// Errors raised by state construction, channel models, the grid oracle and
/// the protocol engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("squeeze parameter must be non-negative, got {0}")]
    NegativeSqueezing(f64),

    #[error("variance on {axis:?} must be positive and finite, got {value}")]
    InvalidVariance { axis: Quadrature, value: f64 },

    #[error("state violates the uncertainty relation: sqrt(var1*var2) = {product} < 1/4")]
    UncertaintyViolation { product: f64 },

    #[error("beam splitter requires T + R = 1 with T, R in [0, 1], got T = {t}, R = {r}")]
    InvalidBeamSplitter { t: f64, r: f64 },

    #[error("covariance matrix is not symmetric positive semi-definite")]
    InvalidCovariance,

    #[error("cannot condition on quadrature with variance {0}")]
    DegenerateMeasurement(f64),

    #[error("interval must satisfy lo < hi, got [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("loss-time product must be non-negative and finite, got {0}")]
    InvalidLoss(f64),

    #[error("amplifier gain must be >= 1, got {0}")]
    InvalidGain(f64),

    #[error("no admissible loss: (s*delta)^2 = {target} does not exceed initial variance {initial}")]
    NoAdmissibleLoss { target: f64, initial: f64 },

    #[error("link budget requires s_margin in (0, 1) and delta > 0, got s = {s_margin}, delta = {delta}")]
    InvalidLinkBudget { s_margin: f64, delta: f64 },

    #[error("gain window is empty: G_min = {g_min} >= G_max = {g_max}")]
    EmptyGainWindow { g_min: f64, g_max: f64 },

    #[error("grid must have a power-of-two point count >= 64 and x_min < x_max, got n = {n}, [{x_min}, {x_max}]")]
    InvalidGrid { n: usize, x_min: f64, x_max: f64 },

    #[error("grid [{x_min}, {x_max}] does not cover [{needed_min}, {needed_max}]")]
    InsufficientGrid {
        x_min: f64,
        x_max: f64,
        needed_min: f64,
        needed_max: f64,
    },

    #[error("slice at x12 = {y} carries negligible probability ({norm:e})")]
    NegligibleSlice { y: f64, norm: f64 },

    #[error("characteristic-function inversion is aliased or truncated: integral = {integral}, min density = {min_density:e}")]
    Aliasing { integral: f64, min_density: f64 },

    #[error("invalid p-grid: {0}")]
    InvalidPGrid(&'static str),

    #[error("invalid binning: {0}")]
    InvalidBinning(String),

    #[error("invalid session configuration: {0}")]
    InvalidSession(String),

    #[error("check sample of {available} rounds is below the minimum of {required}")]
    InsufficientCheckSample { available: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
