//! Brute-force wavefunction and characteristic-function oracle.
//!
//! Nothing here touches the closed-form Gaussian algebra of
//! [`crate::gaussian`] or [`crate::channel`]: states are built as sampled
//! `x₁`-representation amplitudes, beam splitters act by resampling rotated
//! coordinates, homodyne outcomes collapse a grid slice, and loss is applied
//! to a numerically computed characteristic function before Fourier
//! inversion. The test suites compare the two routes.

mod characteristic;
pub mod compare;
mod grid;
mod wavefunction;

pub use characteristic::{
    evolve_characteristic, pdf_from_characteristic, CharacteristicFunction1D, PSampling,
    ALIASING_TOLERANCE, NEGATIVITY_TOLERANCE,
};
pub use grid::{Grid1D, MIN_POINTS};
pub use wavefunction::{
    build_squeezed_wavefunction, WavefunctionGrid1D, WavefunctionGrid2D, COVERAGE_SIGMAS,
    MIN_SLICE_NORM,
};

/// Default points per axis of one-dimensional grids.
pub const DEFAULT_POINTS_1D: usize = 1024;

/// Default points per axis of two-dimensional grids.
pub const DEFAULT_POINTS_2D: usize = 512;

/// Default half-extent of a grid in units of the widest standard deviation.
pub const DEFAULT_EXTENT_SIGMAS: f64 = 8.0;
