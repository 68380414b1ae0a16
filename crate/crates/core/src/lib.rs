//! Simulator for squeezed-state quantum key distribution.
//!
//! * [`gaussian`]: single- and two-mode Gaussian states, homodyne statistics,
//!   beam splitters and conditioning.
//! * [`channel`]: fibre loss, phase-sensitive amplification, Bob's
//!   estimators, loss budgets and the amplifier gain window.
//! * [`oracle`]: grid wavefunctions and characteristic functions used to
//!   check the closed forms independently.
//! * [`protocol`]: sessions, sifting, eavesdroppers and detection.
//!
//! Quadratures follow `X1 = (a + a†)/2`, so the vacuum variance is 1/4.

// Finite-value checks are written as `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod gaussian;
pub mod oracle;
pub mod protocol;
pub mod rng;

pub use channel::{
    amplified_link, estimator_stats, gain_window, loss_budget, loss_evolve, EstimatorKind,
    EstimatorStats, FiberSegment, GainWindow, LinkBudget, PhaseSensitiveAmplifier,
};
pub use error::{Error, Result};
pub use gaussian::{
    BeamSplitter, GaussianMode, HomodyneSample, ModeIndex, Quadrature, TwoModeGaussianState,
};
pub use protocol::{
    run_session, BinningScheme, DetectionReport, EveStrategy, RoundRecord, SessionConfig,
    SessionOutcome,
};
