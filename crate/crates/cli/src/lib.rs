//! Experiment configuration, sweeps and the acceptance suite behind the
//! `sqkd` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod error;
pub mod experiment;

pub use sqkd_core as core;
