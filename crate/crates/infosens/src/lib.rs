//! Interaction-aware, information-theoretic sensitivity analysis of
//! optimization results.
//!
//! The crate identifies which input features of an optimization run drive the
//! objective: a conditional-mutual-information forward selection with
//! permutation-test stopping picks the relevant features, partial information
//! decomposition splits pairwise contributions into unique, redundant and
//! synergistic parts, and nearest-neighbor prediction validates selected sets
//! against classical MI-based ranking criteria. A synthetic blade-shape
//! optimization generator produces realistic run data to analyze.

pub mod baselines;
pub mod data;
pub mod datagen;
pub mod error;
pub mod estimators;
pub mod pid;
pub mod selection;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
