//! Partial-transmit-sequence PAPR reduction for OFDM.
//!
//! * [`signal`]: constellations, oversampled IDFT, PAPR.
//! * [`pts`]: sub-block partitioning, phase-weighted combining, the objective.
//! * [`optimizers`]: artificial bee colony search and the baseline strategies.
//! * [`harness`]: seeded Monte-Carlo CCDF, convergence and comparison runs.
//! * [`cli`]: the `papr-pts` command line.

pub mod cli;
pub mod error;
pub mod harness;
pub mod optimizers;
pub mod pts;
pub mod signal;

pub use error::{Error, Result};
