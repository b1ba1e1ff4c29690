//! Uncertainty-aware binary classification for tabular transaction data.
//!
//! The crate trains small fully connected networks, turns them into
//! predictive distributions with Monte Carlo dropout, deep ensembles or
//! ensembles evaluated with MC dropout, and scores the resulting
//! uncertainties with calibration error and the uncertainty confusion
//! matrix (TC / TU / FU / FC).
//!
//! Class 1 is fraud, class 0 is genuine, everywhere.
//!
//! Batch prediction and ensemble training take an [`Execution`] mode. With
//! the default `parallel` feature they fan out on rayon; results are
//! identical in both modes because every input and member draws from its own
//! seeded stream (see [`seed`]).

pub mod data;
mod error;
pub mod eval;
pub mod exec;
pub mod nn;
pub mod seed;
pub mod uq;

pub use error::{Error, ErrorClass, Result};
pub use exec::Execution;
