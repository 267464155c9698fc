// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

//! Offline tests for a mean change in high-dimensional data streams under
//! heavy-tailed noise, with generators, Monte Carlo calibration, risk
//! estimation and minimax rate curves.

pub mod advanced;
pub mod cli;
pub mod config;
pub mod decision;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod model;
pub mod mom;
pub mod rates;
pub mod rng;
pub mod robust_mean;
pub mod subweibull;

pub use decision::{Decision, GridKind, ScaleDiagnostic};
pub use error::{Error, Result};
pub use model::{DataMatrix, PairedMatrix};
