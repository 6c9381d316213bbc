//! Robust resampling inference for predictive regressions.
//!
//! Simulate persistent-predictor models with optional outlier contamination,
//! fit OLS and Huber-type estimators, and test predictability with
//! conventional or fast robust subsampling and block bootstrap. Quantile
//! breakdown points, data-driven calibration of block size and robustness
//! constant, and Monte Carlo experiments build on these pieces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod breakdown;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod resampling;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
