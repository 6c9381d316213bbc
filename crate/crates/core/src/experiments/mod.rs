//! Monte Carlo studies: power and size, sensitivity of interval length to an
//! outlier, quantiles near a unit root, and out-of-sample forecast comparison.
//!
//! Replicate `i` of grid point `g` draws every random quantity from seeds
//! derived from `(seed, g, i)`, so reports do not depend on thread count, and
//! all methods in a replicate see the same sample.

pub mod oos;
pub mod power;
pub mod report;
pub mod sensitivity;
pub mod surface;

pub use oos::{
    oos_r2, oos_r2_vs_benchmark, oos_study, rolling_oos_study, walk_forward, walk_forward_scored,
    OosConfig, OosStudyConfig, ScoreTarget, WindowScheme,
};
pub use power::{
    power_study, BlockSizeRule, ContaminationSpec, Method, PowerStudyConfig, TestSettings,
};
pub use report::{ExperimentReport, ReportRow, SCHEMA_VERSION};
pub use sensitivity::{sensitivity_study, SensitivityConfig};
pub use surface::{quantile_surface, QuantileSurfaceConfig};
