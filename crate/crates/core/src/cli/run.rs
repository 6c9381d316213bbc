//! Calibrated conventional and robust subsampling tests on a dataset, over
//! the full sample or rolling windows, with Huber-weight diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate, CalibrationConfig};
use crate::error::{Error, Result};
use crate::experiments::SCHEMA_VERSION;
use crate::model::TimeSeriesSample;
use crate::resampling::{analyze, Mode, ResamplingConfig};

use super::data::{build_regression, Dataset, RegressionSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestRunConfig {
    pub regression: RegressionSpec,
    /// Observations per rolling window; `None` uses the full sample.
    pub window: Option<usize>,
    /// Confidence level of the reported intervals.
    pub confidence: f64,
    pub calibration: CalibrationConfig,
}

impl Default for TestRunConfig {
    fn default() -> Self {
        Self {
            regression: RegressionSpec::default(),
            window: None,
            confidence: 0.95,
            calibration: CalibrationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowInfo {
    pub index: usize,
    pub start_date: String,
    pub end_date: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub predictor: String,
    /// `conventional` or `robust`.
    pub method: String,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub p_value: f64,
    pub reject_5: bool,
    pub reject_10: bool,
    /// `**` for rejection at 5%, `*` at 10% only.
    pub mark: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatedWeight {
    pub date: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub window: WindowInfo,
    pub block_size: usize,
    pub tuning_c: f64,
    /// Calibration fell back to a default for `m` or `c`.
    pub block_size_fallback: bool,
    pub tuning_c_fallback: bool,
    pub coefficients: Vec<CoefficientRow>,
    pub weights: Vec<DatedWeight>,
    /// Observations with weight below one, most downweighted first.
    pub flagged: Vec<DatedWeight>,
    pub flagged_fraction: f64,
}

/// Result for one window; failures do not stop the other windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowOutcome {
    Report(Box<RunReport>),
    Failed { window: WindowInfo, error: String },
}

fn mark(reject_5: bool, reject_10: bool) -> String {
    match (reject_5, reject_10) {
        (true, _) => "**".into(),
        (false, true) => "*".into(),
        _ => String::new(),
    }
}

fn run_window(
    sample: &TimeSeriesSample,
    dates: &[String],
    predictors: &[String],
    config: &TestRunConfig,
    command: &str,
    window: WindowInfo,
) -> Result<RunReport> {
    let cal = calibrate(sample, &config.calibration)?;
    let (m, c) = (cal.block.m, cal.robustness.c);
    let mut coefficients = Vec::new();
    let mut weights = Vec::new();
    for (method, mode, tuning) in [
        ("conventional", Mode::Conventional, f64::INFINITY),
        ("robust", Mode::FastRobust, c),
    ] {
        let cfg = ResamplingConfig::subsampling(m, mode, tuning);
        for (j, name) in predictors.iter().enumerate() {
            let analysis = analyze(sample, &cfg, j + 1)?;
            let ci = analysis.symmetric_ci(config.confidence)?;
            let at5 = analysis.test(0.95)?;
            let at10 = analysis.test(0.90)?;
            let (reject_5, reject_10) = (at5.reject, at10.reject || at5.reject);
            coefficients.push(CoefficientRow {
                predictor: name.clone(),
                method: method.into(),
                estimate: analysis.estimate(),
                std_error: analysis.std_error(),
                ci_lower: ci.lower,
                ci_upper: ci.upper,
                p_value: at10.p_value,
                reject_5,
                reject_10,
                mark: mark(reject_5, reject_10),
            });
            if mode == Mode::FastRobust && j == 0 {
                weights = analysis.fit.weights.clone();
            }
        }
    }
    let weights: Vec<DatedWeight> = dates
        .iter()
        .zip(&weights)
        .map(|(d, &w)| DatedWeight {
            date: d.clone(),
            weight: w,
        })
        .collect();
    let mut flagged: Vec<DatedWeight> =
        weights.iter().filter(|w| w.weight < 1.0).cloned().collect();
    flagged.sort_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then_with(|| a.date.cmp(&b.date))
    });
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        window,
        block_size: m,
        tuning_c: c,
        block_size_fallback: cal.block.fallback,
        tuning_c_fallback: cal.robustness.fallback,
        coefficients,
        flagged_fraction: flagged.len() as f64 / weights.len() as f64,
        weights,
        flagged,
    })
}

/// Calibrates `(m, c)` and runs both tests per coefficient for the full
/// sample or each rolling window (advancing one period per step). Windows are
/// processed in parallel and returned in order.
pub fn run_test(ds: &Dataset, config: &TestRunConfig, command: &str) -> Result<Vec<WindowOutcome>> {
    if !(config.confidence > 0.0 && config.confidence < 1.0) {
        return Err(Error::Config("confidence must lie in (0, 1)".into()));
    }
    config.calibration.validate()?;
    let aligned = build_regression(ds, &config.regression)?;
    let n = aligned.sample.n();
    let w = config.window.unwrap_or(n);
    if w == 0 || w > n {
        return Err(Error::Config(format!("window {w} must lie in 1..={n}")));
    }
    let outcomes = (0..=n - w)
        .into_par_iter()
        .map(|start| {
            let dates = &aligned.dates[start..start + w];
            let info = WindowInfo {
                index: start,
                start_date: dates[0].clone(),
                end_date: dates[w - 1].clone(),
                n: w,
            };
            let sample = aligned.sample.slice(start, w).to_owned_sample();
            match run_window(
                &sample,
                dates,
                &config.regression.predictors,
                config,
                command,
                info.clone(),
            ) {
                Ok(r) => WindowOutcome::Report(Box::new(r)),
                Err(e) => WindowOutcome::Failed {
                    window: info,
                    error: e.to_string(),
                },
            }
        })
        .collect();
    Ok(outcomes)
}

/// Coefficient tables of all successful windows as one CSV.
pub fn outcomes_to_csv(outcomes: &[WindowOutcome]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "window",
        "start_date",
        "end_date",
        "m",
        "c",
        "predictor",
        "method",
        "estimate",
        "std_error",
        "ci_lower",
        "ci_upper",
        "p_value",
        "mark",
        "flagged_fraction",
        "error",
    ])?;
    for outcome in outcomes {
        match outcome {
            WindowOutcome::Report(r) => {
                for row in &r.coefficients {
                    w.write_record([
                        r.window.index.to_string(),
                        r.window.start_date.clone(),
                        r.window.end_date.clone(),
                        r.block_size.to_string(),
                        r.tuning_c.to_string(),
                        row.predictor.clone(),
                        row.method.clone(),
                        row.estimate.to_string(),
                        row.std_error.to_string(),
                        row.ci_lower.to_string(),
                        row.ci_upper.to_string(),
                        row.p_value.to_string(),
                        row.mark.clone(),
                        r.flagged_fraction.to_string(),
                        String::new(),
                    ])?;
                }
            }
            WindowOutcome::Failed { window, error } => {
                let mut rec = vec![
                    window.index.to_string(),
                    window.start_date.clone(),
                    window.end_date.clone(),
                ];
                rec.extend(std::iter::repeat_n(String::new(), 11));
                rec.push(error.clone());
                w.write_record(&rec)?;
            }
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Data(e.to_string()))?)
        .map_err(|e| Error::Data(e.to_string()))
}
