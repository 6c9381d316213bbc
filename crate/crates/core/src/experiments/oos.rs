//! Out-of-sample forecast comparison by walk-forward refitting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    choose_c, huber_fit, ols_fit, RobustFit, DEFAULT_C_LEVEL, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::model::{DgpConfig, TimeSeriesSample};

use super::power::{replicate_sample, replicate_seeds, ContaminationSpec};
use super::report::{mean_se, ExperimentReport, ReportRow};

/// One period's OLS, robust and historical-mean forecasts.
type Forecast = (f64, f64, f64);
type SummaryMetric = fn(&OosSummary) -> Option<f64>;

/// `1 - sum (y - a)^2 / sum (y - b)^2`: positive when forecasts `a` beat `b`.
/// Identical forecast sequences give 0.
pub fn oos_r2(actuals: &[f64], forecasts_a: &[f64], forecasts_b: &[f64]) -> Result<f64> {
    if actuals.is_empty()
        || actuals.len() != forecasts_a.len()
        || actuals.len() != forecasts_b.len()
    {
        return Err(Error::InvalidInput(
            "oos_r2 needs equal, nonzero lengths".into(),
        ));
    }
    if forecasts_a == forecasts_b {
        return Ok(0.0);
    }
    let sse = |f: &[f64]| {
        actuals
            .iter()
            .zip(f)
            .map(|(y, p)| (y - p).powi(2))
            .sum::<f64>()
    };
    let denominator = sse(forecasts_b);
    if denominator == 0.0 {
        return Err(Error::Undefined(
            "benchmark forecasts are exact; R2 has a zero denominator".into(),
        ));
    }
    Ok(1.0 - sse(forecasts_a) / denominator)
}

/// [`oos_r2`] against a benchmark whose own errors must not all vanish: an
/// exact benchmark leaves the ratio undefined even when both forecasts agree.
pub fn oos_r2_vs_benchmark(actuals: &[f64], forecasts: &[f64], benchmark: &[f64]) -> Result<f64> {
    if actuals.len() == benchmark.len()
        && actuals.iter().zip(benchmark).all(|(y, b)| y == b)
        && !actuals.is_empty()
    {
        return Err(Error::Undefined(
            "benchmark forecasts are exact; R2 has a zero denominator".into(),
        ));
    }
    oos_r2(actuals, forecasts, benchmark)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WindowScheme {
    /// Every fit uses all observations available so far.
    #[default]
    Expanding,
    /// Every fit uses the most recent `window` observations.
    Rolling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OosConfig {
    /// Observations in the first estimation window.
    pub window: usize,
    /// Gap between the last fitted observation and the forecast target.
    pub horizon: usize,
    pub scheme: WindowScheme,
    pub c_level: f64,
}

impl Default for OosConfig {
    fn default() -> Self {
        Self {
            window: 60,
            horizon: 1,
            scheme: WindowScheme::Expanding,
            c_level: DEFAULT_C_LEVEL,
        }
    }
}

/// Aligned walk-forward forecasts over the evaluated periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OosForecasts {
    pub periods: Vec<usize>,
    pub actuals: Vec<f64>,
    pub ols: Vec<f64>,
    pub robust: Vec<f64>,
    pub historical_mean: Vec<f64>,
    /// Periods dropped because a refit failed.
    pub excluded: Vec<usize>,
}

/// R2 statistics of one walk-forward run; `None` when undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OosSummary {
    /// Robust against OLS forecasts.
    pub robust_vs_ols: Option<f64>,
    /// OLS against the historical mean.
    pub ols_vs_mean: Option<f64>,
    /// Robust against the historical mean.
    pub robust_vs_mean: Option<f64>,
    pub evaluated: usize,
    pub excluded: usize,
}

fn predict(fit: &RobustFit, x: &[f64]) -> f64 {
    fit.theta.intercept
        + x.iter()
            .zip(&fit.theta.slopes)
            .map(|(a, b)| a * b)
            .sum::<f64>()
}

/// Forecasts of `y_t` from fits on data through `t - horizon`.
pub fn walk_forward(sample: &TimeSeriesSample, config: &OosConfig) -> Result<OosForecasts> {
    walk_forward_scored(sample, sample.y(), config)
}

/// As [`walk_forward`], but forecasts are scored against `targets` (for
/// instance the responses before contamination) instead of `sample.y()`.
pub fn walk_forward_scored(
    sample: &TimeSeriesSample,
    targets: &[f64],
    config: &OosConfig,
) -> Result<OosForecasts> {
    let n = sample.n();
    if targets.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} targets for {n} observations",
            targets.len()
        )));
    }
    if config.window >= n || config.horizon == 0 {
        return Err(Error::InvalidInput(format!(
            "walk-forward needs 0 < horizon and window < n (window {}, n {n})",
            config.window
        )));
    }
    let first = config.window + config.horizon - 1;
    let results: Vec<(usize, Option<Forecast>)> = (first..n)
        .into_par_iter()
        .map(|t| {
            let end = t + 1 - config.horizon;
            let start = match config.scheme {
                WindowScheme::Expanding => 0,
                WindowScheme::Rolling => end - config.window,
            };
            let train = sample.slice(start, end - start);
            let ys: Vec<f64> = (0..train.len()).map(|i| train.y(i)).collect();
            let mean = crate::stats::mean(&ys);
            // a constant response is fitted exactly by every method
            if ys.iter().all(|&y| y == ys[0]) {
                return (t, Some((ys[0], ys[0], ys[0])));
            }
            let forecast = || -> Result<(f64, f64)> {
                let ols = ols_fit(&train)?;
                let c = choose_c(&train, config.c_level)?;
                let robust = huber_fit(&train, c, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
                let x = sample.x_row(t);
                Ok((predict(&ols, x), predict(&robust, x)))
            };
            (t, forecast().ok().map(|(o, r)| (o, r, mean)))
        })
        .collect();
    let mut out = OosForecasts {
        periods: Vec::new(),
        actuals: Vec::new(),
        ols: Vec::new(),
        robust: Vec::new(),
        historical_mean: Vec::new(),
        excluded: Vec::new(),
    };
    for (t, r) in results {
        match r {
            Some((o, rb, m)) => {
                out.periods.push(t);
                out.actuals.push(targets[t]);
                out.ols.push(o);
                out.robust.push(rb);
                out.historical_mean.push(m);
            }
            None => out.excluded.push(t),
        }
    }
    Ok(out)
}

impl OosForecasts {
    pub fn summary(&self) -> OosSummary {
        let vs_mean = |a: &[f64]| oos_r2_vs_benchmark(&self.actuals, a, &self.historical_mean).ok();
        OosSummary {
            robust_vs_ols: oos_r2(&self.actuals, &self.robust, &self.ols).ok(),
            ols_vs_mean: vs_mean(&self.ols),
            robust_vs_mean: vs_mean(&self.robust),
            evaluated: self.periods.len(),
            excluded: self.excluded.len(),
        }
    }
}

/// R2 statistics of one sample as a report.
pub fn rolling_oos_study(
    sample: &TimeSeriesSample,
    config: &OosConfig,
) -> Result<ExperimentReport> {
    let summary = walk_forward(sample, config)?.summary();
    let key = format!(
        "n={};window={};horizon={}",
        sample.n(),
        config.window,
        config.horizon
    );
    let used = summary.evaluated;
    let cell = |metric: &str, v: Option<f64>| {
        ReportRow::new(
            &key,
            "walk_forward",
            metric,
            v.unwrap_or(f64::NAN),
            0.0,
            used,
        )
    };
    let rows = vec![
        cell("r2_robust_vs_ols", summary.robust_vs_ols),
        cell("r2_ols_vs_mean", summary.ols_vs_mean),
        cell("r2_robust_vs_mean", summary.robust_vs_mean),
        cell("excluded_periods", Some(summary.excluded as f64)),
    ];
    ExperimentReport::new("rolling_oos", config, rows)
}

/// Responses the simulated forecasts are scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreTarget {
    /// The responses the models were fitted on, outliers included.
    #[default]
    Observed,
    /// The responses before contamination.
    Uncontaminated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OosStudyConfig {
    pub dgp: DgpConfig,
    pub contamination: Option<ContaminationSpec>,
    pub score_against: ScoreTarget,
    pub oos: OosConfig,
    pub mc_replications: usize,
    pub seed: u64,
}

impl Default for OosStudyConfig {
    fn default() -> Self {
        Self {
            dgp: DgpConfig::univariate(180, 0.1, 0.9, -1.0),
            contamination: None,
            score_against: ScoreTarget::Observed,
            oos: OosConfig::default(),
            mc_replications: 100,
            seed: 0,
        }
    }
}

/// Average walk-forward R2 statistics over simulated samples.
pub fn oos_study(config: &OosStudyConfig) -> Result<ExperimentReport> {
    if config.mc_replications == 0 {
        return Err(Error::Config("mc_replications must be at least 1".into()));
    }
    config.dgp.validate()?;
    let summaries: Vec<Option<OosSummary>> = (0..config.mc_replications)
        .into_par_iter()
        .map(|rep| {
            let seeds = replicate_seeds(config.seed, 0, rep);
            let sample =
                replicate_sample(&config.dgp, config.contamination.as_ref(), seeds).ok()?;
            let forecasts = match config.score_against {
                ScoreTarget::Observed => walk_forward(&sample, &config.oos),
                ScoreTarget::Uncontaminated => {
                    let clean = replicate_sample(&config.dgp, None, seeds).ok()?;
                    walk_forward_scored(&sample, clean.y(), &config.oos)
                }
            };
            forecasts.ok().map(|f| f.summary())
        })
        .collect();
    let key = format!(
        "n={};beta={:?};rho={:?};eta={};scored={:?}",
        config.dgp.n,
        config.dgp.beta,
        config.dgp.rho,
        config.contamination.map_or(0.0, |c| c.eta),
        config.score_against
    );
    let mut rows = Vec::new();
    let metrics: [(&str, SummaryMetric); 3] = [
        ("r2_robust_vs_ols", |s| s.robust_vs_ols),
        ("r2_ols_vs_mean", |s| s.ols_vs_mean),
        ("r2_robust_vs_mean", |s| s.robust_vs_mean),
    ];
    for (name, get) in metrics {
        let values: Vec<f64> = summaries.iter().flatten().filter_map(get).collect();
        let (mean, se) = if values.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (crate::stats::mean(&values), mean_se(&values))
        };
        rows.push(ReportRow::new(
            &key,
            "walk_forward",
            format!("mean_{name}"),
            mean,
            se,
            values.len(),
        ));
    }
    ExperimentReport::new("oos_study", config, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r2_examples() {
        let y = [1.0, 2.0];
        assert_eq!(oos_r2(&y, &[0.0, 2.0], &[1.0, 0.0]).unwrap(), 0.75);
        assert_eq!(oos_r2(&y, &y, &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(oos_r2(&y, &[5.0, 5.0], &[5.0, 5.0]).unwrap(), 0.0);
        assert!(matches!(
            oos_r2(&y, &[0.0, 0.0], &y),
            Err(Error::Undefined(_))
        ));
        assert!(oos_r2(&y, &[0.0], &y).is_err());
        assert!(oos_r2(&[], &[], &[]).is_err());
    }

    #[test]
    fn constant_series() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64).cos()).collect();
        let s = TimeSeriesSample::univariate(vec![2.0; 40], x).unwrap();
        let f = walk_forward(
            &s,
            &OosConfig {
                window: 20,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(f.ols.iter().chain(&f.robust).all(|&v| v == 2.0));
        let summary = f.summary();
        assert_eq!(summary.robust_vs_ols, Some(0.0));
        assert_eq!(summary.ols_vs_mean, None);
        assert!(matches!(
            oos_r2_vs_benchmark(&f.actuals, &f.ols, &f.historical_mean),
            Err(Error::Undefined(_))
        ));
        assert_eq!(f.periods.len(), 20);
    }

    #[test]
    fn horizon_shifts_the_first_forecast() {
        let s = crate::model::simulate_dgp(&DgpConfig::univariate(50, 0.1, 0.5, 0.0).with_seed(1))
            .unwrap();
        let cfg = OosConfig {
            window: 30,
            horizon: 3,
            scheme: WindowScheme::Rolling,
            ..Default::default()
        };
        let f = walk_forward(&s, &cfg).unwrap();
        assert_eq!(f.periods.first(), Some(&32));
        assert_eq!(f.periods.len(), 18);
        assert!(walk_forward(
            &s,
            &OosConfig {
                window: 50,
                ..Default::default()
            }
        )
        .is_err());
    }
}
