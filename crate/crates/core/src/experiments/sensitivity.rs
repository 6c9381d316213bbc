//! Interval length as the largest response is pushed further out.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::choose_c;
use crate::model::{simulate_dgp, DgpConfig};

use super::power::{replicate_seeds, run_method, Method, TestSettings};
use super::report::{mean_se, ExperimentReport, ReportRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub dgp: DgpConfig,
    /// Shifts added to the largest response; ascending, starting at 0.
    pub outlier_offsets: Vec<f64>,
    pub methods: Vec<Method>,
    /// Nominal size; intervals have confidence `1 - level`.
    pub level: f64,
    pub mc_replications: usize,
    pub seed: u64,
    pub settings: TestSettings,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            dgp: DgpConfig::univariate(120, 0.0, 0.9, -1.0),
            outlier_offsets: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            methods: vec![Method::ConventionalSubsampling, Method::RobustSubsampling],
            level: 0.1,
            mc_replications: 200,
            seed: 0,
            settings: TestSettings::default(),
        }
    }
}

impl SensitivityConfig {
    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        let offsets = &self.outlier_offsets;
        if offsets.first() != Some(&0.0) || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config(
                "outlier_offsets must be ascending and start at 0".into(),
            ));
        }
        if self.mc_replications == 0 || self.methods.is_empty() {
            return Err(Error::Config(
                "need at least one replication and one method".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config("level must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Interval lengths of one replicate, per method and offset; `None` when any
/// offset failed or broke down, which drops the replicate for that method.
fn replicate_lengths(config: &SensitivityConfig, rep: usize) -> Vec<Option<Vec<f64>>> {
    let seeds = replicate_seeds(config.seed, 0, rep);
    let none = || vec![None; config.methods.len()];
    let Ok(sample) = simulate_dgp(&config.dgp.clone().with_seed(seeds.0)) else {
        return none();
    };
    // c is fixed on the unshifted sample so that only the data move
    let Ok(c) = choose_c(&sample.view(), config.settings.c_level) else {
        return none();
    };
    let (t_max, y_max) =
        sample
            .y()
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (t, y)| if y > acc.1 { (t, y) } else { acc },
            );
    let confidence = 1.0 - config.level;
    config
        .methods
        .iter()
        .map(|&method| {
            config
                .outlier_offsets
                .iter()
                .map(|&offset| {
                    let shifted = sample.with_response(t_max, y_max + offset);
                    let (analysis, _) =
                        run_method(&shifted, method, c, &config.settings, seeds.2, confidence)
                            .ok()?;
                    let ci = analysis.symmetric_ci(confidence).ok()?;
                    (!ci.broken_down && ci.length().is_finite()).then(|| ci.length())
                })
                .collect()
        })
        .collect()
}

/// Average interval length per offset and its percentage increase over offset 0.
pub fn sensitivity_study(config: &SensitivityConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let per_rep: Vec<_> = (0..config.mc_replications)
        .into_par_iter()
        .map(|rep| replicate_lengths(config, rep))
        .collect();
    let mut rows = Vec::new();
    let key = format!(
        "n={};rho={:?};beta={:?}",
        config.dgp.n, config.dgp.rho, config.dgp.beta
    );
    for (j, method) in config.methods.iter().enumerate() {
        let kept: Vec<&Vec<f64>> = per_rep.iter().filter_map(|r| r[j].as_ref()).collect();
        let used = kept.len();
        rows.push(ReportRow::new(
            &key,
            method.name(),
            "excluded_replications",
            (config.mc_replications - used) as f64,
            0.0,
            config.mc_replications,
        ));
        if used == 0 {
            continue;
        }
        let base: Vec<f64> = kept.iter().map(|l| l[0]).collect();
        let base_mean = crate::stats::mean(&base);
        for (o, offset) in config.outlier_offsets.iter().enumerate() {
            let lengths: Vec<f64> = kept.iter().map(|l| l[o]).collect();
            let mean = crate::stats::mean(&lengths);
            let ratio = mean / base_mean;
            // delta method for a ratio of paired means
            let linear: Vec<f64> = lengths
                .iter()
                .zip(&base)
                .map(|(a, b)| a - ratio * b)
                .collect();
            let ratio_se = mean_se(&linear) / base_mean;
            let offset_key = format!("{key};offset={offset}");
            rows.push(ReportRow::new(
                &offset_key,
                method.name(),
                "mean_ci_length",
                mean,
                mean_se(&lengths),
                used,
            ));
            rows.push(ReportRow::new(
                &offset_key,
                method.name(),
                "pct_increase",
                100.0 * (ratio - 1.0),
                100.0 * ratio_se,
                used,
            ));
        }
    }
    ExperimentReport::new("sensitivity_study", config, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_offset_is_the_baseline() {
        let config = SensitivityConfig {
            outlier_offsets: vec![0.0, 5.0],
            mc_replications: 3,
            ..Default::default()
        };
        let report = sensitivity_study(&config).unwrap();
        for method in &config.methods {
            let rows = report.find("", method.name(), "pct_increase");
            assert_eq!(rows[0].value, Some(0.0));
            assert_eq!(rows.len(), 2);
        }
    }

    #[test]
    fn offsets_must_start_at_zero() {
        let config = SensitivityConfig {
            outlier_offsets: vec![1.0, 2.0],
            ..Default::default()
        };
        assert!(sensitivity_study(&config).is_err());
    }
}
