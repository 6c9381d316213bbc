//! Finite-sample quantiles of the robust t-statistic as the predictor
//! approaches a unit root, `rho = 1 - c / n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{choose_c, huber_fit, DEFAULT_C_LEVEL, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::model::{simulate_dgp, DgpConfig};
use crate::stats::{order_index, sort_extended};

use super::power::replicate_seeds;
use super::report::{ExperimentReport, ReportRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantileSurfaceConfig {
    /// Local-to-unity parameters `c` in `rho = 1 - c / n`.
    pub local_to_unity: Vec<f64>,
    pub phi_grid: Vec<f64>,
    pub n: usize,
    pub mc_replications: usize,
    /// Quantile reported for each statistic.
    pub quantile: f64,
    /// Level handed to `choose_c` for the Huber constant of each sample.
    pub c_level: f64,
    pub seed: u64,
}

impl Default for QuantileSurfaceConfig {
    fn default() -> Self {
        Self {
            local_to_unity: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            phi_grid: vec![0.0, -1.0, -2.0, -5.0],
            n: 1000,
            mc_replications: 2000,
            quantile: 0.95,
            c_level: DEFAULT_C_LEVEL,
            seed: 0,
        }
    }
}

/// `t`-quantile of `values` and its standard error from the spread of the
/// order statistics one binomial standard deviation either side.
pub fn quantile_with_se(values: &mut [f64], t: f64) -> (f64, f64) {
    sort_extended(values);
    let n = values.len();
    let q = values[order_index(n, t) - 1];
    let spread = (t * (1.0 - t) / n as f64).sqrt();
    let lo = values[order_index(n, (t - spread).max(1e-12)) - 1];
    let hi = values[order_index(n, (t + spread).min(1.0)) - 1];
    (q, 0.5 * (hi - lo))
}

fn statistics(
    config: &QuantileSurfaceConfig,
    point: usize,
    rho: f64,
    phi: f64,
) -> (Vec<f64>, usize) {
    let draws: Vec<Option<f64>> = (0..config.mc_replications)
        .into_par_iter()
        .map(|rep| {
            let seeds = replicate_seeds(config.seed, point, rep);
            let dgp = DgpConfig::univariate(config.n, 0.0, rho, phi).with_seed(seeds.0);
            let sample = simulate_dgp(&dgp).ok()?;
            let c = choose_c(&sample.view(), config.c_level).ok()?;
            let fit = huber_fit(&sample.view(), c, DEFAULT_TOL, DEFAULT_MAX_ITER).ok()?;
            Some(fit.t_stats[1]).filter(|t| t.is_finite())
        })
        .collect();
    let failures = draws.iter().filter(|d| d.is_none()).count();
    (draws.into_iter().flatten().collect(), failures)
}

/// Quantiles of `T`, `-T` and `|T|` per `(c, phi)` cell under the null.
pub fn quantile_surface(config: &QuantileSurfaceConfig) -> Result<ExperimentReport> {
    if config.local_to_unity.is_empty() || config.phi_grid.is_empty() || config.mc_replications == 0
    {
        return Err(Error::Config(
            "grids and mc_replications must be nonempty".into(),
        ));
    }
    if !(config.quantile > 0.0 && config.quantile < 1.0) {
        return Err(Error::Config("quantile must lie in (0, 1)".into()));
    }
    if let Some(c) = config
        .local_to_unity
        .iter()
        .find(|&&c| !(0.0..=2.0 * config.n as f64).contains(&c))
    {
        return Err(Error::Config(format!(
            "local-to-unity parameter {c} gives rho outside (-1, 1]"
        )));
    }
    let mut rows = Vec::new();
    let mut point = 0;
    for &phi in &config.phi_grid {
        for &c in &config.local_to_unity {
            let rho = 1.0 - c / config.n as f64;
            let (t, failures) = statistics(config, point, rho, phi);
            point += 1;
            let key = format!("c={c};phi={phi};n={}", config.n);
            let used = t.len();
            if used == 0 {
                continue;
            }
            let variants: [(&str, Vec<f64>); 3] = [
                ("t", t.clone()),
                ("neg_t", t.iter().map(|v| -v).collect()),
                ("abs_t", t.iter().map(|v| v.abs()).collect()),
            ];
            for (name, mut values) in variants {
                let (q, se) = quantile_with_se(&mut values, config.quantile);
                rows.push(ReportRow::new(&key, name, "quantile", q, se, used));
            }
            rows.push(ReportRow::new(
                &key,
                "t",
                "failures",
                failures as f64,
                0.0,
                config.mc_replications,
            ));
        }
    }
    ExperimentReport::new("quantile_surface", config, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_statistic_quantile() {
        let mut v: Vec<f64> = (1..=100).map(f64::from).rev().collect();
        let (q, se) = quantile_with_se(&mut v, 0.95);
        assert_eq!(q, 95.0);
        assert!(se > 0.0 && se < 5.0);
    }

    #[test]
    fn single_cell_reproduces_a_direct_simulation() {
        let config = QuantileSurfaceConfig {
            local_to_unity: vec![5.0],
            phi_grid: vec![-1.0],
            n: 100,
            mc_replications: 30,
            seed: 9,
            ..Default::default()
        };
        let report = quantile_surface(&config).unwrap();
        let (mut t, _) = statistics(&config, 0, 1.0 - 5.0 / 100.0, -1.0);
        let (q, _) = quantile_with_se(&mut t, 0.95);
        assert_eq!(
            report.value("c=5;phi=-1;n=100", "t", "quantile").unwrap().0,
            q
        );
    }

    #[test]
    fn rejects_explosive_grids() {
        let config = QuantileSurfaceConfig {
            local_to_unity: vec![-1.0],
            ..Default::default()
        };
        assert!(quantile_surface(&config).is_err());
    }
}
