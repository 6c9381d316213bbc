//! Rejection frequencies of the four tests over a grid of data-generating
//! processes, optionally with replacement-outlier contamination.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{select_block_size, CalibrationConfig};
use crate::error::{Error, Result};
use crate::estimators::{choose_c, DEFAULT_C_LEVEL};
use crate::model::{contaminate, simulate_dgp, ContaminationConfig, DgpConfig, TimeSeriesSample};
use crate::resampling::{analyze, Analysis, Mode, ResamplingConfig, Scheme};
use crate::rng::derive_seed;

use super::report::{binomial_se, ExperimentReport, ReportRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ConventionalSubsampling,
    ConventionalBootstrap,
    RobustSubsampling,
    RobustBootstrap,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::ConventionalSubsampling,
        Method::ConventionalBootstrap,
        Method::RobustSubsampling,
        Method::RobustBootstrap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ConventionalSubsampling => "conventional_subsampling",
            Self::ConventionalBootstrap => "conventional_bootstrap",
            Self::RobustSubsampling => "robust_subsampling",
            Self::RobustBootstrap => "robust_bootstrap",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Self::ConventionalSubsampling | Self::ConventionalBootstrap => Mode::Conventional,
            Self::RobustSubsampling | Self::RobustBootstrap => Mode::FastRobust,
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            Self::ConventionalSubsampling | Self::RobustSubsampling => Scheme::Subsampling,
            Self::ConventionalBootstrap | Self::RobustBootstrap => Scheme::BlockBootstrap,
        }
    }
}

/// How the block size is set for each simulated sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum BlockSizeRule {
    Fixed(usize),
    /// `round(fraction * n)`, at least 2.
    Proportional(f64),
    /// Minimum-volatility selection over the grid, per sample and method.
    Calibrated(Vec<usize>),
}

impl Default for BlockSizeRule {
    fn default() -> Self {
        Self::Proportional(1.0 / 6.0)
    }
}

impl BlockSizeRule {
    pub fn resolve(
        &self,
        sample: &TimeSeriesSample,
        mode: Mode,
        c: f64,
        confidence: f64,
    ) -> Result<usize> {
        let n = sample.n();
        match self {
            Self::Fixed(m) => Ok(*m),
            Self::Proportional(f) => Ok(((f * n as f64).round() as usize).clamp(2, n)),
            Self::Calibrated(grid) => {
                let cfg = CalibrationConfig {
                    m_grid: grid.clone(),
                    target_level: confidence,
                    block_mode: mode,
                    tuning_c: Some(c),
                    ..CalibrationConfig::default()
                };
                Ok(select_block_size(sample, &cfg)?.m)
            }
        }
    }
}

/// Settings shared by every test run inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSettings {
    pub block_size: BlockSizeRule,
    /// Bootstrap draws per test.
    pub bootstrap_replications: usize,
    /// Quantile level handed to `choose_c` for the robust constant.
    pub c_level: f64,
    /// Tested coefficient (1 is the first slope).
    pub coefficient: usize,
}

impl Default for TestSettings {
    fn default() -> Self {
        Self {
            block_size: BlockSizeRule::default(),
            bootstrap_replications: 299,
            c_level: DEFAULT_C_LEVEL,
            coefficient: 1,
        }
    }
}

/// Runs `method` on `sample` with the robust constant `c` and returns the
/// analysis with the block size used. `confidence` only steers a calibrated
/// block size.
pub fn run_method(
    sample: &TimeSeriesSample,
    method: Method,
    c: f64,
    settings: &TestSettings,
    seed: u64,
    confidence: f64,
) -> Result<(Analysis, usize)> {
    let c = if method.mode() == Mode::Conventional {
        f64::INFINITY
    } else {
        c
    };
    let m = settings
        .block_size
        .resolve(sample, method.mode(), c, confidence)?;
    let cfg = match method.scheme() {
        Scheme::Subsampling => ResamplingConfig::subsampling(m, method.mode(), c),
        Scheme::BlockBootstrap => {
            ResamplingConfig::bootstrap(m, settings.bootstrap_replications, method.mode(), c, seed)
        }
    };
    Ok((analyze(sample, &cfg, settings.coefficient)?, m))
}

/// Contamination applied to every simulated sample; the seed comes from the replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContaminationSpec {
    pub eta: f64,
    pub multiplier: f64,
}

impl Default for ContaminationSpec {
    fn default() -> Self {
        Self {
            eta: 0.04,
            multiplier: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerStudyConfig {
    pub dgp_grid: Vec<DgpConfig>,
    pub contamination: Option<ContaminationSpec>,
    pub methods: Vec<Method>,
    /// Nominal size of the tests.
    pub level: f64,
    pub mc_replications: usize,
    pub seed: u64,
    pub settings: TestSettings,
}

impl Default for PowerStudyConfig {
    fn default() -> Self {
        Self {
            dgp_grid: vec![DgpConfig::univariate(180, 0.0, 0.9, -1.0)],
            contamination: None,
            methods: vec![Method::ConventionalSubsampling, Method::RobustSubsampling],
            level: 0.1,
            mc_replications: 500,
            seed: 0,
            settings: TestSettings::default(),
        }
    }
}

impl PowerStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mc_replications == 0 {
            return Err(Error::Config("mc_replications must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config("level must lie in (0, 1)".into()));
        }
        if self.dgp_grid.is_empty() || self.methods.is_empty() {
            return Err(Error::Config(
                "dgp_grid and methods must be nonempty".into(),
            ));
        }
        for dgp in &self.dgp_grid {
            dgp.validate()?;
        }
        if let Some(c) = &self.contamination {
            ContaminationConfig {
                eta: c.eta,
                multiplier: c.multiplier,
                seed: 0,
            }
            .validate()?;
        }
        Ok(())
    }
}

/// Identifier of one grid point in report keys.
pub fn dgp_key(dgp: &DgpConfig, contamination: Option<&ContaminationSpec>) -> String {
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join("/")
    };
    format!(
        "n={};beta={};rho={};phi={};eta={}",
        dgp.n,
        fmt(&dgp.beta),
        fmt(&dgp.rho),
        dgp.phi,
        contamination.map_or(0.0, |c| c.eta)
    )
}

/// Seeds of replicate `rep` at grid point `point`: (sample, contamination, resampling).
pub fn replicate_seeds(seed: u64, point: usize, rep: usize) -> (u64, u64, u64) {
    let base = derive_seed(derive_seed(seed, point as u64), rep as u64);
    (
        derive_seed(base, 1),
        derive_seed(base, 2),
        derive_seed(base, 3),
    )
}

/// Simulated (and possibly contaminated) sample of one replicate.
pub fn replicate_sample(
    dgp: &DgpConfig,
    contamination: Option<&ContaminationSpec>,
    seeds: (u64, u64, u64),
) -> Result<TimeSeriesSample> {
    let sample = simulate_dgp(&dgp.clone().with_seed(seeds.0))?;
    match contamination {
        Some(c) => contaminate(
            &sample,
            &ContaminationConfig {
                eta: c.eta,
                multiplier: c.multiplier,
                seed: seeds.1,
            },
        ),
        None => Ok(sample),
    }
}

/// Per-replicate outcome: for each method, `Some(reject)` or `None` on failure.
type Outcome = Vec<Option<bool>>;

fn simulate_point(config: &PowerStudyConfig, point: usize) -> Vec<Outcome> {
    let dgp = &config.dgp_grid[point];
    let confidence = 1.0 - config.level;
    (0..config.mc_replications)
        .into_par_iter()
        .map(|rep| {
            let seeds = replicate_seeds(config.seed, point, rep);
            let Ok(sample) = replicate_sample(dgp, config.contamination.as_ref(), seeds) else {
                return vec![None; config.methods.len()];
            };
            let c = choose_c(&sample.view(), config.settings.c_level).ok();
            // common random numbers: every method sees the same sample
            config
                .methods
                .iter()
                .map(|&method| {
                    let c = match (method.mode(), c) {
                        (Mode::Conventional, _) => f64::INFINITY,
                        (Mode::FastRobust, Some(c)) => c,
                        (Mode::FastRobust, None) => return None,
                    };
                    run_method(&sample, method, c, &config.settings, seeds.2, confidence)
                        .and_then(|(a, _)| a.test(confidence))
                        .ok()
                        .map(|t| t.reject)
                })
                .collect()
        })
        .collect()
}

/// Rejection frequency per grid point and method, with binomial standard
/// errors. Failed replicates count as non-rejections and are tallied.
pub fn power_study(config: &PowerStudyConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut rows = Vec::new();
    for point in 0..config.dgp_grid.len() {
        let outcomes = simulate_point(config, point);
        let key = dgp_key(&config.dgp_grid[point], config.contamination.as_ref());
        let reps = config.mc_replications;
        for (j, method) in config.methods.iter().enumerate() {
            let rejections = outcomes.iter().filter(|o| o[j] == Some(true)).count();
            let failures = outcomes.iter().filter(|o| o[j].is_none()).count();
            let rate = rejections as f64 / reps as f64;
            let fail_rate = failures as f64 / reps as f64;
            rows.push(ReportRow::new(
                &key,
                method.name(),
                "rejection_rate",
                rate,
                binomial_se(rate, reps),
                reps,
            ));
            rows.push(ReportRow::new(
                &key,
                method.name(),
                "failure_rate",
                fail_rate,
                binomial_se(fail_rate, reps),
                reps,
            ));
        }
    }
    ExperimentReport::new("power_study", config, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_replication_matches_a_hand_run() {
        let config = PowerStudyConfig {
            dgp_grid: vec![DgpConfig::univariate(60, 0.1, 0.9, -1.0)],
            contamination: Some(ContaminationSpec::default()),
            mc_replications: 1,
            seed: 42,
            ..Default::default()
        };
        let report = power_study(&config).unwrap();
        let seeds = replicate_seeds(42, 0, 0);
        let sample =
            replicate_sample(&config.dgp_grid[0], config.contamination.as_ref(), seeds).unwrap();
        let c = choose_c(&sample.view(), DEFAULT_C_LEVEL).unwrap();
        for method in [Method::ConventionalSubsampling, Method::RobustSubsampling] {
            let (a, m) = run_method(&sample, method, c, &config.settings, seeds.2, 0.9).unwrap();
            assert_eq!(m, 10);
            let expected = a.test(0.9).unwrap().reject as u8 as f64;
            let key = dgp_key(&config.dgp_grid[0], config.contamination.as_ref());
            assert_eq!(
                report
                    .value(&key, method.name(), "rejection_rate")
                    .unwrap()
                    .0,
                expected
            );
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let config = PowerStudyConfig {
            dgp_grid: vec![DgpConfig::univariate(60, 0.0, 0.9, -1.0)],
            methods: Method::ALL.to_vec(),
            mc_replications: 4,
            seed: 3,
            settings: TestSettings {
                bootstrap_replications: 20,
                ..Default::default()
            },
            ..Default::default()
        };
        let a = power_study(&config).unwrap().to_json().unwrap();
        assert_eq!(a, power_study(&config).unwrap().to_json().unwrap());
        assert_eq!(ExperimentReport::from_json(&a).unwrap().rows.len(), 8);
    }

    #[test]
    fn invalid_config() {
        let bad = PowerStudyConfig {
            mc_replications: 0,
            ..Default::default()
        };
        assert!(power_study(&bad).is_err());
        let bad = PowerStudyConfig {
            level: 1.0,
            ..Default::default()
        };
        assert!(power_study(&bad).is_err());
    }

    #[test]
    fn block_size_rules() {
        let s = simulate_dgp(&DgpConfig::univariate(180, 0.0, 0.9, -1.0)).unwrap();
        assert_eq!(
            BlockSizeRule::Fixed(12)
                .resolve(&s, Mode::Conventional, 1.0, 0.9)
                .unwrap(),
            12
        );
        assert_eq!(
            BlockSizeRule::default()
                .resolve(&s, Mode::Conventional, 1.0, 0.9)
                .unwrap(),
            30
        );
        let grid = vec![10, 20, 30, 40];
        let m = BlockSizeRule::Calibrated(grid.clone())
            .resolve(&s, Mode::Conventional, f64::INFINITY, 0.9)
            .unwrap();
        assert!(grid.contains(&m));
    }
}
