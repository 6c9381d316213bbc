//! Data-driven choice of the block size `m` and the robustness constant `c`.
//!
//! The block size follows a minimum-volatility rule: symmetric interval
//! endpoints are computed for every candidate `m`, and the candidate whose
//! neighborhood of three adjacent grid points moves least is chosen. The
//! robustness constant is the largest candidate whose robust interval attains
//! the target coverage on pseudo-samples generated from the fitted model.

use log::warn;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{choose_c, huber_fit, DEFAULT_C_LEVEL, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::model::TimeSeriesSample;
use crate::resampling::{analyze, Mode, ResamplingConfig};
use crate::rng::{derive_seed, substream};
use crate::stats::std_dev;

/// Half-width of the coverage band accepted around the target level.
pub const COVERAGE_TOLERANCE: f64 = 0.03;
/// Default number of pseudo-samples per candidate `c`.
pub const DEFAULT_INNER_REPLICATIONS: usize = 200;
/// Width of the endpoint-volatility window, in grid points.
pub const VOLATILITY_WINDOW: usize = 3;

/// Candidate robustness constants, given directly or as quantile levels of the
/// OLS score norms (each level is turned into a constant by `choose_c`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum RobustnessGrid {
    Constants(Vec<f64>),
    QuantileLevels(Vec<f64>),
}

impl RobustnessGrid {
    fn values(&self) -> &[f64] {
        match self {
            Self::Constants(v) | Self::QuantileLevels(v) => v,
        }
    }

    /// Candidate constants for `sample`, ascending.
    pub fn resolve(&self, sample: &TimeSeriesSample) -> Result<Vec<f64>> {
        let mut out = match self {
            Self::Constants(v) => v.clone(),
            Self::QuantileLevels(levels) => levels
                .iter()
                .map(|&l| choose_c(&sample.view(), l))
                .collect::<Result<_>>()?,
        };
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

impl Default for RobustnessGrid {
    fn default() -> Self {
        Self::QuantileLevels(vec![0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub m_grid: Vec<usize>,
    pub c_grid: RobustnessGrid,
    /// Confidence level of the calibrated interval.
    pub target_level: f64,
    pub inner_replications: usize,
    pub seed: u64,
    /// Coefficient whose interval is calibrated (0 is the intercept).
    pub coefficient: usize,
    /// Resampling mode used when selecting `m`.
    pub block_mode: Mode,
    /// Robustness constant used when selecting `m` in robust mode; `None`
    /// uses `choose_c` at its default level.
    pub tuning_c: Option<f64>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            m_grid: vec![10, 15, 20, 25, 30, 35, 40],
            c_grid: RobustnessGrid::default(),
            target_level: 0.9,
            inner_replications: DEFAULT_INNER_REPLICATIONS,
            seed: 0,
            coefficient: 1,
            block_mode: Mode::FastRobust,
            tuning_c: None,
        }
    }
}

fn sorted_nonempty<T: PartialOrd>(values: &[T], name: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config(format!("{name} must be nonempty")));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config(format!("{name} must be sorted ascending")));
    }
    Ok(())
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        sorted_nonempty(&self.m_grid, "m_grid")?;
        sorted_nonempty(self.c_grid.values(), "c_grid")?;
        if !(self.target_level > 0.0 && self.target_level < 1.0) {
            return Err(Error::Config("target_level must lie in (0, 1)".into()));
        }
        if self.inner_replications == 0 {
            return Err(Error::Config(
                "inner_replications must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSizeChoice {
    pub m: usize,
    /// Grid shorter than the volatility window; the middle element was used.
    pub fallback: bool,
    /// `(lower, upper)` interval endpoints per grid point.
    pub endpoints: Vec<(f64, f64)>,
    /// Endpoint volatility of each full window, indexed by its center.
    pub volatility: Vec<(usize, f64)>,
}

/// Minimum-volatility block size.
pub fn select_block_size(
    sample: &TimeSeriesSample,
    config: &CalibrationConfig,
) -> Result<BlockSizeChoice> {
    config.validate()?;
    let n = sample.n();
    if let Some(&m) = config.m_grid.iter().find(|&&m| m < 2 || 2 * m > n) {
        return Err(Error::InvalidBlockSize { m, n });
    }
    let grid = &config.m_grid;
    if grid.len() < VOLATILITY_WINDOW {
        warn!(
            "block-size grid has fewer than {VOLATILITY_WINDOW} points; using its middle element"
        );
        return Ok(BlockSizeChoice {
            m: grid[(grid.len() - 1) / 2],
            fallback: true,
            endpoints: Vec::new(),
            volatility: Vec::new(),
        });
    }
    let c = match (config.block_mode, config.tuning_c) {
        (Mode::Conventional, _) => f64::INFINITY,
        (Mode::FastRobust, Some(c)) => c,
        (Mode::FastRobust, None) => choose_c(&sample.view(), DEFAULT_C_LEVEL)?,
    };
    let endpoints = grid
        .par_iter()
        .map(|&m| {
            let cfg = ResamplingConfig::subsampling(m, config.block_mode, c);
            let ci =
                analyze(sample, &cfg, config.coefficient)?.symmetric_ci(config.target_level)?;
            Ok((ci.lower, ci.upper))
        })
        .collect::<Result<Vec<_>>>()?;
    let half = VOLATILITY_WINDOW / 2;
    let volatility: Vec<(usize, f64)> = (half..grid.len() - half)
        .map(|center| {
            let window = &endpoints[center - half..=center + half];
            let lo: Vec<f64> = window.iter().map(|e| e.0).collect();
            let hi: Vec<f64> = window.iter().map(|e| e.1).collect();
            let v = std_dev(&lo) + std_dev(&hi);
            (center, if v.is_finite() { v } else { f64::INFINITY })
        })
        .collect();
    // strict comparison keeps the smallest m among ties
    let best = volatility
        .iter()
        .fold(None::<(usize, f64)>, |acc, &(i, v)| match acc {
            Some((_, bv)) if v >= bv => acc,
            _ => Some((i, v)),
        })
        .map_or(half, |(i, _)| i);
    Ok(BlockSizeChoice {
        m: grid[best],
        fallback: false,
        endpoints,
        volatility,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessChoice {
    pub c: f64,
    /// No candidate calibrated; `c` is the `choose_c` default.
    pub fallback: bool,
    /// `(c, estimated coverage)` per candidate; `NaN` when the fit at `c` failed.
    pub coverages: Vec<(f64, f64)>,
}

/// Fitted model at one candidate `c`: pseudo-samples are
/// `y*_t = w_t' theta_c + e*_t`, with `e*` drawn independently from the fitted
/// residuals with probability proportional to their Huber weights.
#[derive(Debug, Clone)]
pub struct PseudoPopulation {
    /// Coefficient the intervals should cover.
    pub truth: f64,
    fitted: Vec<f64>,
    residuals: Vec<f64>,
    cumulative_weight: Vec<f64>,
}

impl PseudoPopulation {
    pub fn new(sample: &TimeSeriesSample, c: f64, coefficient: usize) -> Result<Self> {
        let fit = huber_fit(&sample.view(), c, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let theta = &fit.theta;
        let fitted: Vec<f64> = (0..sample.n())
            .map(|t| {
                theta.intercept
                    + sample
                        .x_row(t)
                        .iter()
                        .zip(&theta.slopes)
                        .map(|(x, b)| x * b)
                        .sum::<f64>()
            })
            .collect();
        let residuals = sample.y().iter().zip(&fitted).map(|(y, f)| y - f).collect();
        let cumulative_weight = fit
            .weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            truth: theta.coefficient(coefficient),
            fitted,
            residuals,
            cumulative_weight,
        })
    }

    pub fn draw(&self, seed: u64, rep: u64) -> Vec<f64> {
        let mut rng = substream(seed, rep);
        let total = *self.cumulative_weight.last().expect("nonempty sample");
        let last = self.residuals.len() - 1;
        self.fitted
            .iter()
            .map(|f| {
                let u = rng.random::<f64>() * total;
                let idx = self
                    .cumulative_weight
                    .partition_point(|&w| w <= u)
                    .min(last);
                f + self.residuals[idx]
            })
            .collect()
    }
}

/// Coverage of the robust symmetric interval at constant `c` over
/// `inner_replications` pseudo-samples from the model fitted at `c`.
pub fn pseudo_sample_coverage(
    sample: &TimeSeriesSample,
    m: usize,
    c: f64,
    config: &CalibrationConfig,
) -> Result<f64> {
    let population = PseudoPopulation::new(sample, c, config.coefficient)?;
    let resampling = ResamplingConfig::subsampling(m, Mode::FastRobust, c);
    // the same seed for every candidate: paired comparisons across the grid
    let seed = derive_seed(config.seed, 0xCA1B);
    let covered = (0..config.inner_replications as u64)
        .into_par_iter()
        .map(|rep| {
            sample
                .with_responses(population.draw(seed, rep))
                .and_then(|s| analyze(&s, &resampling, config.coefficient))
                .and_then(|a| a.symmetric_ci(config.target_level))
                .is_ok_and(|ci| ci.contains(population.truth)) as usize
        })
        .sum::<usize>();
    Ok(covered as f64 / config.inner_replications as f64)
}

/// Largest candidate `c` whose pseudo-sample coverage lies within
/// `COVERAGE_TOLERANCE` of the target level.
pub fn select_robustness(
    sample: &TimeSeriesSample,
    m: usize,
    config: &CalibrationConfig,
) -> Result<RobustnessChoice> {
    config.validate()?;
    if m == 0 || m > sample.n() {
        return Err(Error::InvalidBlockSize { m, n: sample.n() });
    }
    let candidates = config.c_grid.resolve(sample)?;
    let coverages: Vec<(f64, f64)> = candidates
        .iter()
        .map(|&c| {
            (
                c,
                pseudo_sample_coverage(sample, m, c, config).unwrap_or(f64::NAN),
            )
        })
        .collect();
    let chosen = coverages
        .iter()
        .rev()
        .find(|(_, cov)| (cov - config.target_level).abs() <= COVERAGE_TOLERANCE + 1e-12);
    Ok(match chosen {
        Some(&(c, _)) => RobustnessChoice {
            c,
            fallback: false,
            coverages,
        },
        None => {
            warn!("no robustness constant calibrated; falling back to the default choice");
            RobustnessChoice {
                c: choose_c(&sample.view(), DEFAULT_C_LEVEL)?,
                fallback: true,
                coverages,
            }
        }
    })
}

/// Selected `(m, c)`: block size first, then the robustness constant at that `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub block: BlockSizeChoice,
    pub robustness: RobustnessChoice,
}

pub fn calibrate(sample: &TimeSeriesSample, config: &CalibrationConfig) -> Result<Calibration> {
    let block = select_block_size(sample, config)?;
    let robustness = select_robustness(sample, block.m, config)?;
    Ok(Calibration { block, robustness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate_dgp, DgpConfig};

    fn sim(n: usize, seed: u64) -> TimeSeriesSample {
        simulate_dgp(&DgpConfig::univariate(n, 0.0, 0.9, -1.0).with_seed(seed)).unwrap()
    }

    #[test]
    fn singleton_grid_falls_back() {
        let cfg = CalibrationConfig {
            m_grid: vec![12],
            ..Default::default()
        };
        let choice = select_block_size(&sim(60, 1), &cfg).unwrap();
        assert_eq!(choice.m, 12);
        assert!(choice.fallback);
    }

    #[test]
    fn exact_line_ties_go_to_the_smallest_center() {
        let x: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = x.iter().map(|v| 2.0 - v).collect();
        let s = TimeSeriesSample::univariate(y, x).unwrap();
        let cfg = CalibrationConfig {
            m_grid: vec![6, 8, 10, 12, 14],
            block_mode: Mode::Conventional,
            ..Default::default()
        };
        let choice = select_block_size(&s, &cfg).unwrap();
        assert_eq!(choice.m, 8);
        assert!(!choice.fallback);
    }

    #[test]
    fn selection_is_a_grid_element_and_deterministic() {
        let s = sim(120, 2);
        let cfg = CalibrationConfig {
            m_grid: vec![8, 12, 16, 20, 24],
            ..Default::default()
        };
        let a = select_block_size(&s, &cfg).unwrap();
        assert!(cfg.m_grid.contains(&a.m));
        assert_eq!(a, select_block_size(&s, &cfg).unwrap());
    }

    #[test]
    fn invalid_grids() {
        let s = sim(40, 3);
        let bad = |m_grid: Vec<usize>| CalibrationConfig {
            m_grid,
            ..Default::default()
        };
        assert!(select_block_size(&s, &bad(vec![])).is_err());
        assert!(select_block_size(&s, &bad(vec![10, 5, 12])).is_err());
        assert!(matches!(
            select_block_size(&s, &bad(vec![5, 10, 21])),
            Err(Error::InvalidBlockSize { .. })
        ));
        let cfg = CalibrationConfig {
            c_grid: RobustnessGrid::Constants(vec![]),
            ..Default::default()
        };
        assert!(select_robustness(&s, 10, &cfg).is_err());
    }

    #[test]
    fn single_huge_constant_calibrates_on_clean_data() {
        let s = sim(180, 0);
        let cfg = CalibrationConfig {
            c_grid: RobustnessGrid::Constants(vec![1e9]),
            ..Default::default()
        };
        let choice = select_robustness(&s, 30, &cfg).unwrap();
        assert!(!choice.fallback, "{:?}", choice.coverages);
        assert_eq!(choice.c, 1e9);
    }
}
