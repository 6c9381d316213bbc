//! Block construction, conventional and fast robust resampling distributions,
//! quantiles, symmetric confidence intervals and the no-predictability test.
//!
//! Conventional replicates re-estimate by OLS and record the studentized
//! deviation `(beta* - beta_hat) / se*`. Fast robust replicates never
//! re-optimize: with `theta_R` the full-sample Huber estimate, a replicate
//! `z*` of size `k` contributes
//!
//! ```text
//! delta* = -[grad psi_k(z*, theta_R)]^-1 psi_k(z*, theta_R)
//! draw   = sqrt(k) * delta*_j / sqrt(Sigma*_jj)
//! ```
//!
//! where `Sigma*` is the replicate sandwich matrix. Replicates whose gradient
//! or sandwich is singular become `+inf` draws instead of being dropped, so
//! breakdown of a quantile stays visible.

use nalgebra::DVector;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    huber_fit, ols_fit, score_summary, RobustFit, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::linalg::{checked_inverse, inverse_sqrt_sym, sandwich};
use crate::model::{SampleView, TimeSeriesSample};
use crate::rng::{substream, Rng};
use crate::stats::{order_index, sort_extended};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Subsampling,
    BlockBootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, Hash)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    #[default]
    Overlapping,
    Nonoverlapping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Conventional,
    FastRobust,
}

/// Where the replicate sandwich matrix `Sigma*` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, Hash)]
#[serde(rename_all = "snake_case")]
pub enum ReplicateSandwich {
    /// At the one-step update `theta_R + delta*` (still no re-optimization).
    #[default]
    OneStep,
    /// At the full-sample estimate `theta_R`.
    FullSampleEstimate,
}

/// How a replicate deviation is standardized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Studentization {
    /// `delta*_j / sqrt(Sigma*_jj)`, the same scale as the full-sample t-statistic.
    #[default]
    Diagonal,
    /// Component `j` of `[Sigma*]^{-1/2} delta*`.
    MatrixRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResamplingConfig {
    pub scheme: Scheme,
    pub block_mode: BlockMode,
    /// Block size.
    pub m: usize,
    /// Bootstrap draws; ignored by subsampling, which enumerates every block.
    pub replications: usize,
    pub mode: Mode,
    /// Huber constant (fast robust only).
    pub tuning_c: f64,
    pub seed: u64,
    pub sandwich: ReplicateSandwich,
    pub studentization: Studentization,
}

impl Default for ResamplingConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Subsampling,
            block_mode: BlockMode::Overlapping,
            m: 30,
            replications: 299,
            mode: Mode::FastRobust,
            tuning_c: f64::INFINITY,
            seed: 0,
            sandwich: ReplicateSandwich::OneStep,
            studentization: Studentization::Diagonal,
        }
    }
}

impl ResamplingConfig {
    pub fn subsampling(m: usize, mode: Mode, tuning_c: f64) -> Self {
        Self {
            scheme: Scheme::Subsampling,
            m,
            mode,
            tuning_c,
            ..Self::default()
        }
    }

    pub fn bootstrap(m: usize, replications: usize, mode: Mode, tuning_c: f64, seed: u64) -> Self {
        Self {
            scheme: Scheme::BlockBootstrap,
            m,
            replications,
            mode,
            tuning_c,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.m == 0 || self.m > n {
            return Err(Error::InvalidBlockSize { m: self.m, n });
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.mode == Mode::FastRobust && !(self.tuning_c > 0.0) {
            return Err(Error::Config(
                "fast robust resampling needs tuning_c > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Contiguous block of observations `start..start + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub len: usize,
    /// Trailing nonoverlapping block shorter than `m`.
    pub short: bool,
}

/// Overlapping blocks `(i, ..., i + m - 1)` for `i = 0..n - m`, or the
/// `ceil(n / m)` consecutive nonoverlapping blocks.
pub fn blocks(n: usize, m: usize, mode: BlockMode) -> Result<Vec<Block>> {
    if m == 0 || m > n {
        return Err(Error::InvalidBlockSize { m, n });
    }
    Ok(match mode {
        BlockMode::Overlapping => (0..=n - m)
            .map(|start| Block {
                start,
                len: m,
                short: false,
            })
            .collect(),
        BlockMode::Nonoverlapping => (0..n.div_ceil(m))
            .map(|i| {
                let start = i * m;
                let len = m.min(n - start);
                Block {
                    start,
                    len,
                    short: len < m,
                }
            })
            .collect(),
    })
}

pub fn sample_blocks(sample: &TimeSeriesSample, m: usize, mode: BlockMode) -> Result<Vec<Block>> {
    blocks(sample.n(), m, mode)
}

/// Full-length blocks eligible for resampling.
fn full_blocks(n: usize, m: usize, mode: BlockMode) -> Result<Vec<Block>> {
    Ok(blocks(n, m, mode)?
        .into_iter()
        .filter(|b| !b.short)
        .collect())
}

/// Observation indices of one block-bootstrap sample: `ceil(n / m)` blocks drawn
/// uniformly with replacement, concatenated, truncated to `n`.
pub fn bootstrap_indices(n: usize, m: usize, mode: BlockMode, rng: &mut Rng) -> Result<Vec<usize>> {
    let pool = full_blocks(n, m, mode)?;
    let draws = n.div_ceil(m);
    let mut idx = Vec::with_capacity(draws * m);
    for _ in 0..draws {
        let b = pool[rng.random_range(0..pool.len())];
        idx.extend(b.start..b.start + b.len);
    }
    idx.truncate(n);
    Ok(idx)
}

fn gather(sample: &TimeSeriesSample, idx: &[usize]) -> TimeSeriesSample {
    let k = sample.k();
    let y = idx.iter().map(|&t| sample.y()[t]).collect();
    let x = idx
        .iter()
        .flat_map(|&t| sample.x_row(t).iter().copied())
        .collect();
    TimeSeriesSample::from_parts_unchecked(y, x, k)
}

/// One overlapping block-bootstrap sample of the same length as `sample`.
pub fn bootstrap_resample(
    sample: &TimeSeriesSample,
    m: usize,
    seed: u64,
) -> Result<TimeSeriesSample> {
    let mut rng = substream(seed, 0);
    let idx = bootstrap_indices(sample.n(), m, BlockMode::Overlapping, &mut rng)?;
    Ok(gather(sample, &idx))
}

/// Sorted replicate draws; `+inf` marks a degenerate replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplingDistribution {
    draws: Vec<f64>,
    n_effective: usize,
    scale_k: usize,
}

impl ResamplingDistribution {
    pub fn new(mut draws: Vec<f64>, scale_k: usize) -> Self {
        sort_extended(&mut draws);
        let n_effective = draws.iter().filter(|d| d.is_finite()).count();
        Self {
            draws,
            n_effective,
            scale_k,
        }
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn n_effective(&self) -> usize {
        self.n_effective
    }

    pub fn n_degenerate(&self) -> usize {
        self.draws.len() - self.n_effective
    }

    pub fn scale_k(&self) -> usize {
        self.scale_k
    }

    /// Distribution of `|draw|`.
    pub fn absolute(&self) -> Self {
        Self::new(self.draws.iter().map(|d| d.abs()).collect(), self.scale_k)
    }

    /// Distribution of `-draw`.
    pub fn negated(&self) -> Self {
        Self::new(self.draws.iter().map(|d| -d).collect(), self.scale_k)
    }

    /// Empirical CDF just below `x`, `P*(draw < x)`.
    pub fn mass_below(&self, x: f64) -> f64 {
        self.draws.partition_point(|d| *d < x) as f64 / self.draws.len() as f64
    }
}

/// `inf { x : P*(draw <= x) >= t }`, with `inf(empty) = +inf`.
pub fn quantile(dist: &ResamplingDistribution, t: f64) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::InvalidInput("empty resampling distribution".into()));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidInput(format!(
            "quantile level {t} outside (0, 1)"
        )));
    }
    Ok(dist.draws[order_index(dist.len(), t) - 1])
}

/// Relative size below which a difference or standard error is rounding noise.
const NOISE: f64 = 1e-10;

/// `diff / se`, where a standard error at rounding level counts as zero.
fn studentized_difference(diff: f64, se: f64, scale: f64) -> f64 {
    let floor = NOISE * (1.0 + scale.abs());
    if se > floor {
        diff / se
    } else if diff.abs() <= floor {
        0.0
    } else {
        f64::INFINITY
    }
}

fn conventional_draw(view: &SampleView<'_>, center: f64, coefficient: usize) -> f64 {
    match ols_fit(view) {
        Ok(fit) => studentized_difference(
            fit.theta.coefficient(coefficient) - center,
            fit.std_errors[coefficient],
            center,
        ),
        Err(_) => f64::INFINITY,
    }
}

/// Fast robust draw for one replicate at the full-sample estimate `theta`.
/// Zero when the replicate's estimating equation already holds to
/// `DEFAULT_TOL`; infinite when its gradient is singular.
pub fn fast_robust_draw(
    view: &SampleView<'_>,
    theta: &[f64],
    c: f64,
    coefficient: usize,
    sandwich_mode: ReplicateSandwich,
    studentization: Studentization,
) -> f64 {
    let summary = score_summary(view, theta, c);
    // the block's estimating equation is already solved to fit precision
    if summary.psi.norm() <= DEFAULT_TOL {
        return 0.0;
    }
    let Some(grad_inv) = checked_inverse(&summary.gradient) else {
        return f64::INFINITY;
    };
    let delta: DVector<f64> = -(&grad_inv * &summary.psi);
    if delta.iter().all(|d| *d == 0.0) {
        return 0.0;
    }
    let outer = match sandwich_mode {
        ReplicateSandwich::FullSampleEstimate => summary.outer,
        ReplicateSandwich::OneStep => {
            let stepped: Vec<f64> = theta.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            score_summary(view, &stepped, c).outer
        }
    };
    let sigma = sandwich(&grad_inv, &outer);
    let Some(root) = inverse_sqrt_sym(&sigma) else {
        return f64::INFINITY;
    };
    let scale = (view.len() as f64).sqrt();
    let value = match studentization {
        Studentization::Diagonal => {
            scale * delta[coefficient] / sigma[(coefficient, coefficient)].sqrt()
        }
        Studentization::MatrixRoot => scale * (root * &delta)[coefficient],
    };
    if value.is_finite() {
        value
    } else {
        f64::INFINITY
    }
}

fn replicate_draws<F>(
    sample: &TimeSeriesSample,
    config: &ResamplingConfig,
    draw: F,
) -> Result<ResamplingDistribution>
where
    F: Fn(&SampleView<'_>) -> f64 + Sync,
{
    config.validate(sample.n())?;
    match config.scheme {
        Scheme::Subsampling => {
            let pool = full_blocks(sample.n(), config.m, config.block_mode)?;
            let draws = pool
                .par_iter()
                .map(|b| draw(&sample.slice(b.start, b.len)))
                .collect();
            Ok(ResamplingDistribution::new(draws, config.m))
        }
        Scheme::BlockBootstrap => {
            let draws = (0..config.replications as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = substream(config.seed, i);
                    match bootstrap_indices(sample.n(), config.m, config.block_mode, &mut rng) {
                        Ok(idx) => draw(&gather(sample, &idx).view()),
                        Err(_) => f64::INFINITY,
                    }
                })
                .collect();
            Ok(ResamplingDistribution::new(draws, sample.n()))
        }
    }
}

/// OLS replicates centered at the full-sample OLS estimate.
pub fn conventional_distribution_for(
    sample: &TimeSeriesSample,
    config: &ResamplingConfig,
    full: &RobustFit,
    coefficient: usize,
) -> Result<ResamplingDistribution> {
    let center = full.theta.coefficient(coefficient);
    replicate_draws(sample, config, |v| {
        conventional_draw(v, center, coefficient)
    })
}

pub fn conventional_distribution(
    sample: &TimeSeriesSample,
    config: &ResamplingConfig,
    coefficient: usize,
) -> Result<ResamplingDistribution> {
    let full = ols_fit(&sample.view())?;
    conventional_distribution_for(sample, config, &full, coefficient)
}

/// Fast robust replicates around a given full-sample Huber fit.
pub fn fast_robust_distribution_for(
    sample: &TimeSeriesSample,
    config: &ResamplingConfig,
    full: &RobustFit,
    coefficient: usize,
) -> Result<ResamplingDistribution> {
    let theta: Vec<f64> = full.theta.to_vector().iter().copied().collect();
    let c = config.tuning_c;
    replicate_draws(sample, config, |v| {
        fast_robust_draw(
            v,
            &theta,
            c,
            coefficient,
            config.sandwich,
            config.studentization,
        )
    })
}

pub fn fast_robust_distribution(
    sample: &TimeSeriesSample,
    config: &ResamplingConfig,
    coefficient: usize,
) -> Result<ResamplingDistribution> {
    config.validate(sample.n())?;
    let full = huber_fit(
        &sample.view(),
        config.tuning_c,
        DEFAULT_TOL,
        DEFAULT_MAX_ITER,
    )?;
    fast_robust_distribution_for(sample, config, &full, coefficient)
}

/// Full-sample fit together with the resampling distribution of one coefficient.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub fit: RobustFit,
    pub distribution: ResamplingDistribution,
    pub coefficient: usize,
    pub mode: Mode,
}

pub fn analyze(
    sample: &TimeSeriesSample,
    config: &ResamplingConfig,
    coefficient: usize,
) -> Result<Analysis> {
    config.validate(sample.n())?;
    if coefficient > sample.k() {
        return Err(Error::InvalidInput(format!(
            "coefficient index {coefficient} exceeds {} predictors",
            sample.k()
        )));
    }
    let (fit, distribution) = match config.mode {
        Mode::Conventional => {
            let fit = ols_fit(&sample.view())?;
            let dist = conventional_distribution_for(sample, config, &fit, coefficient)?;
            (fit, dist)
        }
        Mode::FastRobust => {
            let fit = huber_fit(
                &sample.view(),
                config.tuning_c,
                DEFAULT_TOL,
                DEFAULT_MAX_ITER,
            )?;
            let dist = fast_robust_distribution_for(sample, config, &fit, coefficient)?;
            (fit, dist)
        }
    };
    Ok(Analysis {
        fit,
        distribution,
        coefficient,
        mode: config.mode,
    })
}

/// Interval symmetric about the point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricInterval {
    pub center: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
    /// `t`-quantile of the `|T|` draws.
    pub critical_value: f64,
    pub std_error: f64,
    /// The critical value is infinite; the interval is the whole line.
    pub broken_down: bool,
}

impl SymmetricInterval {
    pub fn from_parts(center: f64, critical_value: f64, std_error: f64) -> Self {
        if critical_value.is_infinite() {
            return Self {
                center,
                half_width: f64::INFINITY,
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                critical_value,
                std_error,
                broken_down: true,
            };
        }
        let half_width = critical_value * std_error;
        Self {
            center,
            half_width,
            lower: center - half_width,
            upper: center + half_width,
            critical_value,
            std_error,
            broken_down: false,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        (value - self.center).abs() <= self.half_width
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }
}

/// Equal-tailed or one-sided intervals; diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `|theta_j| / se_j`.
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub ci: SymmetricInterval,
    pub reject: bool,
    pub coefficient_index: usize,
    /// Confidence level of `ci`; the test has size `1 - confidence`.
    pub confidence: f64,
}

/// Resolution of the bisection p-value.
pub const P_VALUE_RESOLUTION: f64 = 1e-4;

impl Analysis {
    pub fn estimate(&self) -> f64 {
        self.fit.theta.coefficient(self.coefficient)
    }

    pub fn std_error(&self) -> f64 {
        self.fit.std_errors[self.coefficient]
    }

    /// `|theta_j - value| / se_j`.
    pub fn statistic_at(&self, value: f64) -> f64 {
        studentized_difference(
            (self.estimate() - value).abs(),
            self.std_error(),
            self.estimate(),
        )
    }

    pub fn symmetric_ci(&self, confidence: f64) -> Result<SymmetricInterval> {
        let q = quantile(&self.distribution.absolute(), confidence)?;
        Ok(SymmetricInterval::from_parts(
            self.estimate(),
            q,
            self.std_error(),
        ))
    }

    /// `[theta - q_{1-a/2} se, theta - q_{a/2} se]` from the signed draws.
    pub fn equal_tailed_ci(&self, confidence: f64) -> Result<Interval> {
        let alpha = 1.0 - confidence;
        let hi = quantile(&self.distribution, 1.0 - alpha / 2.0)?;
        let lo = quantile(&self.distribution, alpha / 2.0)?;
        let (est, se) = (self.estimate(), self.std_error());
        Ok(Interval {
            lower: est - hi * se,
            upper: est - lo * se,
        })
    }

    /// One-sided `[theta - q_t se, +inf)`.
    pub fn lower_ci(&self, confidence: f64) -> Result<Interval> {
        let q = quantile(&self.distribution, confidence)?;
        Ok(Interval {
            lower: self.estimate() - q * self.std_error(),
            upper: f64::INFINITY,
        })
    }

    fn rejects(&self, stat: f64, abs: &ResamplingDistribution, alpha: f64) -> bool {
        let t = 1.0 - alpha;
        let q = if t >= 1.0 {
            *abs.draws().last().expect("nonempty")
        } else if t <= 0.0 {
            f64::NEG_INFINITY
        } else {
            abs.draws()[order_index(abs.len(), t) - 1]
        };
        stat > q
    }

    /// Smallest significance level at which `value` falls outside the
    /// symmetric interval, by bisection on the level.
    pub fn p_value_at(&self, value: f64) -> f64 {
        let abs = self.distribution.absolute();
        let stat = self.statistic_at(value);
        if self.rejects(stat, &abs, 0.0) {
            return 0.0;
        }
        if !self.rejects(stat, &abs, 1.0 - 1e-12) {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > P_VALUE_RESOLUTION / 4.0 {
            let mid = 0.5 * (lo + hi);
            if self.rejects(stat, &abs, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Tests `H0: theta_j = 0` with the symmetric interval at `confidence`.
    pub fn test(&self, confidence: f64) -> Result<TestResult> {
        let ci = self.symmetric_ci(confidence)?;
        let statistic = self.statistic_at(0.0);
        let reject = statistic > ci.critical_value;
        Ok(TestResult {
            statistic,
            critical_value: ci.critical_value,
            p_value: self.p_value_at(0.0),
            ci,
            reject,
            coefficient_index: self.coefficient,
            confidence,
        })
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "confidence level {level} outside (0, 1)"
        )))
    }
}

pub fn symmetric_ci(
    sample: &TimeSeriesSample,
    config: &ResamplingConfig,
    level: f64,
    coefficient: usize,
) -> Result<SymmetricInterval> {
    check_level(level)?;
    analyze(sample, config, coefficient)?.symmetric_ci(level)
}

pub fn test_no_predictability(
    sample: &TimeSeriesSample,
    config: &ResamplingConfig,
    level: f64,
    coefficient: usize,
) -> Result<TestResult> {
    check_level(level)?;
    analyze(sample, config, coefficient)?.test(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::choose_c;
    use crate::model::{simulate_dgp, DgpConfig};

    fn sim(n: usize, seed: u64) -> TimeSeriesSample {
        simulate_dgp(&DgpConfig::univariate(n, 0.0, 0.9, -1.0).with_seed(seed)).unwrap()
    }

    #[test]
    fn overlapping_and_nonoverlapping_blocks() {
        let b = blocks(5, 2, BlockMode::Overlapping).unwrap();
        let starts: Vec<usize> = b.iter().map(|b| b.start).collect();
        assert_eq!(starts, vec![0, 1, 2, 3]);
        assert!(b.iter().all(|b| b.len == 2));
        assert_eq!(blocks(5, 5, BlockMode::Overlapping).unwrap().len(), 1);
        assert_eq!(blocks(5, 1, BlockMode::Overlapping).unwrap().len(), 5);
        let nb = blocks(5, 2, BlockMode::Nonoverlapping).unwrap();
        assert_eq!(nb.len(), 3);
        assert!(nb[2].short && nb[2].len == 1);
        assert!(matches!(
            blocks(5, 6, BlockMode::Overlapping),
            Err(Error::InvalidBlockSize { .. })
        ));
        assert!(blocks(5, 0, BlockMode::Overlapping).is_err());
    }

    #[test]
    fn bootstrap_lengths() {
        let s = sim(6, 1);
        assert_eq!(bootstrap_resample(&s, 2, 9).unwrap().n(), 6);
        let s = sim(5, 1);
        let mut rng = substream(3, 0);
        let idx = bootstrap_indices(5, 2, BlockMode::Overlapping, &mut rng).unwrap();
        assert_eq!(idx.len(), 5);
        // blocks are kept contiguous
        assert_eq!(idx[1], idx[0] + 1);
        assert_eq!(idx[3], idx[2] + 1);
        assert_eq!(bootstrap_resample(&s, 2, 4).unwrap().n(), 5);
    }

    #[test]
    fn quantile_examples() {
        let d = ResamplingDistribution::new(vec![4.0, 1.0, 3.0, 2.0], 4);
        assert_eq!(quantile(&d, 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&d, 0.99).unwrap(), 4.0);
        assert!(quantile(&d, 1.0).is_err());
        let d =
            ResamplingDistribution::new(vec![f64::INFINITY, 0.0, f64::INFINITY, f64::INFINITY], 4);
        assert_eq!(quantile(&d, 0.5).unwrap(), f64::INFINITY);
        assert_eq!(quantile(&d, 0.25).unwrap(), 0.0);
        assert_eq!(d.n_effective(), 1);
        assert!(quantile(&ResamplingDistribution::new(vec![], 1), 0.5).is_err());
    }

    #[test]
    fn full_block_subsampling_is_degenerate_at_zero() {
        let s = sim(40, 2);
        let conv = conventional_distribution(
            &s,
            &ResamplingConfig::subsampling(40, Mode::Conventional, 1.0),
            1,
        )
        .unwrap();
        assert_eq!(conv.draws(), &[0.0]);
        let c = choose_c(&s.view(), 0.9).unwrap();
        let rob = fast_robust_distribution(
            &s,
            &ResamplingConfig::subsampling(40, Mode::FastRobust, c),
            1,
        )
        .unwrap();
        assert_eq!(rob.len(), 1);
        assert!(rob.draws()[0].abs() < 1e-6, "{:?}", rob.draws());
    }

    #[test]
    fn exact_line_draws_are_zero_and_test_rejects() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let y = x.iter().map(|v| 1.0 + 0.5 * v).collect();
        let s = TimeSeriesSample::univariate(y, x).unwrap();
        let cfg = ResamplingConfig::subsampling(10, Mode::Conventional, 1.0);
        let d = conventional_distribution(&s, &cfg, 1).unwrap();
        assert!(d.draws().iter().all(|&v| v == 0.0));
        for level in [0.5, 0.9, 0.99] {
            let r = test_no_predictability(&s, &cfg, level, 1).unwrap();
            assert!(r.reject);
            assert_eq!(r.p_value, 0.0);
        }
        let rob = ResamplingConfig::subsampling(10, Mode::FastRobust, 0.3);
        assert!(test_no_predictability(&s, &rob, 0.9, 1).unwrap().reject);
    }

    #[test]
    fn symmetric_interval_formula() {
        let ci = SymmetricInterval::from_parts(3.0, 2.0, 0.5);
        assert_eq!((ci.lower, ci.upper), (2.0, 4.0));
        let ci = SymmetricInterval::from_parts(3.0, 0.0, 0.5);
        assert_eq!((ci.lower, ci.upper), (3.0, 3.0));
        let ci = SymmetricInterval::from_parts(3.0, f64::INFINITY, 0.5);
        assert!(ci.broken_down && ci.contains(1e300));
    }

    #[test]
    fn zero_estimate_is_never_rejected() {
        let s = sim(60, 4);
        let mut a = analyze(
            &s,
            &ResamplingConfig::subsampling(15, Mode::Conventional, 1.0),
            1,
        )
        .unwrap();
        a.fit.theta.slopes[0] = 0.0;
        for level in [0.5, 0.9, 0.95] {
            assert!(!a.test(level).unwrap().reject);
        }
        assert_eq!(a.p_value_at(0.0), 1.0);
    }

    #[test]
    fn bisection_p_value_matches_tail_count() {
        for seed in 0..10 {
            let s = sim(80, seed);
            let a = analyze(
                &s,
                &ResamplingConfig::subsampling(20, Mode::Conventional, 1.0),
                1,
            )
            .unwrap();
            let stat = a.statistic_at(0.0);
            let abs = a.distribution.absolute();
            let tail = abs.draws().iter().filter(|&&d| d >= stat).count() as f64 / abs.len() as f64;
            let p = a.p_value_at(0.0);
            assert!(
                p >= tail - 1e-12 && p - tail <= P_VALUE_RESOLUTION,
                "p = {p}, tail = {tail}"
            );
        }
    }

    #[test]
    fn bootstrap_depends_on_seed_but_subsampling_does_not() {
        let s = sim(60, 5);
        let mut cfg = ResamplingConfig::subsampling(12, Mode::Conventional, 1.0);
        let a = conventional_distribution(&s, &cfg, 1).unwrap();
        cfg.seed = 99;
        assert_eq!(a, conventional_distribution(&s, &cfg, 1).unwrap());

        let b1 = ResamplingConfig::bootstrap(6, 50, Mode::Conventional, 1.0, 1);
        let b2 = ResamplingConfig::bootstrap(6, 50, Mode::Conventional, 1.0, 2);
        let d1 = conventional_distribution(&s, &b1, 1).unwrap();
        assert_eq!(d1, conventional_distribution(&s, &b1, 1).unwrap());
        assert_ne!(d1, conventional_distribution(&s, &b2, 1).unwrap());
        assert_eq!(d1.scale_k(), 60);
    }

    #[test]
    fn invalid_inputs() {
        let s = sim(30, 6);
        let cfg = ResamplingConfig::subsampling(31, Mode::Conventional, 1.0);
        assert!(matches!(
            analyze(&s, &cfg, 1),
            Err(Error::InvalidBlockSize { .. })
        ));
        let cfg = ResamplingConfig::subsampling(10, Mode::FastRobust, 0.0);
        assert!(analyze(&s, &cfg, 1).is_err());
        let cfg = ResamplingConfig::subsampling(10, Mode::Conventional, 1.0);
        assert!(symmetric_ci(&s, &cfg, 1.0, 1).is_err());
        assert!(analyze(&s, &cfg, 2).is_err());
    }

    #[test]
    fn singular_replicates_become_infinite() {
        // blocks of two observations cannot identify intercept plus slope
        // with a studentized OLS statistic whose residuals vanish
        let s = sim(20, 7);
        let cfg = ResamplingConfig::subsampling(1, Mode::Conventional, 1.0);
        let d = conventional_distribution(&s, &cfg, 1).unwrap();
        assert_eq!(d.n_degenerate(), 20);
    }
}
