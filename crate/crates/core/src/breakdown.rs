//! Quantile breakdown points of block resampling distributions.
//!
//! Closed-form bounds for conventional subsampling and block bootstrap
//! quantiles of a statistic with breakdown point `b`, exact breakdown points of
//! the fast robust versions, and an exhaustive verifier that injects outliers
//! into a small synthetic sample and watches the quantile diverge.
//!
//! All binomial probabilities are exact sums evaluated in log space.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::estimators::{choose_c, huber_fit, DEFAULT_C_LEVEL, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::linalg::SINGULAR_RATIO;
use crate::model::{simulate_dgp, DgpConfig, TimeSeriesSample};
use crate::resampling::{Mode, Scheme};
use crate::stats::order_index;

/// Every breakdown point is reported on `1 <= p <= ceil(n / 2)`, i.e. at most one half.
pub const DOMAIN_CAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownQuery {
    pub n: usize,
    pub m: usize,
    /// Quantile level in `(0, 1)`.
    pub t: f64,
    /// Breakdown point of the statistic; unused by the robust formulas.
    pub b: f64,
}

impl BreakdownQuery {
    pub fn new(n: usize, m: usize, t: f64, b: f64) -> Self {
        Self { n, m, t, b }
    }

    /// Query for the robust formulas, where `b` is implicitly one half.
    pub fn robust(n: usize, m: usize, t: f64) -> Self {
        Self::new(n, m, t, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > self.n {
            return Err(Error::InvalidBlockSize {
                m: self.m,
                n: self.n,
            });
        }
        if !(self.t > 0.0 && self.t < 1.0) {
            return Err(Error::InvalidInput(format!(
                "quantile level {} outside (0, 1)",
                self.t
            )));
        }
        if !(self.b > 0.0 && self.b <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "statistic breakdown point {} outside (0, 0.5]",
                self.b
            )));
        }
        Ok(())
    }

    fn r(&self) -> usize {
        self.n.div_ceil(self.m)
    }
}

/// Contamination counts attaining the reported value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Feasible set empty.
    None,
    Count {
        p: usize,
    },
    Product {
        p1: usize,
        p2: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub lower: f64,
    /// Upper bound; equals `lower` and `exact` for the robust formulas.
    pub upper: f64,
    /// Exact value when the formula gives one.
    pub exact: Option<f64>,
    /// Value before the domain cap was applied.
    pub uncapped: f64,
    pub witness: Witness,
    /// Value was above one half (or the feasible set was empty) and was capped.
    pub capped: bool,
    /// `n / m` was not an integer; the robust formulas then use `floor(n / m)`.
    pub r_rounded: bool,
}

/// `ceil(x)` that ignores rounding noise just above an integer.
fn ceil_snap(x: f64) -> usize {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * (1.0 + x.abs()) {
        nearest.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

fn cap(value: f64) -> (f64, bool) {
    if value > DOMAIN_CAP {
        (DOMAIN_CAP, true)
    } else {
        (value, false)
    }
}

/// `P(BIN(trials, q) >= k)`, summed exactly in log space.
pub fn binomial_upper_tail(trials: usize, q: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > trials || q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    let (lq, lq1) = (q.ln(), (-q).ln_1p());
    let terms: Vec<f64> = (k..=trials)
        .map(|i| ln_binomial(trials as u64, i as u64) + i as f64 * lq + (trials - i) as f64 * lq1)
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (max.exp() * terms.iter().map(|l| (l - max).exp()).sum::<f64>()).min(1.0)
}

/// Bounds for the conventional overlapping subsampling quantile.
pub fn conventional_subsampling_bounds(q: &BreakdownQuery) -> Result<BreakdownReport> {
    q.validate()?;
    let (n, m, r) = (q.n, q.m, q.r());
    let mb = ceil_snap(m as f64 * q.b);
    let lower = mb as f64 / n as f64;
    let threshold = ((1.0 - q.t) * (n - m + 1) as f64 + mb as f64 - 1.0) / m as f64;
    let p = (1..r).find(|&p| p as f64 > threshold);
    Ok(upper_report(
        lower,
        p.map(|p| (p * mb, Witness::Count { p })),
        n,
    ))
}

/// Bounds for the conventional overlapping block bootstrap quantile.
pub fn conventional_bootstrap_bounds(q: &BreakdownQuery) -> Result<BreakdownReport> {
    q.validate()?;
    let (n, m, r) = (q.n, q.m, q.r());
    let lower = ceil_snap(m as f64 * q.b) as f64 / n as f64;
    let nb = n as f64 * q.b;
    let mut best: Option<(usize, Witness)> = None;
    for p1 in 1..=m {
        let needed = ceil_snap(nb / p1 as f64);
        for p2 in 1..r {
            let product = p1 * p2;
            if best.is_some_and(|(b, _)| product >= b) {
                continue;
            }
            let prob = (m * p2 + 1).saturating_sub(p1) as f64 / (n - m + 1) as f64;
            if binomial_upper_tail(r, prob, needed) > 1.0 - q.t {
                best = Some((product, Witness::Product { p1, p2 }));
            }
        }
    }
    Ok(upper_report(lower, best, n))
}

fn upper_report(lower: f64, best: Option<(usize, Witness)>, n: usize) -> BreakdownReport {
    match best {
        Some((count, witness)) => {
            let uncapped = count as f64 / n as f64;
            let (upper, capped) = cap(uncapped);
            BreakdownReport {
                lower: lower.min(upper),
                upper,
                exact: None,
                uncapped,
                witness,
                capped,
                r_rounded: false,
            }
        }
        None => BreakdownReport {
            lower: lower.min(DOMAIN_CAP),
            upper: DOMAIN_CAP,
            exact: None,
            uncapped: f64::INFINITY,
            witness: Witness::None,
            capped: true,
            r_rounded: false,
        },
    }
}

/// How the robust bootstrap count is turned into a fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapVariant {
    /// `(m + p*) / n`: the block itself counted toward the breakdown.
    BlockPlusExcess,
    /// `p* / n`: only the excess count; the tabulated reference values follow this form.
    #[default]
    ExcessOnly,
}

fn exact_report(count: Option<usize>, n: usize, r_rounded: bool) -> BreakdownReport {
    let (uncapped, witness) = match count {
        Some(c) => (c as f64 / n as f64, Witness::Count { p: c }),
        None => (f64::INFINITY, Witness::None),
    };
    let (value, capped) = cap(uncapped);
    BreakdownReport {
        lower: value,
        upper: value,
        exact: Some(value),
        uncapped,
        witness,
        capped,
        r_rounded,
    }
}

/// Smallest `p` in `0..=limit` satisfying `pred`. The count starts at zero: a
/// single fully contaminated block already supplies `m` outliers.
fn smallest_count(limit: usize, pred: impl Fn(usize) -> bool) -> Option<usize> {
    (0..=limit).find(|&p| pred(p))
}

/// Exact breakdown point of the fast robust subsampling quantile.
pub fn robust_subsampling_breakdown(q: &BreakdownQuery) -> Result<BreakdownReport> {
    q.validate()?;
    let (n, m) = (q.n, q.m);
    let blocks = n - m + 1;
    let threshold = (1.0 - q.t) * blocks as f64 - 1.0;
    let p = smallest_count(blocks, |p| p as f64 > threshold);
    let mut report = exact_report(p.map(|p| m + p), n, n % m != 0);
    if let Some(p) = p {
        report.witness = Witness::Count { p };
    }
    Ok(report)
}

/// Exact breakdown point of the fast robust block bootstrap quantile.
pub fn robust_bootstrap_breakdown(
    q: &BreakdownQuery,
    variant: BootstrapVariant,
) -> Result<BreakdownReport> {
    q.validate()?;
    let (n, m) = (q.n, q.m);
    let r = (n / m) as i32;
    let blocks = n - m + 1;
    let p = smallest_count(blocks, |p| {
        let prob = ((p + 1) as f64 / blocks as f64).min(1.0);
        // P(BIN(r, prob) = r) = prob^r
        (r as f64 * prob.ln()).exp() > 1.0 - q.t
    });
    let count = p.map(|p| match variant {
        BootstrapVariant::BlockPlusExcess => m + p,
        BootstrapVariant::ExcessOnly => p,
    });
    let mut report = exact_report(count, n, n % m != 0);
    if let Some(p) = p {
        report.witness = Witness::Count { p };
    }
    Ok(report)
}

/// One row of the conventional bound grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub b: f64,
    pub subsampling_lower: f64,
    pub subsampling_upper: f64,
    pub bootstrap_lower: f64,
    pub bootstrap_upper: f64,
}

pub fn conventional_bounds_grid(
    n: usize,
    b: f64,
    ms: &[usize],
    ts: &[f64],
) -> Result<Vec<BoundsRow>> {
    let mut rows = Vec::new();
    for &m in ms {
        for &t in ts {
            let q = BreakdownQuery::new(n, m, t, b);
            let s = conventional_subsampling_bounds(&q)?;
            let bb = conventional_bootstrap_bounds(&q)?;
            rows.push(BoundsRow {
                n,
                m,
                t,
                b,
                subsampling_lower: s.lower,
                subsampling_upper: s.upper,
                bootstrap_lower: bb.lower,
                bootstrap_upper: bb.upper,
            });
        }
    }
    Ok(rows)
}

/// One row of the robust breakdown grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustRow {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub subsampling: f64,
    pub bootstrap: f64,
    pub bootstrap_capped: bool,
    pub bootstrap_block_plus_excess: f64,
    pub bootstrap_block_plus_excess_capped: bool,
}

pub fn robust_breakdown_grid(n: usize, ms: &[usize], ts: &[f64]) -> Result<Vec<RobustRow>> {
    let mut rows = Vec::new();
    for &m in ms {
        for &t in ts {
            let q = BreakdownQuery::robust(n, m, t);
            let s = robust_subsampling_breakdown(&q)?;
            let tm = robust_bootstrap_breakdown(&q, BootstrapVariant::ExcessOnly)?;
            let lit = robust_bootstrap_breakdown(&q, BootstrapVariant::BlockPlusExcess)?;
            rows.push(RobustRow {
                n,
                m,
                t,
                subsampling: s.upper,
                bootstrap: tm.upper,
                bootstrap_capped: tm.capped,
                bootstrap_block_plus_excess: lit.upper,
                bootstrap_block_plus_excess_capped: lit.capped,
            });
        }
    }
    Ok(rows)
}

/// Magnitude of each injected response outlier.
pub const OUTLIER_MAGNITUDE: f64 = 1e8;
/// A quantile above this is treated as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;
/// Largest sample size accepted by the exhaustive verifier.
pub const EXHAUSTIVE_MAX_N: usize = 30;
/// Largest number of bootstrap block tuples the verifier will enumerate.
pub const EXHAUSTIVE_MAX_TUPLES: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBreakdown {
    /// Smallest `j / n` at which the quantile diverged, or `1` if it never did.
    pub fraction: f64,
    pub outliers: usize,
    /// Quantile of the `|replicate estimate|` draws at each `j = 0, 1, ...` examined.
    pub quantiles: Vec<f64>,
    /// Robustness constant used by the robust mode.
    pub tuning_c: f64,
}

/// Synthetic clean sample used by the verifier.
///
/// The predictor is serially independent with small spread, so no observation
/// has high leverage and the full-sample Huber fit keeps its maximal breakdown
/// point; the quantile, not the estimator, is what breaks.
pub fn verifier_sample(n: usize) -> Result<TimeSeriesSample> {
    let mut config = DgpConfig::univariate(n, 0.0, 0.0, 0.0).with_seed(0x5EED_B0D1);
    config.sigma_v = 0.2;
    simulate_dgp(&config)
}

/// Exhaustive breakdown of the `t`-quantile of the replicate slope estimates.
///
/// Outliers of magnitude `1e8` replace the first `j` responses of
/// [`verifier_sample`]. Conventional replicates are OLS slopes; fast robust
/// replicates are the one-step slopes `theta_R + delta*`, which are infinite when
/// the replicate gradient is singular. The robust constant is chosen once on
/// the clean sample. Bootstrap distributions are enumerated exactly over all
/// block tuples.
pub fn empirical_breakdown(
    sample_size: usize,
    m: usize,
    t: f64,
    scheme: Scheme,
    mode: Mode,
) -> Result<EmpiricalBreakdown> {
    if sample_size > EXHAUSTIVE_MAX_N {
        return Err(Error::InvalidInput(format!(
            "exhaustive verifier needs sample_size <= {EXHAUSTIVE_MAX_N}"
        )));
    }
    let clean = verifier_sample(sample_size)?;
    let c = choose_c(&clean.view(), DEFAULT_C_LEVEL)?;
    empirical_breakdown_on(&clean, m, t, scheme, mode, c)
}

/// [`empirical_breakdown`] on a caller-supplied univariate clean sample.
pub fn empirical_breakdown_on(
    clean: &TimeSeriesSample,
    m: usize,
    t: f64,
    scheme: Scheme,
    mode: Mode,
    c: f64,
) -> Result<EmpiricalBreakdown> {
    let n = clean.n();
    BreakdownQuery::new(n, m, t, 0.5).validate()?;
    if clean.k() != 1 {
        return Err(Error::InvalidInput(
            "the verifier expects a single predictor".into(),
        ));
    }
    if scheme == Scheme::BlockBootstrap {
        let tuples = ((n - m + 1) as u64).checked_pow(n.div_ceil(m) as u32);
        if tuples.is_none_or(|c| c > EXHAUSTIVE_MAX_TUPLES) {
            return Err(Error::InvalidInput(
                "too many bootstrap block tuples to enumerate".into(),
            ));
        }
    }
    let mut quantiles = Vec::new();
    for j in 0..=n {
        let mut y = clean.y().to_vec();
        y[..j].iter_mut().for_each(|v| *v = OUTLIER_MAGNITUDE);
        let sample = clean.with_responses(y)?;
        let moments = match mode {
            Mode::Conventional => Some(ObservationMoments::ols(&sample)),
            Mode::FastRobust => ObservationMoments::robust(&sample, c),
        };
        let q = match moments {
            Some(mo) => {
                let mut draws = match scheme {
                    Scheme::Subsampling => mo.subsampling(m),
                    Scheme::BlockBootstrap => mo.bootstrap(m),
                };
                draws.iter_mut().for_each(|d| *d = d.abs());
                draws.sort_by(f64::total_cmp);
                draws[order_index(draws.len(), t) - 1]
            }
            None => f64::INFINITY,
        };
        quantiles.push(q);
        if q > DIVERGENCE_THRESHOLD {
            return Ok(EmpiricalBreakdown {
                fraction: j as f64 / n as f64,
                outliers: j,
                quantiles,
                tuning_c: c,
            });
        }
    }
    Ok(EmpiricalBreakdown {
        fraction: 1.0,
        outliers: n,
        quantiles,
        tuning_c: c,
    })
}

/// Prefix sums of per-observation `A_t` and `b_t`; a replicate's slope is
/// `base + [(sum A)^{-1} sum b]_1`.
struct ObservationMoments {
    base: f64,
    a: Vec<Matrix2<f64>>,
    b: Vec<Vector2<f64>>,
}

impl ObservationMoments {
    fn from_terms(base: f64, terms: impl Iterator<Item = (Matrix2<f64>, Vector2<f64>)>) -> Self {
        let mut a = vec![Matrix2::zeros()];
        let mut b = vec![Vector2::zeros()];
        for (ai, bi) in terms {
            a.push(a.last().unwrap() + ai);
            b.push(b.last().unwrap() + bi);
        }
        Self { base, a, b }
    }

    fn ols(sample: &TimeSeriesSample) -> Self {
        Self::from_terms(
            0.0,
            (0..sample.n()).map(|t| {
                let w = Vector2::new(1.0, sample.x_row(t)[0]);
                (w * w.transpose(), w * sample.y()[t])
            }),
        )
    }

    /// `None` when the full-sample robust fit itself fails.
    fn robust(sample: &TimeSeriesSample, c: f64) -> Option<Self> {
        let fit = huber_fit(&sample.view(), c, DEFAULT_TOL, DEFAULT_MAX_ITER).ok()?;
        let theta = Vector2::new(fit.theta.intercept, fit.theta.slopes[0]);
        Some(Self::from_terms(
            theta[1],
            (0..sample.n()).map(|t| {
                let w = Vector2::new(1.0, sample.x_row(t)[0]);
                let g = w * (sample.y()[t] - w.dot(&theta));
                let norm = g.norm();
                if norm <= c {
                    (w * w.transpose(), g)
                } else {
                    (Matrix2::zeros(), g * (c / norm))
                }
            }),
        ))
    }

    fn range(&self, start: usize, len: usize) -> (Matrix2<f64>, Vector2<f64>) {
        (
            self.a[start + len] - self.a[start],
            self.b[start + len] - self.b[start],
        )
    }

    fn draw(&self, a: &Matrix2<f64>, b: &Vector2<f64>) -> f64 {
        let eig = a.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        if !(hi > 0.0) || lo < SINGULAR_RATIO * hi {
            return f64::INFINITY;
        }
        match a.try_inverse() {
            Some(inv) => {
                let v = self.base + (inv * b)[1];
                if v.is_finite() {
                    v
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        }
    }

    fn n(&self) -> usize {
        self.a.len() - 1
    }

    fn subsampling(&self, m: usize) -> Vec<f64> {
        (0..=self.n() - m)
            .map(|s| {
                let (a, b) = self.range(s, m);
                self.draw(&a, &b)
            })
            .collect()
    }

    /// All `(n - m + 1)^r` equally likely block tuples.
    fn bootstrap(&self, m: usize) -> Vec<f64> {
        let n = self.n();
        let nb = n - m + 1;
        let r = n.div_ceil(m);
        let last_len = n - (r - 1) * m;
        let total = (nb as u64).pow(r as u32);
        (0..total)
            .into_par_iter()
            .map(|mut code| {
                let mut a = Matrix2::zeros();
                let mut b = Vector2::zeros();
                for slot in 0..r {
                    let start = (code % nb as u64) as usize;
                    code /= nb as u64;
                    let len = if slot + 1 == r { last_len } else { m };
                    let (ai, bi) = self.range(start, len);
                    a += ai;
                    b += bi;
                }
                self.draw(&a, &b)
            })
            .collect()
    }
}
