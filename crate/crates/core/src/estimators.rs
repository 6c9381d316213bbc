//! Least-squares and Huber estimation of the predictive regression.
//!
//! With `w_{t-1} = (1, x_{t-1}')'` the Huber estimator solves
//!
//! ```text
//! psi_n(theta) = (1/n) sum_t g(z_t, theta) h_c(z_t, theta) = 0
//! g(z_t, theta)   = (y_t - w'_{t-1} theta) w_{t-1}
//! h_c(z_t, theta) = min(1, c / |g(z_t, theta)|)
//! ```
//!
//! The bound applies to the whole score vector, so the effective residual
//! threshold for observation `t` is `c / |w_{t-1}|`. The equation is the
//! first-order condition of a convex piecewise-quadratic objective, which is
//! what makes iteratively reweighted least squares monotone here.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{checked_inverse, sandwich};
use crate::model::SampleView;
use crate::stats::quantile_sorted;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Quantile level of the OLS score norms used as the default tuning constant.
pub const DEFAULT_C_LEVEL: f64 = 0.9;
/// Returned by [`choose_c`] when every OLS score vanishes.
pub const C_FLOOR: f64 = 1e-8;

/// Regression coefficients `(alpha, beta')'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub intercept: f64,
    pub slopes: Vec<f64>,
}

impl Theta {
    pub fn new(intercept: f64, slopes: Vec<f64>) -> Self {
        Self { intercept, slopes }
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self {
            intercept: v[0],
            slopes: v.iter().skip(1).copied().collect(),
        }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.slopes.len() + 1,
            std::iter::once(self.intercept).chain(self.slopes.iter().copied()),
        )
    }

    /// Coefficient `j` of the stacked vector (0 is the intercept).
    pub fn coefficient(&self, j: usize) -> f64 {
        if j == 0 {
            self.intercept
        } else {
            self.slopes[j - 1]
        }
    }

    pub fn dim(&self) -> usize {
        self.slopes.len() + 1
    }
}

/// Result of an OLS or Huber fit. `covariance` is the asymptotic sandwich
/// matrix, so `std_errors[j] = sqrt(covariance[j, j] / n)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustFit {
    pub theta: Theta,
    pub weights: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub tuning_c: f64,
    pub n: usize,
}

impl RobustFit {
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let p = self.covariance.len();
        DMatrix::from_fn(p, p, |i, j| self.covariance[i][j])
    }

    /// Fraction of observations with weight strictly below one.
    pub fn downweighted_fraction(&self) -> f64 {
        self.weights.iter().filter(|&&w| w < 1.0).count() as f64 / self.weights.len() as f64
    }
}

#[inline]
fn residual(view: &SampleView<'_>, t: usize, theta: &[f64]) -> f64 {
    let x = view.x_row(t);
    view.y(t) - theta[0] - x.iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>()
}

#[inline]
fn design_norm(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

#[inline]
fn huber_weight(norm: f64, c: f64) -> f64 {
    if norm > c {
        c / norm
    } else {
        1.0
    }
}

/// Accumulates `scale * w w'` for design row `x` into `acc`.
#[inline]
fn add_outer(acc: &mut DMatrix<f64>, x: &[f64], scale: f64) {
    let p = x.len() + 1;
    for i in 0..p {
        let wi = if i == 0 { 1.0 } else { x[i - 1] };
        for j in 0..p {
            let wj = if j == 0 { 1.0 } else { x[j - 1] };
            acc[(i, j)] += scale * wi * wj;
        }
    }
}

/// Norm of the unweighted score `|g(z_t, theta)|` for every observation.
pub fn score_norms(view: &SampleView<'_>, theta: &Theta) -> Vec<f64> {
    let th: Vec<f64> = theta.to_vector().iter().copied().collect();
    (0..view.len())
        .map(|t| residual(view, t, &th).abs() * design_norm(view.x_row(t)))
        .collect()
}

/// Huber weights `h_c(z_t, theta)`; equal to one when the score vanishes.
pub fn huber_weights(view: &SampleView<'_>, theta: &Theta, c: f64) -> Vec<f64> {
    score_norms(view, theta)
        .into_iter()
        .map(|g| huber_weight(g, c))
        .collect()
}

/// Everything a replicate needs at a fixed parameter value, in one pass.
#[derive(Debug, Clone)]
pub struct ScoreSummary {
    /// `psi_k(theta)`.
    pub psi: DVector<f64>,
    /// `grad_theta psi_k(theta)`.
    pub gradient: DMatrix<f64>,
    /// `(1/k) sum g g' h_c^2`.
    pub outer: DMatrix<f64>,
}

pub fn score_summary(view: &SampleView<'_>, theta: &[f64], c: f64) -> ScoreSummary {
    let p = view.dim();
    let n = view.len() as f64;
    let mut psi = DVector::zeros(p);
    let mut gradient = DMatrix::zeros(p, p);
    let mut outer = DMatrix::zeros(p, p);
    for t in 0..view.len() {
        let x = view.x_row(t);
        let r = residual(view, t, theta);
        let norm = r.abs() * design_norm(x);
        let h = huber_weight(norm, c);
        let rh = r * h;
        psi[0] += rh;
        for (j, xj) in x.iter().enumerate() {
            psi[j + 1] += rh * xj;
        }
        if norm <= c {
            add_outer(&mut gradient, x, -1.0);
        }
        add_outer(&mut outer, x, rh * rh);
    }
    ScoreSummary {
        psi: psi / n,
        gradient: gradient / n,
        outer: outer / n,
    }
}

/// Estimating function `psi_n(theta)`; each term has norm at most `c`.
pub fn psi(view: &SampleView<'_>, theta: &Theta, c: f64) -> DVector<f64> {
    let th: Vec<f64> = theta.to_vector().iter().copied().collect();
    score_summary(view, &th, c).psi
}

/// `(1/n) sum_t grad f(z_t, theta)`: `-w w'` inside the bound, zero outside.
pub fn grad_psi(view: &SampleView<'_>, theta: &Theta, c: f64) -> DMatrix<f64> {
    let th: Vec<f64> = theta.to_vector().iter().copied().collect();
    score_summary(view, &th, c).gradient
}

/// Sandwich `[grad psi]^-1 (outer) [grad psi]^-1`, or `None` if the gradient
/// is singular.
pub fn sandwich_covariance(summary: &ScoreSummary) -> Option<DMatrix<f64>> {
    let inv = checked_inverse(&summary.gradient)?;
    Some(sandwich(&inv, &summary.outer))
}

fn studentize(estimate: f64, se: f64) -> f64 {
    if se > 0.0 {
        estimate / se
    } else if estimate == 0.0 {
        0.0
    } else {
        estimate.signum() * f64::INFINITY
    }
}

fn finish_fit(
    view: &SampleView<'_>,
    theta: DVector<f64>,
    c: f64,
    iterations: usize,
    converged: bool,
) -> Result<RobustFit> {
    let n = view.len();
    let th: Vec<f64> = theta.iter().copied().collect();
    let summary = score_summary(view, &th, c);
    let cov = sandwich_covariance(&summary).ok_or_else(|| {
        Error::DegenerateFit("gradient of the estimating function is singular".into())
    })?;
    let theta = Theta::from_vector(&theta);
    let p = theta.dim();
    let std_errors: Vec<f64> = (0..p)
        .map(|j| (cov[(j, j)].max(0.0) / n as f64).sqrt())
        .collect();
    let t_stats = (0..p)
        .map(|j| studentize(theta.coefficient(j), std_errors[j]))
        .collect();
    let weights = if c.is_finite() {
        huber_weights(view, &theta, c)
    } else {
        vec![1.0; n]
    };
    Ok(RobustFit {
        covariance: (0..p)
            .map(|i| (0..p).map(|j| cov[(i, j)]).collect())
            .collect(),
        theta,
        weights,
        std_errors,
        t_stats,
        iterations,
        converged,
        tuning_c: c,
        n,
    })
}

/// Solves `sum_t weight_t w w' theta = sum_t weight_t w y`.
fn weighted_normal_equations(
    view: &SampleView<'_>,
    weights: Option<&[f64]>,
) -> Result<DVector<f64>> {
    let p = view.dim();
    let mut gram = DMatrix::zeros(p, p);
    let mut rhs = DVector::zeros(p);
    for t in 0..view.len() {
        let x = view.x_row(t);
        let wt = weights.map_or(1.0, |w| w[t]);
        add_outer(&mut gram, x, wt);
        let wy = wt * view.y(t);
        rhs[0] += wy;
        for (j, xj) in x.iter().enumerate() {
            rhs[j + 1] += wy * xj;
        }
    }
    let inv = checked_inverse(&gram).ok_or(Error::SingularDesign)?;
    Ok(inv * rhs)
}

/// Ordinary least squares with heteroskedasticity-robust sandwich covariance.
pub fn ols_fit(view: &SampleView<'_>) -> Result<RobustFit> {
    if view.len() < view.dim() {
        return Err(Error::SingularDesign);
    }
    let theta = weighted_normal_equations(view, None)?;
    finish_fit(view, theta, f64::INFINITY, 0, true).map_err(|e| match e {
        Error::DegenerateFit(_) => Error::SingularDesign,
        other => other,
    })
}

/// Per-observation Huber loss whose gradient is `-n * psi`: a quadratic in the
/// residual up to `c / |w_t|`, linear beyond.
pub fn huber_objective(view: &SampleView<'_>, theta: &[f64], c: f64) -> f64 {
    (0..view.len())
        .map(|t| {
            let x = view.x_row(t);
            let fitted = theta[0] + x.iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
            let r = (view.y(t) - fitted).abs();
            let k = c / (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
            if r <= k {
                0.5 * r * r
            } else {
                k * r - 0.5 * k * k
            }
        })
        .sum()
}

/// Huber M-estimate from the OLS start.
///
/// The estimating equation is the stationarity condition of the convex
/// [`huber_objective`], so each iteration takes a Newton step on the active set
/// of unclipped observations (or the reweighted least-squares step when that
/// set does not identify `theta`) and backtracks until the objective decreases.
pub fn huber_fit(view: &SampleView<'_>, c: f64, tol: f64, max_iter: usize) -> Result<RobustFit> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tuning constant c = {c} must be positive"
        )));
    }
    if view.len() < view.dim() {
        return Err(Error::SingularDesign);
    }
    let to_vec = |th: &DVector<f64>| th.iter().copied().collect::<Vec<f64>>();
    let mut theta = weighted_normal_equations(view, None)?;
    let mut summary = score_summary(view, &to_vec(&theta), c);
    let mut objective = huber_objective(view, &to_vec(&theta), c);
    let mut iterations = 0;
    let mut stalled = false;
    while summary.psi.norm() > tol {
        if iterations == max_iter {
            return Err(Error::NonConvergence {
                iterations,
                psi_norm: summary.psi.norm(),
                last: Theta::from_vector(&theta),
            });
        }
        iterations += 1;
        let direction = match checked_inverse(&summary.gradient) {
            Some(inv) => -(inv * &summary.psi),
            None => {
                let weights = huber_weights(view, &Theta::from_vector(&theta), c);
                weighted_normal_equations(view, Some(&weights))? - &theta
            }
        };
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = &theta + &direction * step;
            let value = huber_objective(view, &to_vec(&candidate), c);
            if value < objective {
                accepted = Some((candidate, value));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((candidate, value)) => {
                theta = candidate;
                objective = value;
                summary = score_summary(view, &to_vec(&theta), c);
            }
            None => {
                // No representable descent left: theta is stationary to machine precision.
                stalled = true;
                break;
            }
        }
    }
    let psi_norm = summary.psi.norm();
    if stalled && psi_norm > tol.max(f64::EPSILON.sqrt() * c.min(1e300)) {
        return Err(Error::NonConvergence {
            iterations,
            psi_norm,
            last: Theta::from_vector(&theta),
        });
    }
    finish_fit(view, theta, c, iterations, true)
}

/// Data-driven tuning constant: the `level` empirical quantile of the OLS
/// score norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningChoice {
    pub c: f64,
    /// Set when every score vanished and the floor was returned.
    pub degenerate: bool,
}

pub fn choose_c_detailed(view: &SampleView<'_>, level: f64) -> Result<TuningChoice> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "quantile level {level} outside (0, 1)"
        )));
    }
    let ols = ols_fit(view)?;
    let mut norms = score_norms(view, &ols.theta);
    norms.sort_by(f64::total_cmp);
    let c = quantile_sorted(&norms, level);
    if c > 0.0 {
        Ok(TuningChoice {
            c,
            degenerate: false,
        })
    } else {
        log::warn!("all OLS scores vanish; using floor c = {C_FLOOR}");
        Ok(TuningChoice {
            c: C_FLOOR,
            degenerate: true,
        })
    }
}

pub fn choose_c(view: &SampleView<'_>, level: f64) -> Result<f64> {
    choose_c_detailed(view, level).map(|choice| choice.c)
}
