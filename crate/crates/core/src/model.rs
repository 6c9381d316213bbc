//! Sample representation, the predictive-regression data-generating process
//! and replacement-outlier contamination.
//!
//! The simulated model is
//!
//! ```text
//! y_t = alpha + beta' x_{t-1} + u_t
//! x_t = mu + rho x_{t-1} + v_t        (component-wise)
//! u_t = phi * sum_j v_{j,t} + e_t
//! ```
//!
//! and observation `t` of a [`TimeSeriesSample`] is the pair `(y_t, x_{t-1})`.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};

/// Ordered `(y_t, x_{t-1})` pairs. Predictors are stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesSample {
    y: Vec<f64>,
    x: Vec<f64>,
    k: usize,
}

/// Borrowed contiguous stretch of a sample (a block, or the whole sample).
#[derive(Debug, Clone, Copy)]
pub struct SampleView<'a> {
    y: &'a [f64],
    x: &'a [f64],
    k: usize,
}

impl TimeSeriesSample {
    /// Builds a sample from responses and one predictor row per observation.
    pub fn new(y: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if y.len() != rows.len() {
            return Err(Error::InvalidInput(format!(
                "{} responses but {} predictor rows",
                y.len(),
                rows.len()
            )));
        }
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput(
                "predictor rows differ in dimension".into(),
            ));
        }
        Self::from_flat(y, rows.into_iter().flatten().collect(), k)
    }

    /// Single-predictor convenience constructor.
    pub fn univariate(y: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::InvalidInput(format!(
                "{} responses but {} predictor values",
                y.len(),
                x.len()
            )));
        }
        Self::from_flat(y, x, 1)
    }

    /// Builds from a row-major predictor buffer of length `n * k`.
    pub fn from_flat(y: Vec<f64>, x: Vec<f64>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput(
                "at least one predictor is required".into(),
            ));
        }
        if x.len() != y.len() * k {
            return Err(Error::InvalidInput(
                "predictor buffer has wrong length".into(),
            ));
        }
        if y.len() < k + 2 {
            return Err(Error::InvalidInput(format!(
                "need at least {} observations for {} predictor(s), got {}",
                k + 2,
                k,
                y.len()
            )));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "sample contains non-finite values".into(),
            ));
        }
        Ok(Self { y, x, k })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Predictor row paired with response `t` (that is, `x_{t-1}`).
    pub fn x_row(&self, t: usize) -> &[f64] {
        &self.x[t * self.k..(t + 1) * self.k]
    }

    /// Values of predictor `j` across the sample.
    pub fn predictor(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|t| self.x[t * self.k + j]).collect()
    }

    pub fn view(&self) -> SampleView<'_> {
        SampleView {
            y: &self.y,
            x: &self.x,
            k: self.k,
        }
    }

    /// Observations `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> SampleView<'_> {
        self.view().slice(start, len)
    }

    /// Copy with response `t` replaced.
    pub fn with_response(&self, t: usize, value: f64) -> Self {
        let mut out = self.clone();
        out.y[t] = value;
        out
    }

    /// Copy with all responses replaced (length must match).
    pub fn with_responses(&self, y: Vec<f64>) -> Result<Self> {
        Self::from_flat(y, self.x.clone(), self.k)
    }

    pub(crate) fn from_parts_unchecked(y: Vec<f64>, x: Vec<f64>, k: usize) -> Self {
        Self { y, x, k }
    }
}

impl<'a> SampleView<'a> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of coefficients (intercept plus slopes).
    pub fn dim(&self) -> usize {
        self.k + 1
    }

    pub fn y(&self, t: usize) -> f64 {
        self.y[t]
    }

    pub fn x_row(&self, t: usize) -> &'a [f64] {
        &self.x[t * self.k..(t + 1) * self.k]
    }

    pub fn slice(&self, start: usize, len: usize) -> SampleView<'a> {
        SampleView {
            y: &self.y[start..start + len],
            x: &self.x[start * self.k..(start + len) * self.k],
            k: self.k,
        }
    }

    pub fn to_owned_sample(&self) -> TimeSeriesSample {
        TimeSeriesSample::from_parts_unchecked(self.y.to_vec(), self.x.to_vec(), self.k)
    }
}

/// Innovation law for the simulated shocks (scaled to unit variance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    #[default]
    Gaussian,
    /// Student-t with `dof > 2` degrees of freedom, rescaled to unit variance.
    StudentT { dof: f64 },
}

impl Innovation {
    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Innovation::Gaussian => StandardNormal.sample(rng),
            Innovation::StudentT { dof } => {
                let t: f64 = StudentT::new(dof).expect("validated dof").sample(rng);
                t * ((dof - 2.0) / dof).sqrt()
            }
        }
    }
}

/// Parameters of the simulated predictive regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DgpConfig {
    pub n: usize,
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub mu: f64,
    pub rho: Vec<f64>,
    pub phi: f64,
    pub sigma_v: f64,
    pub sigma_e: f64,
    pub x_init: f64,
    /// Discarded predictor steps before `x_0` is recorded.
    pub burn_in: usize,
    pub innovation: Innovation,
    pub seed: u64,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            n: 180,
            alpha: 0.0,
            beta: vec![0.0],
            mu: 0.0,
            rho: vec![0.9],
            phi: -1.0,
            sigma_v: 1.0,
            sigma_e: 1.0,
            x_init: 0.0,
            burn_in: 0,
            innovation: Innovation::Gaussian,
            seed: 0,
        }
    }
}

impl DgpConfig {
    /// Single-predictor configuration with unit innovations, zero intercepts.
    pub fn univariate(n: usize, beta: f64, rho: f64, phi: f64) -> Self {
        Self {
            n,
            beta: vec![beta],
            rho: vec![rho],
            phi,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn k(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.beta.len();
        if k == 0 {
            return Err(Error::Config(
                "beta must have at least one component".into(),
            ));
        }
        if self.rho.len() != k {
            return Err(Error::Config(format!(
                "rho has {} components but beta has {}",
                self.rho.len(),
                k
            )));
        }
        if !(self.sigma_v >= 0.0) || !(self.sigma_e >= 0.0) {
            return Err(Error::Config(
                "innovation standard deviations must be nonnegative".into(),
            ));
        }
        if self.rho.iter().any(|&r| !(r > -1.0 && r <= 1.0)) {
            return Err(Error::Config(
                "autoregressive coefficients must lie in (-1, 1]".into(),
            ));
        }
        if self.n < k + 2 {
            return Err(Error::Config(format!("n must be at least {}", k + 2)));
        }
        if let Innovation::StudentT { dof } = self.innovation {
            if !(dof > 2.0) {
                return Err(Error::Config("Student-t innovations need dof > 2".into()));
            }
        }
        let finite = [self.alpha, self.mu, self.phi, self.x_init]
            .iter()
            .chain(self.beta.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Raw simulated paths: responses `y_1..y_n` and predictor states `x_0..x_n`
/// (row-major, `k` per state).
#[derive(Debug, Clone)]
pub struct SimulatedPaths {
    pub y: Vec<f64>,
    pub x_states: Vec<f64>,
    pub k: usize,
}

impl SimulatedPaths {
    /// Predictor `j` at times `1..=n`.
    pub fn predictor_path(&self, j: usize) -> Vec<f64> {
        let n = self.y.len();
        (1..=n).map(|t| self.x_states[t * self.k + j]).collect()
    }
}

pub fn simulate_paths(config: &DgpConfig) -> Result<SimulatedPaths> {
    config.validate()?;
    let k = config.k();
    let n = config.n;
    let mut rng = substream(config.seed, 0);
    let mut state = vec![config.x_init; k];
    let mut v = vec![0.0; k];

    for _ in 0..config.burn_in {
        for (j, s) in state.iter_mut().enumerate() {
            *s = config.mu + config.rho[j] * *s + config.sigma_v * config.innovation.draw(&mut rng);
        }
    }

    let mut y = Vec::with_capacity(n);
    let mut x_states = Vec::with_capacity((n + 1) * k);
    x_states.extend_from_slice(&state);
    for _ in 0..n {
        for vj in v.iter_mut() {
            *vj = config.sigma_v * config.innovation.draw(&mut rng);
        }
        let e = config.sigma_e * config.innovation.draw(&mut rng);
        let u = config.phi * v.iter().sum::<f64>() + e;
        let signal: f64 = config.beta.iter().zip(&state).map(|(b, x)| b * x).sum();
        y.push(config.alpha + signal + u);
        for (j, s) in state.iter_mut().enumerate() {
            *s = config.mu + config.rho[j] * *s + v[j];
        }
        x_states.extend_from_slice(&state);
    }
    Ok(SimulatedPaths { y, x_states, k })
}

/// Simulates `n` observations `(y_t, x_{t-1})`; deterministic in `config.seed`.
pub fn simulate_dgp(config: &DgpConfig) -> Result<TimeSeriesSample> {
    let paths = simulate_paths(config)?;
    let k = paths.k;
    let n = paths.y.len();
    let x = paths.x_states[..n * k].to_vec();
    Ok(TimeSeriesSample::from_parts_unchecked(paths.y, x, k))
}

/// Replacement-outlier contamination of the responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContaminationConfig {
    pub eta: f64,
    pub multiplier: f64,
    pub seed: u64,
}

impl Default for ContaminationConfig {
    fn default() -> Self {
        Self {
            eta: 0.04,
            multiplier: 3.0,
            seed: 0,
        }
    }
}

impl ContaminationConfig {
    pub fn new(eta: f64, seed: u64) -> Self {
        Self {
            eta,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Config(format!(
                "eta = {} is outside [0, 1]",
                self.eta
            )));
        }
        if !self.multiplier.is_finite() {
            return Err(Error::Config("multiplier must be finite".into()));
        }
        Ok(())
    }
}

/// Contaminated sample plus the indices whose response was replaced.
#[derive(Debug, Clone)]
pub struct Contaminated {
    pub sample: TimeSeriesSample,
    pub replaced: Vec<usize>,
}

/// `y~_t = (1 - p_t) y_t + p_t * multiplier * max(y)` with `p_t ~ Bernoulli(eta)`.
pub fn contaminate_with_mask(
    sample: &TimeSeriesSample,
    config: &ContaminationConfig,
) -> Result<Contaminated> {
    config.validate()?;
    let mut rng = substream(derive_seed(config.seed, 0xC0A7), 0);
    let y_max = sample.y().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outlier = config.multiplier * y_max;
    let mut y = sample.y().to_vec();
    let mut replaced = Vec::new();
    for (t, yt) in y.iter_mut().enumerate() {
        if rng.random_bool(config.eta) {
            *yt = outlier;
            replaced.push(t);
        }
    }
    Ok(Contaminated {
        sample: TimeSeriesSample::from_parts_unchecked(y, sample.x.clone(), sample.k),
        replaced,
    })
}

pub fn contaminate(
    sample: &TimeSeriesSample,
    config: &ContaminationConfig,
) -> Result<TimeSeriesSample> {
    contaminate_with_mask(sample, config).map(|c| c.sample)
}
