//! Dataset ingestion and construction of responses and predictors.
//!
//! Input files carry the header `date,price,dividend,short_rate[,<extra>...]`.
//! Dates are opaque labels that only need to sort. The short rate is a
//! per-period decimal rate; annualized rates must be converted beforehand.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    contaminate, simulate_dgp, simulate_paths, ContaminationConfig, DgpConfig, TimeSeriesSample,
};

/// Which input columns hold the core series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub date: String,
    pub price: String,
    pub dividend: String,
    pub short_rate: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            date: "date".into(),
            price: "price".into(),
            dividend: "dividend".into(),
            short_rate: "short_rate".into(),
        }
    }
}

/// Aligned series sorted by date. Every column has one value per date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dates: Vec<String>,
    pub price: Vec<f64>,
    /// Per-period dividend `d_t`.
    pub dividend_monthly: Vec<f64>,
    /// Per-period short rate `r_t` as a decimal.
    pub short_rate: Vec<f64>,
    pub extra_predictors: BTreeMap<String, Vec<f64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Rows `start..start + len`.
    pub fn window(&self, start: usize, len: usize) -> Dataset {
        let r = start..start + len;
        Dataset {
            dates: self.dates[r.clone()].to_vec(),
            price: self.price[r.clone()].to_vec(),
            dividend_monthly: self.dividend_monthly[r.clone()].to_vec(),
            short_rate: self.short_rate[r.clone()].to_vec(),
            extra_predictors: self
                .extra_predictors
                .iter()
                .map(|(k, v)| (k.clone(), v[r.clone()].to_vec()))
                .collect(),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["date", "price", "dividend", "short_rate"];
        header.extend(self.extra_predictors.keys().map(String::as_str));
        w.write_record(&header)?;
        for t in 0..self.len() {
            let mut row = vec![
                self.dates[t].clone(),
                self.price[t].to_string(),
                self.dividend_monthly[t].to_string(),
                self.short_rate[t].to_string(),
            ];
            row.extend(self.extra_predictors.values().map(|v| v[t].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_csv(path: &Path, mapping: &ColumnMapping) -> Result<Dataset> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    read_csv(file, mapping)
}

/// Parses, validates and date-sorts a dataset. Row numbers in errors count
/// the header as row 1.
pub fn read_csv<R: Read>(input: R, mapping: &ColumnMapping) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| Error::Data(format!("unreadable header: {e}")))?
        .clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("missing column '{name}'")))
    };
    let core = [
        find(&mapping.date)?,
        find(&mapping.price)?,
        find(&mapping.dividend)?,
        find(&mapping.short_rate)?,
    ];
    let extras: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| !core.contains(i))
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Data(format!("row {row}: {e}")))?;
        let cell = |col: usize| -> Result<&str> {
            match record.get(col) {
                Some(v) if !v.is_empty() => Ok(v),
                _ => Err(Error::Data(format!(
                    "row {row}, column '{}': missing value",
                    &header[col]
                ))),
            }
        };
        let number = |col: usize| -> Result<f64> {
            let text = cell(col)?;
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::Data(format!(
                        "row {row}, column '{}': non-numeric value '{text}'",
                        &header[col]
                    ))
                })
        };
        let mut values = vec![number(core[1])?, number(core[2])?, number(core[3])?];
        for (col, _) in &extras {
            values.push(number(*col)?);
        }
        rows.push((cell(core[0])?.to_string(), values));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Data(format!("duplicate date '{}'", w[0].0)));
    }
    let column = |j: usize| rows.iter().map(|r| r.1[j]).collect::<Vec<f64>>();
    Ok(Dataset {
        dates: rows.iter().map(|r| r.0.clone()).collect(),
        price: column(0),
        dividend_monthly: column(1),
        short_rate: column(2),
        extra_predictors: extras
            .iter()
            .enumerate()
            .map(|(j, (_, name))| (name.clone(), column(3 + j)))
            .collect(),
    })
}

/// Log dividend yield `ln(D_t / P_t)` for `t = 11..n`, where `D_t` sums the
/// last twelve dividends, each reinvested at the short rate:
/// `D_t = d_t + (1+r_t) d_{t-1} + (1+r_t)(1+r_{t-1}) d_{t-2} + ...`.
pub fn build_dividend_yield(ds: &Dataset) -> Result<Vec<f64>> {
    let n = ds.len();
    if n < 12 {
        return Err(Error::Data(format!(
            "dividend yield needs 12 observations of history, got {n}"
        )));
    }
    (11..n)
        .map(|t| {
            let mut total = ds.dividend_monthly[t];
            let mut growth = 1.0;
            for j in 1..12 {
                growth *= 1.0 + ds.short_rate[t + 1 - j];
                total += growth * ds.dividend_monthly[t - j];
            }
            let ratio = total / ds.price[t];
            if ratio > 0.0 {
                Ok(ratio.ln())
            } else {
                Err(Error::Data(format!(
                    "row for date '{}': dividend yield needs positive dividends and price",
                    ds.dates[t]
                )))
            }
        })
        .collect()
}

/// Average log return `(1/k) sum_{j=1..k} ln R_{t+j}` for `t = 0..n-k`, with
/// `ln R_t = ln((P_t + d_t) / P_{t-1})`.
pub fn build_horizon_returns(ds: &Dataset, k: usize) -> Result<Vec<f64>> {
    let n = ds.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!(
            "horizon {k} needs 1 <= k < {n}"
        )));
    }
    let mut log_returns = Vec::with_capacity(n - 1);
    for t in 1..n {
        let (num, den) = (ds.price[t] + ds.dividend_monthly[t], ds.price[t - 1]);
        if num <= 0.0 || den <= 0.0 {
            let bad = if den <= 0.0 { t - 1 } else { t };
            return Err(Error::Data(format!(
                "row for date '{}': price and price plus dividend must be positive",
                ds.dates[bad]
            )));
        }
        log_returns.push((num / den).ln());
    }
    Ok(log_returns
        .windows(k)
        .map(|w| w.iter().sum::<f64>() / k as f64)
        .collect())
}

/// Predictor named `dividend_yield` is built from the data; any other name
/// refers to an extra column.
pub const DIVIDEND_YIELD: &str = "dividend_yield";

/// Response and predictors of a predictive regression on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionSpec {
    /// Return horizon `k`.
    pub horizon: usize,
    pub predictors: Vec<String>,
}

impl Default for RegressionSpec {
    fn default() -> Self {
        Self {
            horizon: 1,
            predictors: vec![DIVIDEND_YIELD.into()],
        }
    }
}

/// Regression sample with one date label per observation (the first period
/// of the predicted return).
#[derive(Debug, Clone)]
pub struct AlignedSample {
    pub sample: TimeSeriesSample,
    pub dates: Vec<String>,
}

/// Pairs the `k`-period return starting after `t` with predictors observed at `t`.
pub fn build_regression(ds: &Dataset, spec: &RegressionSpec) -> Result<AlignedSample> {
    if spec.predictors.is_empty() {
        return Err(Error::Config(
            "regression needs at least one predictor".into(),
        ));
    }
    let returns = build_horizon_returns(ds, spec.horizon)?;
    let uses_yield = spec.predictors.iter().any(|p| p == DIVIDEND_YIELD);
    let first = if uses_yield { 11 } else { 0 };
    let dy = if uses_yield {
        build_dividend_yield(ds)?
    } else {
        Vec::new()
    };
    let mut columns: Vec<&[f64]> = Vec::new();
    for name in &spec.predictors {
        if name == DIVIDEND_YIELD {
            columns.push(&dy);
        } else {
            let col = ds
                .extra_predictors
                .get(name)
                .ok_or_else(|| Error::Config(format!("unknown predictor column '{name}'")))?;
            columns.push(&col[first..]);
        }
    }
    let end = returns.len();
    if end <= first {
        return Err(Error::Data("no observations left after alignment".into()));
    }
    let rows = (first..end)
        .map(|t| columns.iter().map(|c| c[t - first]).collect())
        .collect();
    let sample = TimeSeriesSample::new(returns[first..end].to_vec(), rows)?;
    Ok(AlignedSample {
        sample,
        dates: ds.dates[first + 1..end + 1].to_vec(),
    })
}

/// Simulated sample written as a dataset whose one-period log returns are the
/// simulated responses: zero dividends and rates, `P_0 = 1`, and predictor
/// columns `x1..xk` holding the predictor state at each date. The regression
/// of [`RegressionSpec`] with predictors `x1..xk` recovers the sample exactly.
pub fn simulate_dataset(
    dgp: &DgpConfig,
    contamination: Option<&ContaminationConfig>,
) -> Result<Dataset> {
    let paths = simulate_paths(dgp)?;
    let clean = simulate_dgp(dgp)?;
    let sample = match contamination {
        Some(c) => contaminate(&clean, c)?,
        None => clean,
    };
    let n = sample.n();
    let k = paths.k;
    let mut price = Vec::with_capacity(n + 1);
    price.push(1.0);
    for &y in sample.y() {
        price.push(price.last().unwrap() * y.exp());
    }
    let extra = (0..k)
        .map(|j| {
            (
                format!("x{}", j + 1),
                (0..=n).map(|t| paths.x_states[t * k + j]).collect(),
            )
        })
        .collect();
    Ok(Dataset {
        dates: (0..=n).map(|t| format!("t{t:06}")).collect(),
        price,
        dividend_monthly: vec![0.0; n + 1],
        short_rate: vec![0.0; n + 1],
        extra_predictors: extra,
    })
}
