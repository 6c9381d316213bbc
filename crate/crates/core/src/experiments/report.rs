//! Schema-stable experiment reports with CSV and JSON emission.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the report layout; bumped on any incompatible change.
pub const SCHEMA_VERSION: u32 = 1;

/// One report cell: a metric for one configuration and method, with its
/// Monte Carlo standard error (zero for quantities computed without
/// simulation). Undefined statistics are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRow {
    pub key: String,
    pub method: String,
    pub metric: String,
    pub value: Option<f64>,
    pub mc_se: Option<f64>,
    /// Replications behind the value.
    pub replications: usize,
}

impl ReportRow {
    pub fn new(
        key: impl Into<String>,
        method: impl Into<String>,
        metric: impl Into<String>,
        value: f64,
        mc_se: f64,
        replications: usize,
    ) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            key: key.into(),
            method: method.into(),
            metric: metric.into(),
            value: finite(value),
            mc_se: finite(mc_se),
            replications,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    /// Full configuration echo, including the seed.
    pub provenance: serde_json::Value,
}

impl ExperimentReport {
    pub fn new<C: Serialize>(experiment: &str, config: &C, rows: Vec<ReportRow>) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            rows,
            provenance: serde_json::json!({
                "config": serde_json::to_value(config)?,
                "crate_version": env!("CARGO_PKG_VERSION"),
            }),
        })
    }

    /// Rows matching `key`, `method` and `metric`; empty strings match anything.
    pub fn find(&self, key: &str, method: &str, metric: &str) -> Vec<&ReportRow> {
        self.rows
            .iter()
            .filter(|r| {
                (key.is_empty() || r.key == key)
                    && (method.is_empty() || r.method == method)
                    && (metric.is_empty() || r.metric == metric)
            })
            .collect()
    }

    /// The single value for `(key, method, metric)`.
    pub fn value(&self, key: &str, method: &str, metric: &str) -> Option<(f64, f64)> {
        match self.find(key, method, metric).as_slice() {
            [row] => row.value.map(|v| (v, row.mc_se.unwrap_or(f64::NAN))),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "report schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.experiment.is_empty() {
            return Err(Error::Data("report without experiment name".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.metric.is_empty() || row.method.is_empty() {
                return Err(Error::Data(format!("row {i} lacks a method or metric")));
            }
            if row.mc_se.is_some_and(|se| se < 0.0) {
                return Err(Error::Data(format!(
                    "row {i} has a negative standard error"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a report.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        report.validate()?;
        Ok(report)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "experiment",
            "key",
            "method",
            "metric",
            "value",
            "mc_se",
            "replications",
        ])?;
        let fmt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        for r in &self.rows {
            w.write_record([
                self.experiment.clone(),
                r.key.clone(),
                r.method.clone(),
                r.metric.clone(),
                fmt(r.value),
                fmt(r.mc_se),
                r.replications.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
    }
    /// One row per key with `method:metric` and `method:metric:se` columns,
    /// in order of first appearance.
    pub fn to_wide_csv(&self) -> Result<String> {
        let mut columns: Vec<(&str, &str)> = Vec::new();
        let mut keys: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !columns.contains(&(r.method.as_str(), r.metric.as_str())) {
                columns.push((&r.method, &r.metric));
            }
            if !keys.contains(&r.key.as_str()) {
                keys.push(&r.key);
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["key".to_string()];
        for (method, metric) in &columns {
            header.push(format!("{method}:{metric}"));
            header.push(format!("{method}:{metric}:se"));
        }
        w.write_record(&header)?;
        let fmt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        for key in keys {
            let mut rec = vec![key.to_string()];
            for (method, metric) in &columns {
                match self
                    .rows
                    .iter()
                    .find(|r| r.key == key && r.method == *method && r.metric == *metric)
                {
                    Some(r) => rec.extend([fmt(r.value), fmt(r.mc_se)]),
                    None => rec.extend([String::new(), String::new()]),
                }
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
    }
}

/// Binomial standard error of a frequency.
pub fn binomial_se(p: f64, trials: usize) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Standard error of a sample mean.
pub fn mean_se(values: &[f64]) -> f64 {
    crate::stats::std_dev(values) / (values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> ExperimentReport {
        let rows = vec![
            ReportRow::new("a", "m", "rate", 0.5, 0.1, 10),
            ReportRow::new("a", "m", "undefined", f64::NAN, f64::NAN, 10),
        ];
        ExperimentReport::new("demo", &serde_json::json!({"seed": 1}), rows).unwrap()
    }

    #[test]
    fn json_round_trip_validates() {
        let r = report();
        let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(r, back);
        assert_eq!(back.value("a", "m", "rate"), Some((0.5, 0.1)));
        assert_eq!(back.value("a", "m", "undefined"), None);
    }

    #[test]
    fn schema_violations_are_rejected() {
        let mut r = report();
        r.schema_version = 99;
        assert!(ExperimentReport::from_json(&r.to_json().unwrap()).is_err());
        let text = report()
            .to_json()
            .unwrap()
            .replacen("\"rows\"", "\"extra\": 1, \"rows\"", 1);
        assert!(ExperimentReport::from_json(&text).is_err());
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let csv = report().to_csv().unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().ends_with(",,10"));
    }

    #[test]
    fn binomial_se_formula() {
        assert!((binomial_se(0.1, 500) - (0.09f64 / 500.0).sqrt()).abs() < 1e-15);
    }
}
