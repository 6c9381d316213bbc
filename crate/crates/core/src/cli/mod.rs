//! Command-line front end. Every subcommand reads an optional JSON config
//! mirroring the library config types, applies flag overrides on top, and
//! writes CSV or JSON to stdout or `--out`.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 numerical failure. Errors are reported as JSON on stderr.

pub mod data;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::breakdown::{
    conventional_bootstrap_bounds, conventional_bounds_grid, conventional_subsampling_bounds,
    empirical_breakdown, robust_bootstrap_breakdown, robust_breakdown_grid,
    robust_subsampling_breakdown, BootstrapVariant, BreakdownQuery,
};
use crate::calibration::{calibrate, CalibrationConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    oos_study, power_study, quantile_surface, rolling_oos_study, sensitivity_study,
    ExperimentReport, OosStudyConfig, PowerStudyConfig, QuantileSurfaceConfig, SensitivityConfig,
};
use crate::model::{ContaminationConfig, DgpConfig};
use crate::resampling::{Mode, Scheme};
use crate::rng::derive_seed;

pub use data::{
    build_dividend_yield, build_horizon_returns, build_regression, load_csv, read_csv,
    simulate_dataset, ColumnMapping, Dataset, RegressionSpec,
};
pub use run::{run_test, RunReport, TestRunConfig, WindowOutcome};

#[derive(Debug, Parser)]
#[command(
    name = "robpred",
    version,
    about = "Robust resampling tests for predictive regressions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set settings.c_level=0.95` (value parsed as JSON).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with header `date,price,dividend,short_rate[,extra...]`.
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated predictors (`dividend_yield` or extra column names).
    #[arg(long, value_delimiter = ',')]
    pub predictors: Option<Vec<String>>,
    /// Return horizon in periods.
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a (possibly contaminated) sample as a dataset CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        phi: Option<f64>,
        /// Contamination probability.
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Calibrated conventional and robust subsampling tests on a dataset.
    Test {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        seed: u64,
        /// Rolling window length in observations.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        confidence: Option<f64>,
    },
    /// Monte Carlo size and power of the tests.
    McPower {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        /// Contamination probability applied to every sample.
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Interval length as one response is pushed outwards.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Quantiles of the robust statistic over persistence and correlation.
    QuantileSurface {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Quantile breakdown points (closed forms or the exhaustive verifier).
    Breakdown {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
        /// Breakdown point of the statistic.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Robust (fast resampling) formulas instead of the conventional bounds.
        #[arg(long)]
        robust: bool,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Count outliers exhaustively on the verifier sample instead.
        #[arg(long)]
        empirical: bool,
        /// Comma-separated block sizes for a grid.
        #[arg(long, value_delimiter = ',')]
        ms: Option<Vec<usize>>,
        /// Comma-separated quantile levels for a grid.
        #[arg(long, value_delimiter = ',')]
        ts: Option<Vec<f64>>,
    },
    /// Data-driven block size and robustness constant for a dataset.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        seed: u64,
    },
    /// Out-of-sample R2 of robust, OLS and historical-mean forecasts.
    Oos {
        #[command(flatten)]
        common: Common,
        /// Dataset to evaluate; without it a Monte Carlo study runs.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        predictors: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        replications: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    Subsampling,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    ExcessOnly,
    BlockPlusExcess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub dgp: DgpConfig,
    pub contamination: Option<ContaminationConfig>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            dgp: DgpConfig::univariate(180, 0.0, 0.9, -1.0),
            contamination: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BreakdownConfig {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub b: f64,
    pub scheme: SchemeArg,
    pub robust: bool,
    pub variant: VariantArg,
    pub empirical: bool,
    /// Grid mode when both are nonempty.
    pub ms: Vec<usize>,
    pub ts: Vec<f64>,
}

impl Default for BreakdownConfig {
    fn default() -> Self {
        Self {
            n: 120,
            m: 10,
            t: 0.95,
            b: 0.5,
            scheme: SchemeArg::Subsampling,
            robust: false,
            variant: VariantArg::ExcessOnly,
            empirical: false,
            ms: Vec::new(),
            ts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateConfig {
    pub regression: RegressionSpec,
    pub calibration: CalibrationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OosCommandConfig {
    /// Used with `--data`.
    pub regression: RegressionSpec,
    /// Walk-forward settings in `study.oos` apply to data runs too.
    pub study: OosStudyConfig,
}

/// Process exit status for an error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_)
        | Error::InvalidInput(_)
        | Error::InvalidBlockSize { .. }
        | Error::Json(_)
        | Error::Io(_) => 2,
        Error::Data(_) | Error::Csv(_) => 3,
        Error::SingularDesign
        | Error::NonConvergence { .. }
        | Error::DegenerateFit(_)
        | Error::Undefined(_) => 4,
    }
}

fn error_kind(code: i32) -> &'static str {
    match code {
        2 => "usage",
        3 => "data",
        _ => "numerical",
    }
}

/// Error document written to stderr.
pub fn error_json(kind: &str, message: &str, code: i32) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message, "exit_code": code } })
        .to_string()
}

/// Sets `value` at the dotted `path`, creating objects along the way.
fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut node = root;
    let mut parts = path.split('.').peekable();
    while let Some(part) = parts.next() {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!(
                "cannot set '{path}': '{part}' is inside a non-object"
            ))
        })?;
        if parts.peek().is_none() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    Err(Error::Config("empty override key".into()))
}

/// Config file (or the defaults) with `--set` pairs and flag overrides applied,
/// then checked against the typed schema.
fn load_config<T: Serialize + DeserializeOwned + Default>(
    common: &Common,
    flags: Vec<(&str, Value)>,
) -> Result<T> {
    let mut value = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?
        }
        None => serde_json::to_value(T::default())?,
    };
    for pair in &common.overrides {
        let (key, raw) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{pair}' is not KEY=VALUE")))?;
        let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut value, key, parsed)?;
    }
    for (key, v) in flags {
        set_path(&mut value, key, v)?;
    }
    serde_json::from_value(value).map_err(|e| Error::Config(format!("config schema: {e}")))
}

fn flag<T: Serialize>(flags: &mut Vec<(&'static str, Value)>, key: &'static str, v: Option<T>) {
    if let Some(v) = v {
        flags.push((key, serde_json::to_value(v).expect("flag values serialize")));
    }
}

fn emit(common: &Common, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn report_text(report: &ExperimentReport, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(report.to_json()? + "\n"),
        Format::Csv | Format::Text => report.to_wide_csv(),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    load_csv(path, &ColumnMapping::default())
}

fn data_flags(flags: &mut Vec<(&'static str, Value)>, args: &DataArgs) {
    flag(flags, "regression.predictors", args.predictors.clone());
    flag(flags, "regression.horizon", args.horizon);
}

fn breakdown_output(cfg: &BreakdownConfig, format: Format) -> Result<String> {
    let variant = match cfg.variant {
        VariantArg::ExcessOnly => BootstrapVariant::ExcessOnly,
        VariantArg::BlockPlusExcess => BootstrapVariant::BlockPlusExcess,
    };
    let scheme = match cfg.scheme {
        SchemeArg::Subsampling => Scheme::Subsampling,
        SchemeArg::Bootstrap => Scheme::BlockBootstrap,
    };
    if !cfg.ms.is_empty() && !cfg.ts.is_empty() {
        let value = if cfg.robust {
            serde_json::to_value(robust_breakdown_grid(cfg.n, &cfg.ms, &cfg.ts)?)?
        } else {
            serde_json::to_value(conventional_bounds_grid(cfg.n, cfg.b, &cfg.ms, &cfg.ts)?)?
        };
        return match format {
            Format::Json => Ok(serde_json::to_string_pretty(&value)? + "\n"),
            _ => json_rows_to_csv(&value),
        };
    }
    if cfg.empirical {
        let mode = if cfg.robust {
            Mode::FastRobust
        } else {
            Mode::Conventional
        };
        let e = empirical_breakdown(cfg.n, cfg.m, cfg.t, scheme, mode)?;
        return match format {
            Format::Json => Ok(serde_json::to_string_pretty(&e)? + "\n"),
            _ => Ok(format!("{:.4}\n", e.fraction)),
        };
    }
    let q = BreakdownQuery::new(cfg.n, cfg.m, cfg.t, cfg.b);
    let report = match (cfg.robust, scheme) {
        (false, Scheme::Subsampling) => conventional_subsampling_bounds(&q)?,
        (false, Scheme::BlockBootstrap) => conventional_bootstrap_bounds(&q)?,
        (true, Scheme::Subsampling) => robust_subsampling_breakdown(&q)?,
        (true, Scheme::BlockBootstrap) => robust_bootstrap_breakdown(&q, variant)?,
    };
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&report)? + "\n"),
        Format::Csv => Ok(format!(
            "lower,upper,capped\n{:.4},{:.4},{}\n",
            report.lower, report.upper, report.capped
        )),
        Format::Text => Ok(format!("{:.4}, {:.4}\n", report.lower, report.upper)),
    }
}

/// Flattens an array of flat JSON objects into CSV with the first object's keys.
fn json_rows_to_csv(rows: &Value) -> Result<String> {
    let rows = rows.as_array().cloned().unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let Some(first) = rows.first().and_then(Value::as_object) else {
        return Ok(String::new());
    };
    let keys: Vec<String> = first.keys().cloned().collect();
    w.write_record(&keys)?;
    for row in &rows {
        let rec: Vec<String> = keys
            .iter()
            .map(|k| match &row[k] {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                other => other.to_string(),
            })
            .collect();
        w.write_record(&rec)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Data(e.to_string()))?)
        .map_err(|e| Error::Data(e.to_string()))
}

/// Runs a parsed command, writing results to `stdout` or `--out`.
pub fn execute(cli: Cli, command_line: &str, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Simulate {
            common,
            seed,
            n,
            beta,
            rho,
            phi,
            eta,
        } => {
            let mut flags = Vec::new();
            flag(&mut flags, "dgp.seed", Some(seed));
            flag(&mut flags, "dgp.n", n);
            flag(&mut flags, "dgp.beta", beta.map(|b| vec![b]));
            flag(&mut flags, "dgp.rho", rho.map(|r| vec![r]));
            flag(&mut flags, "dgp.phi", phi);
            flag(&mut flags, "contamination.eta", eta);
            if eta.is_some() {
                flag(
                    &mut flags,
                    "contamination.seed",
                    Some(derive_seed(seed, 0xC0)),
                );
            }
            let cfg: SimulateConfig = load_config(&common, flags)?;
            let ds = simulate_dataset(&cfg.dgp, cfg.contamination.as_ref())?;
            let text = match common.format.unwrap_or(Format::Csv) {
                Format::Json => serde_json::to_string_pretty(&ds)? + "\n",
                _ => {
                    let mut buf = Vec::new();
                    ds.write_csv(&mut buf)?;
                    String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))?
                }
            };
            emit(&common, &text, stdout)
        }
        Command::Test {
            common,
            data,
            seed,
            window,
            confidence,
        } => {
            let mut flags = Vec::new();
            data_flags(&mut flags, &data);
            flag(&mut flags, "calibration.seed", Some(seed));
            flag(&mut flags, "window", window);
            flag(&mut flags, "confidence", confidence);
            let cfg: TestRunConfig = load_config(&common, flags)?;
            let ds = load_dataset(&data.data)?;
            let outcomes = run_test(&ds, &cfg, command_line)?;
            if let Some(WindowOutcome::Failed { error, .. }) = outcomes.iter().find(|_| {
                outcomes
                    .iter()
                    .all(|o| matches!(o, WindowOutcome::Failed { .. }))
            }) {
                return Err(Error::Undefined(format!(
                    "every window failed; first error: {error}"
                )));
            }
            let text = match common.format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&outcomes)? + "\n",
                _ => run::outcomes_to_csv(&outcomes)?,
            };
            emit(&common, &text, stdout)
        }
        Command::McPower {
            common,
            seed,
            replications,
            level,
            eta,
        } => {
            let mut flags = Vec::new();
            flag(&mut flags, "seed", Some(seed));
            flag(&mut flags, "mc_replications", replications);
            flag(&mut flags, "level", level);
            flag(&mut flags, "contamination.eta", eta);
            let cfg: PowerStudyConfig = load_config(&common, flags)?;
            let report = power_study(&cfg)?;
            emit(
                &common,
                &report_text(&report, common.format.unwrap_or(Format::Csv))?,
                stdout,
            )
        }
        Command::Sensitivity {
            common,
            seed,
            replications,
        } => {
            let mut flags = Vec::new();
            flag(&mut flags, "seed", Some(seed));
            flag(&mut flags, "mc_replications", replications);
            let cfg: SensitivityConfig = load_config(&common, flags)?;
            let report = sensitivity_study(&cfg)?;
            emit(
                &common,
                &report_text(&report, common.format.unwrap_or(Format::Csv))?,
                stdout,
            )
        }
        Command::QuantileSurface {
            common,
            seed,
            replications,
            n,
        } => {
            let mut flags = Vec::new();
            flag(&mut flags, "seed", Some(seed));
            flag(&mut flags, "mc_replications", replications);
            flag(&mut flags, "n", n);
            let cfg: QuantileSurfaceConfig = load_config(&common, flags)?;
            let report = quantile_surface(&cfg)?;
            emit(
                &common,
                &report_text(&report, common.format.unwrap_or(Format::Csv))?,
                stdout,
            )
        }
        Command::Breakdown {
            common,
            n,
            m,
            t,
            b,
            scheme,
            robust,
            variant,
            empirical,
            ms,
            ts,
        } => {
            let mut flags = Vec::new();
            flag(&mut flags, "n", n);
            flag(&mut flags, "m", m);
            flag(&mut flags, "t", t);
            flag(&mut flags, "b", b);
            flag(&mut flags, "scheme", scheme);
            flag(&mut flags, "variant", variant);
            flag(&mut flags, "robust", robust.then_some(true));
            flag(&mut flags, "empirical", empirical.then_some(true));
            flag(&mut flags, "ms", ms);
            flag(&mut flags, "ts", ts);
            let cfg: BreakdownConfig = load_config(&common, flags)?;
            let grid = !cfg.ms.is_empty() && !cfg.ts.is_empty();
            let default = if grid { Format::Csv } else { Format::Text };
            emit(
                &common,
                &breakdown_output(&cfg, common.format.unwrap_or(default))?,
                stdout,
            )
        }
        Command::Calibrate { common, data, seed } => {
            let mut flags = Vec::new();
            data_flags(&mut flags, &data);
            flag(&mut flags, "calibration.seed", Some(seed));
            let cfg: CalibrateConfig = load_config(&common, flags)?;
            let ds = load_dataset(&data.data)?;
            let aligned = build_regression(&ds, &cfg.regression)?;
            let result = calibrate(&aligned.sample, &cfg.calibration)?;
            let text = match common.format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&result)? + "\n",
                _ => format!(
                    "m,c,m_fallback,c_fallback\n{},{},{},{}\n",
                    result.block.m,
                    result.robustness.c,
                    result.block.fallback,
                    result.robustness.fallback
                ),
            };
            emit(&common, &text, stdout)
        }
        Command::Oos {
            common,
            data,
            predictors,
            seed,
            window,
            replications,
        } => {
            let mut flags = Vec::new();
            flag(&mut flags, "regression.predictors", predictors);
            flag(&mut flags, "study.oos.window", window);
            flag(&mut flags, "study.mc_replications", replications);
            flag(&mut flags, "study.seed", seed);
            flag(&mut flags, "study.dgp.seed", seed);
            let cfg: OosCommandConfig = load_config(&common, flags)?;
            let report = match &data {
                Some(path) => {
                    let ds = load_dataset(path)?;
                    let aligned = build_regression(&ds, &cfg.regression)?;
                    rolling_oos_study(&aligned.sample, &cfg.study.oos)?
                }
                None => {
                    if seed.is_none() {
                        return Err(Error::Config(
                            "--seed is required for the simulated study".into(),
                        ));
                    }
                    oos_study(&cfg.study)?
                }
            };
            emit(
                &common,
                &report_text(&report, common.format.unwrap_or(Format::Csv))?,
                stdout,
            )
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code; errors go to `stderr` as JSON.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let command_line = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy())
        .collect::<Vec<_>>()
        .join(" ");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = writeln!(stderr, "{}", error_json("usage", e.to_string().trim(), 2));
            return 2;
        }
    };
    match execute(cli, &command_line, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(
                stderr,
                "{}",
                error_json(error_kind(code), &e.to_string(), code)
            );
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(
            std::iter::once("robpred").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn breakdown_table_cell() {
        let (code, out, _) = run(&[
            "breakdown",
            "--n",
            "120",
            "--m",
            "10",
            "--t",
            "0.95",
            "--b",
            "0.5",
            "--scheme",
            "subsampling",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "0.0417, 0.0417\n");
    }

    #[test]
    fn usage_errors_exit_two_with_json() {
        let (code, _, err) = run(&["breakdown", "--bogus"]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"]["kind"], "usage");
        let (code, _, _) = run(&["mc-power", "--replications", "1"]);
        assert_eq!(code, 2, "missing --seed");
        let (code, _, err) = run(&["breakdown", "--set", "nonsense=1"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown field"), "{err}");
    }

    #[test]
    fn overrides_nest() {
        let mut v = serde_json::json!({ "a": { "b": 1 }, "c": null });
        set_path(&mut v, "a.b", Value::from(2)).unwrap();
        set_path(&mut v, "c.d", Value::from(3)).unwrap();
        assert_eq!(v, serde_json::json!({ "a": { "b": 2 }, "c": { "d": 3 } }));
        assert!(set_path(&mut v, "a.b.x", Value::from(1)).is_err());
    }
}
