//! CSV ingestion, dividend-yield construction and rolling-window tests.

use std::collections::BTreeMap;

use robpred::cli::run::{run_test, TestRunConfig, WindowOutcome};
use robpred::cli::{build_dividend_yield, load_csv, ColumnMapping, Dataset, RegressionSpec};

fn main() -> robpred::Result<()> {
    // a synthetic monthly series with a slowly varying dividend
    let n = 240;
    let ds = Dataset {
        dates: (0..n)
            .map(|t| format!("{}-{:02}", 2000 + t / 12, t % 12 + 1))
            .collect(),
        price: (0..n)
            .map(|t| 100.0 * (1.0 + 0.002 * t as f64 + 0.05 * (t as f64 / 7.0).sin()))
            .collect(),
        dividend_monthly: (0..n)
            .map(|t| 0.25 + 0.02 * (t as f64 / 17.0).cos())
            .collect(),
        short_rate: vec![0.003; n],
        extra_predictors: BTreeMap::new(),
    };
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("prices.csv");
    ds.write_csv(std::fs::File::create(&path)?)?;
    let loaded = load_csv(&path, &ColumnMapping::default())?;
    println!(
        "loaded {} rows; first log dividend yield {:.4}",
        loaded.len(),
        build_dividend_yield(&loaded)?[0]
    );

    let cfg = TestRunConfig {
        regression: RegressionSpec::default(),
        window: Some(180),
        ..Default::default()
    };
    for outcome in run_test(&loaded, &cfg, "dataset_pipeline")
        .unwrap()
        .iter()
        .step_by(12)
    {
        match outcome {
            WindowOutcome::Report(r) => {
                let robust = r
                    .coefficients
                    .iter()
                    .find(|c| c.method == "robust")
                    .unwrap();
                println!(
                    "{}..{}: m = {}, c = {:.3}, robust slope {:.3}{}, flagged {:.1}%",
                    r.window.start_date,
                    r.window.end_date,
                    r.block_size,
                    r.tuning_c,
                    robust.estimate,
                    robust.mark,
                    100.0 * r.flagged_fraction
                );
            }
            WindowOutcome::Failed { window, error } => println!("{}: {error}", window.start_date),
        }
    }
    Ok(())
}
