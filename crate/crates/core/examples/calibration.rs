//! Data-driven block size and robustness constant.

use robpred::calibration::{calibrate, CalibrationConfig};
use robpred::model::{simulate_dgp, DgpConfig};

fn main() -> robpred::Result<()> {
    let sample = simulate_dgp(&DgpConfig::univariate(180, 0.0, 0.9, -1.0).with_seed(1))?;
    let cfg = CalibrationConfig {
        seed: 1,
        ..Default::default()
    };
    let cal = calibrate(&sample, &cfg)?;
    println!(
        "block size m = {} (fallback: {})",
        cal.block.m, cal.block.fallback
    );
    for (center, vol) in &cal.block.volatility {
        println!(
            "  window around m = {}: endpoint volatility {vol:.4}",
            cfg.m_grid[*center]
        );
    }
    println!(
        "robustness c = {:.3} (fallback: {})",
        cal.robustness.c, cal.robustness.fallback
    );
    for (c, coverage) in &cal.robustness.coverages {
        println!("  c = {c:.3}: pseudo-sample coverage {coverage:.3}");
    }
    Ok(())
}
