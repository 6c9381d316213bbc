//! Quantiles of the robust statistic across persistence and innovation correlation.

use robpred::experiments::{quantile_surface, QuantileSurfaceConfig};

fn main() -> robpred::Result<()> {
    let cfg = QuantileSurfaceConfig {
        n: 250,
        mc_replications: 300,
        phi_grid: vec![0.0, -2.0],
        seed: 3,
        ..Default::default()
    };
    print!("{}", quantile_surface(&cfg)?.to_wide_csv()?);
    Ok(())
}
