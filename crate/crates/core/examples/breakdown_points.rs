//! Quantile breakdown points of conventional and robust resampling, and the
//! exhaustive outlier count on a small sample.

use robpred::breakdown::{conventional_bounds_grid, empirical_breakdown, robust_breakdown_grid};
use robpred::resampling::{Mode, Scheme};

fn main() -> robpred::Result<()> {
    let (ms, ts) = ([10, 20, 30], [0.9, 0.95]);
    println!("conventional bounds, n = 120, b = 0.5");
    for row in conventional_bounds_grid(120, 0.5, &ms, &ts)? {
        println!("  {row:?}");
    }
    println!("robust breakdown points, n = 120");
    for row in robust_breakdown_grid(120, &ms, &ts)? {
        println!("  {row:?}");
    }
    for mode in [Mode::Conventional, Mode::FastRobust] {
        let e = empirical_breakdown(20, 5, 0.95, Scheme::Subsampling, mode)?;
        println!(
            "exhaustive n = 20, m = 5, t = 0.95, {mode:?}: {} outliers ({:.3})",
            e.outliers, e.fraction
        );
    }
    Ok(())
}
