//! Fast robust block bootstrap and its symmetric interval.

use robpred::estimators::choose_c;
use robpred::model::{simulate_dgp, DgpConfig};
use robpred::resampling::{analyze, quantile, Mode, ResamplingConfig};

fn main() -> robpred::Result<()> {
    let sample = simulate_dgp(&DgpConfig::univariate(180, 0.0, 0.9, -1.0).with_seed(5))?;
    let c = choose_c(&sample.view(), 0.9)?;
    let cfg = ResamplingConfig::bootstrap(15, 499, Mode::FastRobust, c, 2024);
    let analysis = analyze(&sample, &cfg, 1)?;
    let dist = &analysis.distribution;
    println!("{} draws ({} degenerate)", dist.len(), dist.n_degenerate());
    println!(
        "0.95-quantile of |T*|: {:.3}",
        quantile(&dist.absolute(), 0.95)?
    );
    let ci = analysis.symmetric_ci(0.95)?;
    println!(
        "95% interval for the slope: [{:.4}, {:.4}]",
        ci.lower, ci.upper
    );
    Ok(())
}
