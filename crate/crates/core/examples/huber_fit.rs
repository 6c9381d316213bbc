//! Compare OLS with the Huber estimator on contaminated data and list the
//! most downweighted observations.

use robpred::estimators::{choose_c, huber_fit, ols_fit, DEFAULT_MAX_ITER, DEFAULT_TOL};
use robpred::model::{contaminate, simulate_dgp, ContaminationConfig, DgpConfig};

fn main() -> robpred::Result<()> {
    let clean = simulate_dgp(&DgpConfig::univariate(180, 0.1, 0.9, -1.0).with_seed(3))?;
    let sample = contaminate(&clean, &ContaminationConfig::new(0.04, 3))?;
    let c = choose_c(&sample.view(), 0.9)?;
    let ols = ols_fit(&sample.view())?;
    let robust = huber_fit(&sample.view(), c, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    println!("c = {c:.3}");
    println!(
        "OLS   slope {:.4} (se {:.4})",
        ols.theta.slopes[0], ols.std_errors[1]
    );
    println!(
        "Huber slope {:.4} (se {:.4}), {} iterations",
        robust.theta.slopes[0], robust.std_errors[1], robust.iterations
    );
    let mut flagged: Vec<(usize, f64)> = robust
        .weights
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, w)| *w < 1.0)
        .collect();
    flagged.sort_by(|a, b| a.1.total_cmp(&b.1));
    println!(
        "{:.1}% downweighted; smallest weights:",
        100.0 * robust.downweighted_fraction()
    );
    for (t, w) in flagged.iter().take(5) {
        println!("  t = {t}: {w:.3}");
    }
    Ok(())
}
