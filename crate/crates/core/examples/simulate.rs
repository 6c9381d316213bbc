//! Simulate the predictive regression and replace a few responses with outliers.

use robpred::model::{contaminate_with_mask, simulate_dgp, ContaminationConfig, DgpConfig};

fn main() -> robpred::Result<()> {
    let dgp = DgpConfig::univariate(180, 0.1, 0.9, -1.0).with_seed(7);
    let clean = simulate_dgp(&dgp)?;
    let dirty = contaminate_with_mask(&clean, &ContaminationConfig::new(0.04, 7))?;
    println!("n = {}, k = {}", clean.n(), clean.k());
    println!("replaced responses at {:?}", dirty.replaced);
    for &t in dirty.replaced.iter().take(3) {
        println!(
            "  t = {t}: {:.3} -> {:.3}",
            clean.y()[t],
            dirty.sample.y()[t]
        );
    }
    Ok(())
}
