//! Walk-forward forecasts from OLS, Huber and the historical mean.

use robpred::experiments::{
    oos_study, walk_forward, ContaminationSpec, OosConfig, OosStudyConfig, ScoreTarget,
};
use robpred::model::{simulate_dgp, DgpConfig};

fn main() -> robpred::Result<()> {
    let sample = simulate_dgp(&DgpConfig::univariate(240, 0.1, 0.9, -1.0).with_seed(21))?;
    let summary = walk_forward(
        &sample,
        &OosConfig {
            window: 120,
            ..Default::default()
        },
    )?
    .summary();
    println!("{summary:?}");
    let cfg = OosStudyConfig {
        contamination: Some(ContaminationSpec::default()),
        score_against: ScoreTarget::Uncontaminated,
        mc_replications: 50,
        seed: 21,
        ..Default::default()
    };
    print!("{}", oos_study(&cfg)?.to_wide_csv()?);
    Ok(())
}
