//! Average interval length as the largest response is pushed outwards.

use robpred::experiments::{sensitivity_study, SensitivityConfig};

fn main() -> robpred::Result<()> {
    let cfg = SensitivityConfig {
        mc_replications: 100,
        seed: 9,
        ..Default::default()
    };
    print!("{}", sensitivity_study(&cfg)?.to_wide_csv()?);
    Ok(())
}
