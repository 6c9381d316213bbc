//! Size and power of the subsampling tests on clean and contaminated data.

use robpred::experiments::{power_study, ContaminationSpec, PowerStudyConfig};
use robpred::model::DgpConfig;

fn main() -> robpred::Result<()> {
    for contamination in [None, Some(ContaminationSpec::default())] {
        let cfg = PowerStudyConfig {
            dgp_grid: [0.0, 0.05, 0.1]
                .iter()
                .map(|&b| DgpConfig::univariate(180, b, 0.9, -1.0))
                .collect(),
            contamination,
            mc_replications: 200,
            seed: 42,
            ..Default::default()
        };
        print!("{}", power_study(&cfg)?.to_wide_csv()?);
    }
    Ok(())
}
