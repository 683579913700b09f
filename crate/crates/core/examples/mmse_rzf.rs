//! Monte-Carlo MMSE combining and RZF precoding against MRC/MFP on the
//! same drops and channel streams.
//!
//! cargo run --release --example mmse_rzf

use cfdtdd::harness::{compare_schemes, ExperimentConfig, Processing, Scheme};

const CONFIG: &str = r#"
scheme = "cf_dtdd_greedy"
demand = 0.5
drops = 10
seed = 3

[network]
area_side_m = 1000.0
num_aps = 8
antennas_per_ap = 4
num_ues = 8
cli_residual_db = -20.0

[pilot]
tau = 200
tau_p = 4

[powers]
ul_snr_db = 60.0
dl_snr_db = 60.0

[montecarlo]
n_realizations = 200
"#;

fn main() -> cfdtdd::Result<()> {
    let mut config = ExperimentConfig::from_toml_str(CONFIG)?;
    for processing in [Processing::MrcMfp, Processing::MmseRzf] {
        config.processing = processing;
        for (scheme, r) in compare_schemes(&config, &[Scheme::CfDtddGreedy, Scheme::CfTdd])? {
            let p = &r.points[0];
            println!(
                "{processing:?} {:<15} median {:.3}  90%-likely {:.3}",
                scheme.label(),
                p.sum_se.median,
                p.sum_se.likely_90
            );
        }
    }
    Ok(())
}
