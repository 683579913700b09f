//! UL/DL rate region traced by sweeping the UL demand fraction.
//!
//! cargo run --release --example rate_region

use cfdtdd::harness::{run_campaign, ExperimentConfig, Scheme};

const CONFIG: &str = r#"
scheme = "cf_dtdd_greedy"
demand = 0.5
drops = 40
seed = 8

[network]
area_side_m = 300.0
num_aps = 16
antennas_per_ap = 4
num_ues = 16
cli_residual_db = -20.0

[pilot]
tau = 200
tau_p = 8

[powers]
ul_snr_db = 10.0
dl_snr_db = 10.0

[sweep]
parameter = "ul_fraction"
values = [0.0, 0.25, 0.5, 0.75, 1.0]
"#;

fn main() -> cfdtdd::Result<()> {
    let mut config = ExperimentConfig::from_toml_str(CONFIG)?;
    // The FD cells get the same total antenna count as the APs.
    for scheme in [Scheme::CfDtddGreedy, Scheme::CellularFd] {
        config.scheme = scheme;
        let r = run_campaign(&config)?;
        println!("{} (90%-likely UL, DL):", scheme.label());
        for p in &r.points {
            println!(
                "  UL fraction {:.2}: ({:.2}, {:.2})",
                p.value.unwrap_or_default(),
                p.ul_se.likely_90,
                p.dl_se.likely_90
            );
        }
    }
    Ok(())
}
