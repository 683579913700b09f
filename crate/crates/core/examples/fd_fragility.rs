//! UL sum SE of FD cellular and DTDD cell-free as residual inter-node CLI
//! grows from -70 dB to 0 dB.
//!
//! cargo run --release --example fd_fragility

use cfdtdd::harness::{run_campaign, ExperimentConfig, Scheme, Sweep, SweepParameter};

const CONFIG: &str = r#"
scheme = "cellular_fd"
demand = 0.5
drops = 30
seed = 4

[network]
area_side_m = 2000.0
num_aps = 16
antennas_per_ap = 4
num_ues = 16
cli_residual_db = -20.0

[pilot]
tau = 200
tau_p = 8

[powers]
ul_snr_db = 60.0
dl_snr_db = 60.0
"#;

fn main() -> cfdtdd::Result<()> {
    let mut config = ExperimentConfig::from_toml_str(CONFIG)?;
    config.sweep = Some(Sweep {
        parameter: SweepParameter::CliDb,
        values: (0..=7).map(|i| -70.0 + 10.0 * i as f64).collect(),
    });
    let mut curves = Vec::new();
    for scheme in [Scheme::CellularFd, Scheme::CfDtddGreedy] {
        config.scheme = scheme;
        curves.push(run_campaign(&config)?);
    }
    println!("{:>8} {:>12} {:>12}", "CLI dB", "FD UL SE", "DTDD UL SE");
    for (fd, cf) in curves[0].points.iter().zip(&curves[1].points) {
        println!(
            "{:>8} {:>12.3} {:>12.3}",
            fd.value.unwrap_or_default(),
            fd.ul_se.mean,
            cf.ul_se.mean
        );
    }
    Ok(())
}
