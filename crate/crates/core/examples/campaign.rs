//! A scheme comparison and an SNR sweep written to CSV and JSON.
//!
//! cargo run --release --example campaign -- [out_dir]

use std::path::PathBuf;

use cfdtdd::harness::{
    compare_schemes, emit_results, run_campaign, ExperimentConfig, OutputFormat, Scheme, Sweep, SweepParameter,
};

const CONFIG: &str = r#"
scheme = "cf_dtdd_greedy"
demand = 0.5
drops = 50
seed = 1

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
"#;

fn main() -> cfdtdd::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cfdtdd-campaign"));
    let mut config = ExperimentConfig::from_toml_str(CONFIG)?;

    println!("{:<20} {:>8} {:>10}", "scheme", "median", "90%-likely");
    for (scheme, r) in compare_schemes(
        &config,
        &Scheme::ALL
            .iter()
            .copied()
            .filter(|&s| s != Scheme::CfDtddExhaustive)
            .collect::<Vec<_>>(),
    )? {
        let s = &r.points[0].sum_se;
        println!("{:<20} {:>8.3} {:>10.3}", scheme.label(), s.median, s.likely_90);
    }

    config.sweep = Some(Sweep {
        parameter: SweepParameter::SnrDb,
        values: vec![0.0, 10.0, 20.0, 30.0],
    });
    let sweep = run_campaign(&config)?;
    for p in &sweep.points {
        println!(
            "snr {:>4} dB: median sum SE {:.3}",
            p.value.unwrap_or_default(),
            p.sum_se.median
        );
    }
    println!("wrote {}", emit_results(&sweep, OutputFormat::Csv, &out)?.display());
    println!("wrote {}", emit_results(&sweep, OutputFormat::Json, &out)?.display());
    Ok(())
}
