//! Greedy AP scheduling against brute force over all 2^M mode patterns.
//!
//! cargo run --release --example greedy_vs_exhaustive

use cfdtdd::closed_form::sum_se;
use cfdtdd::harness::{cell_free_scenario, ExperimentConfig};
use cfdtdd::scheduler::{exhaustive_schedule, greedy_schedule, lower_bound_cost, objective_terms, SearchMetric};
use cfdtdd::Schedule;

const CONFIG: &str = r#"
scheme = "cf_dtdd_greedy"
demand = 0.5
seed = 5

[network]
area_side_m = 300.0
num_aps = 8
antennas_per_ap = 4
num_ues = 8
cli_residual_db = -20.0

[pilot]
tau = 200
tau_p = 4

[powers]
ul_snr_db = 10.0
dl_snr_db = 10.0
"#;

fn main() -> cfdtdd::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    println!("drop  greedy SE  best SE  ratio  greedy LB  best LB  evals greedy/exhaustive");
    for drop in 0..5 {
        let scn = cell_free_scenario(&config, drop)?;
        let terms = objective_terms(&scn, &Schedule::ue_demand(scn.num_ues(), config.demand));
        let greedy = greedy_schedule(&terms)?;
        let best = exhaustive_schedule(&scn, &terms, SearchMetric::TrueSumSe, 16)?;
        let best_lb = exhaustive_schedule(&scn, &terms, SearchMetric::LowerBound, 16)?;
        let g_se = sum_se(&scn, &greedy.schedule)?.sum_se;
        println!(
            "{drop:>4} {g_se:>10.3} {:>8.3} {:>6.3} {:>10.2} {:>8.2} {:>6}/{}",
            best.objective_value,
            g_se / best.objective_value,
            lower_bound_cost(&greedy.schedule, &terms),
            best_lb.objective_value,
            greedy.evaluations,
            best.evaluations
        );
    }
    Ok(())
}
