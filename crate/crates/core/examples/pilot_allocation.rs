//! Random, cell-based and iterative min-alpha pilot assignments on one drop.
//!
//! cargo run --example pilot_allocation

use cfdtdd::geometry::build_geometry;
use cfdtdd::pilots::{cellular_assignment, iterative_allocation, nearest_alphas, random_assignment, PilotAllocParams};
use cfdtdd::rng::seeded;
use cfdtdd::{db_to_linear, NetworkConfig, PilotConfig};

fn main() -> cfdtdd::Result<()> {
    let (k, tau_p) = (20, 5);
    let config = NetworkConfig::new(300.0, 16, 4, k);
    let mut rng = seeded(11);
    let g = build_geometry(&config, &mut rng)?;
    let pilot = PilotConfig::uniform(200, tau_p, k, db_to_linear(20.0));

    let random = random_assignment(k, tau_p, &mut rng)?;
    let min = |a| nearest_alphas(&g, &pilot, a).into_iter().fold(f64::INFINITY, f64::min);
    println!("random        min alpha {:.3e}", min(&random));

    let cells = cellular_assignment(&g, tau_p, 4)?;
    let cell_pilot = PilotConfig::uniform(200, cells.effective_tau_p, k, pilot.pilot_power[0]);
    let cell_min = nearest_alphas(&g, &cell_pilot, &cells.assignment)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    println!(
        "cell-based    min alpha {cell_min:.3e} with {} pilots",
        cells.effective_tau_p
    );

    let it = iterative_allocation(&g, &pilot, &random, &PilotAllocParams::default())?;
    println!(
        "iterative     min alpha {:.3e} after {} moves (from {:.3e})",
        it.final_min_alpha(),
        it.moves(),
        it.initial_min_alpha()
    );
    for (p, group) in it.assignment.groups().iter().enumerate() {
        println!("  pilot {p}: UEs {group:?}");
    }
    Ok(())
}
