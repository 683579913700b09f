//! Signal-level Monte-Carlo check of the closed-form MRC/MFP SINRs.
//!
//! cargo run --release --example validation -- [realizations]

use cfdtdd::validation::{standard_fixtures, validate_cell_free};

fn main() -> cfdtdd::Result<()> {
    let realizations = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    for (i, (scn, schedule)) in standard_fixtures(3, 1)?.iter().enumerate() {
        let r = validate_cell_free(scn, schedule, realizations, i as u64)?;
        println!(
            "fixture {i}: M={} N={} K={}, {realizations} draws",
            scn.num_aps(),
            scn.geometry.antennas_per_ap,
            scn.num_ues()
        );
        for c in &r.checks {
            println!(
                "  {:?} UE {}: closed form {:.4e}, Monte-Carlo {:.4e} ({:+.2}%)",
                c.direction,
                c.ue,
                c.closed_form,
                c.monte_carlo,
                100.0 * (c.monte_carlo / c.closed_form - 1.0)
            );
        }
    }
    Ok(())
}
