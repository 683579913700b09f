//! Drops UEs around a 3x3 AP grid and prints the large-scale picture.
//!
//! cargo run --example geometry_layout

use cfdtdd::geometry::build_geometry;
use cfdtdd::rng::seeded;
use cfdtdd::NetworkConfig;

fn main() -> cfdtdd::Result<()> {
    let config = NetworkConfig::new(300.0, 9, 4, 6).with_cli_db(Some(-20.0));
    let g = build_geometry(&config, &mut seeded(7))?;

    println!("APs on a grid:");
    for (m, p) in g.ap_positions.iter().enumerate() {
        println!("  AP {m}: ({:6.1}, {:6.1})", p[0], p[1]);
    }
    println!("UEs (nearest AP, beta to it in dB):");
    for (k, p) in g.ue_positions.iter().enumerate() {
        let m = g.nearest_ap(k);
        println!(
            "  UE {k}: ({:6.1}, {:6.1})  AP {m}  {:6.1} dB",
            p[0],
            p[1],
            10.0 * g.beta[(m, k)].log10()
        );
    }
    let strongest_cli = g.zeta.iter().cloned().fold(0.0, f64::max);
    let strongest_ue = g.epsilon.iter().cloned().fold(0.0, f64::max);
    println!(
        "strongest AP-AP CLI {:.1} dB, UE-UE CLI {:.1} dB",
        10.0 * strongest_cli.log10(),
        10.0 * strongest_ue.log10()
    );

    let json = g.to_json()?;
    println!("geometry serialises to {} bytes of JSON", json.len());
    Ok(())
}
