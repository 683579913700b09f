//! Closed-form MRC/MFP SINRs and the sum SE of a hand-picked DTDD schedule.
//!
//! cargo run --example closed_form_se

use cfdtdd::closed_form::{dl_sinr_mfp, sum_se, tdd_sum_se, ul_sinr_mrc};
use cfdtdd::estimation::PilotAssignment;
use cfdtdd::geometry::NetworkGeometry;
use cfdtdd::{NetworkConfig, PilotConfig, PowerConfig, Scenario, Schedule};

fn main() -> cfdtdd::Result<()> {
    let config = NetworkConfig::new(200.0, 4, 4, 4).with_cli_db(Some(-20.0));
    let aps = vec![[50.0, 50.0], [150.0, 50.0], [50.0, 150.0], [150.0, 150.0]];
    let ues = vec![[40.0, 70.0], [160.0, 30.0], [60.0, 140.0], [130.0, 170.0]];
    let g = NetworkGeometry::from_positions(&config, aps, ues)?;
    let pilot = PilotConfig::uniform(200, 2, 4, 100.0);
    let assignment = PilotAssignment::from_pilot_indices(vec![0, 1, 1, 0], 2)?;
    let scn = Scenario::new(g, pilot, assignment, PowerConfig::from_snr_db(4, 4, 20.0, 20.0, 1.0))?;

    // UEs 0 and 1 want UL, 2 and 3 want DL; the two lower APs listen.
    let schedule = Schedule::from_sets(4, 4, &[0, 1], &[2, 3], &[0, 1])?;
    for k in schedule.ue_ul() {
        println!("UL UE {k}: SINR {:.3}", ul_sinr_mrc(&scn, &schedule, k));
    }
    for n in schedule.ue_dl() {
        println!("DL UE {n}: SINR {:.3}", dl_sinr_mfp(&scn, &schedule, n));
    }
    let dtdd = sum_se(&scn, &schedule)?;
    let tdd = tdd_sum_se(&scn, &schedule.ue_modes)?;
    println!(
        "DTDD sum SE {:.3} (UL {:.3}, DL {:.3})",
        dtdd.sum_se,
        dtdd.ul_sum(),
        dtdd.dl_sum()
    );
    println!("TDD  sum SE {:.3}", tdd.sum_se);
    println!("{}", serde_json::to_string(&schedule).expect("schedule serialises"));
    Ok(())
}
