//! Greedy and exhaustive AP scheduling through the public API.

use proptest::prelude::*;
use rand::Rng;

use cfdtdd::closed_form::{sum_se, ApMode};
use cfdtdd::geometry::build_geometry;
use cfdtdd::pilots::random_assignment;
use cfdtdd::rng::seeded;
use cfdtdd::scheduler::{
    exhaustive_schedule, greedy_schedule, lower_bound_cost, objective_terms, schedule_from_mask, SearchMetric,
};
use cfdtdd::{NetworkConfig, PilotConfig, PowerConfig, Scenario, Schedule};

fn scenario(seed: u64, m: usize, k: usize, tau_p: usize) -> Scenario {
    let mut rng = seeded(seed);
    let config = NetworkConfig::new(300.0, m, 2, k).with_cli_db(Some(-20.0));
    let g = build_geometry(&config, &mut rng).unwrap();
    let a = random_assignment(k, tau_p, &mut rng).unwrap();
    Scenario::new(
        g,
        PilotConfig::uniform(200, tau_p, k, 100.0),
        a,
        PowerConfig::from_snr_db(m, k, 10.0, 10.0, 1.0),
    )
    .unwrap()
}

#[test]
fn exhaustive_true_se_is_an_upper_bound_for_greedy() {
    for seed in 0..20 {
        let scn = scenario(seed, 5, 6, 3);
        let terms = objective_terms(&scn, &Schedule::ue_demand(6, 0.5));
        let g = greedy_schedule(&terms).unwrap();
        let best = exhaustive_schedule(&scn, &terms, SearchMetric::TrueSumSe, 16).unwrap();
        let g_se = sum_se(&scn, &g.schedule).unwrap().sum_se;
        assert!(g_se <= best.objective_value + 1e-12);
        assert_eq!(best.evaluations, 32);
        let best_lb = exhaustive_schedule(&scn, &terms, SearchMetric::LowerBound, 16).unwrap();
        assert!(lower_bound_cost(&g.schedule, &terms) <= best_lb.objective_value + 1e-9);
    }
}

#[test]
fn exhaustive_matches_brute_force_over_masks() {
    let scn = scenario(4, 4, 4, 2);
    let modes = Schedule::ue_demand(4, 0.5);
    let terms = objective_terms(&scn, &modes);
    let brute = (0u64..16)
        .map(|mask| sum_se(&scn, &schedule_from_mask(mask, 4, &modes)).unwrap().sum_se)
        .fold(f64::NEG_INFINITY, f64::max);
    let best = exhaustive_schedule(&scn, &terms, SearchMetric::TrueSumSe, 16).unwrap();
    assert_eq!(best.objective_value, brute);
}

#[test]
fn exhaustive_refuses_large_networks() {
    let scn = scenario(1, 9, 4, 2);
    let terms = objective_terms(&scn, &Schedule::ue_demand(4, 0.5));
    assert!(exhaustive_schedule(&scn, &terms, SearchMetric::TrueSumSe, 8).is_err());
}

#[test]
fn schedules_serialise_as_mode_labels() {
    let s = Schedule::new(vec![Some(ApMode::Ul), Some(ApMode::Dl)], vec![ApMode::Dl]);
    let json = serde_json::to_string(&s).unwrap();
    assert_eq!(json, r#"{"ap_modes":["UL","DL"],"ue_modes":["DL"]}"#);
    assert_eq!(serde_json::from_str::<Schedule>(&json).unwrap(), s);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_schedules_every_ap_and_serves_demand(seed in 0u64..5000, ul in 0.0f64..=1.0) {
        let mut rng = seeded(seed);
        let m = rng.random_range(1..=8);
        let k = rng.random_range(1..=8);
        let scn = scenario(seed, m, k, rng.random_range(1..=k));
        let modes = Schedule::ue_demand(k, ul);
        let g = greedy_schedule(&objective_terms(&scn, &modes)).unwrap();
        prop_assert!(g.schedule.is_complete());
        prop_assert_eq!(g.trace.len(), m);
        for dir in [ApMode::Ul, ApMode::Dl] {
            if modes.contains(&dir) {
                prop_assert!(g.schedule.ap_in(dir).next().is_some() || m < 2);
            } else {
                prop_assert!(g.schedule.ap_in(dir).next().is_none());
            }
        }
    }
}
