//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`. The process exits non-zero when
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use cfdtdd::closed_form;
use cfdtdd::geometry::{build_geometry, NetworkConfig};
use cfdtdd::harness::{
    cell_free_scenario, compare_schemes, csv_string, median, run_campaign, Allocation, CampaignResult,
    ExperimentConfig, Processing, Scheme, Sweep, SweepParameter,
};
use cfdtdd::pilots::{iterative_allocation, random_assignment};
use cfdtdd::rng::{stream, Stream};
use cfdtdd::scheduler::{
    exhaustive_schedule, greedy_schedule, lower_bound_cost, objective_terms, submodularity_audit, AuditReport,
    SearchMetric,
};
use cfdtdd::validation::{standard_fixtures, validate_cell_free};
use cfdtdd::{PilotAssignment, PilotConfig, PowerConfig, Scenario, Schedule};

const SEED: u64 = 2024;

/// Desk-scale network: 16 APs with 4 antennas, 16 UEs, 300 m square.
fn desk_config(area: f64, snr_db: f64, num_aps: usize, num_ues: usize, tau_p: usize, drops: usize) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        r#"
scheme = "cf_dtdd_greedy"
demand = 0.5
drops = {drops}
seed = {SEED}

[network]
area_side_m = {area}
num_aps = {num_aps}
antennas_per_ap = 4
num_ues = {num_ues}
cli_residual_db = -20.0

[pilot]
tau = 200
tau_p = {tau_p}

[powers]
ul_snr_db = {snr_db}
dl_snr_db = {snr_db}
"#
    ))
    .expect("acceptance config parses")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn closed_form_validation() -> Outcome {
    let fixtures = standard_fixtures(5, SEED).unwrap();
    let mut worst: f64 = 0.0;
    let mut shared = 0;
    let mut cli = (false, false);
    for (i, (scn, schedule)) in fixtures.iter().enumerate() {
        if scn.assignment.groups().iter().any(|g| g.len() > 1) {
            shared += 1;
        }
        cli.0 |= !schedule.ap_ul().is_empty() && !schedule.ap_dl().is_empty();
        cli.1 |= !schedule.ue_ul().is_empty() && !schedule.ue_dl().is_empty();
        let r = validate_cell_free(scn, schedule, 100_000, SEED + i as u64).unwrap();
        worst = worst.max(r.max_relative_error());
    }
    outcome(
        worst <= 0.02 && shared == fixtures.len() && cli.0 && cli.1,
        format!(
            "{} fixtures, {shared} with pilot sharing, AP-AP CLI {} UE-UE CLI {}, max relative error {:.4} (tol 0.02)",
            fixtures.len(),
            cli.0,
            cli.1,
            worst
        ),
    )
}

fn greedy_instance(i: u64) -> Scenario {
    let mut rng = stream(SEED, i, Stream::Geometry);
    let m = rng.random_range(4..=10);
    let k = 8;
    let net = NetworkConfig::new(300.0, m, 4, k).with_cli_db(Some(-20.0));
    let g = build_geometry(&net, &mut rng).unwrap();
    let pilot = PilotConfig::uniform(200, 4, k, 100.0);
    let a = random_assignment(k, 4, &mut rng).unwrap();
    Scenario::new(g, pilot, a, PowerConfig::from_snr_db(m, k, 10.0, 10.0, 1.0)).unwrap()
}

fn greedy_optimality() -> Outcome {
    let n = 100;
    let bound = 1.0 - (-1.0f64).exp();
    let mut lb_ok = 0;
    let mut close = 0;
    let mut ratios = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let scn = greedy_instance(i);
        let modes = Schedule::ue_demand(scn.num_ues(), 0.5);
        let terms = objective_terms(&scn, &modes);
        let greedy = greedy_schedule(&terms).unwrap();
        let best_lb = exhaustive_schedule(&scn, &terms, SearchMetric::LowerBound, 16).unwrap();
        let best = exhaustive_schedule(&scn, &terms, SearchMetric::TrueSumSe, 16).unwrap();
        if lower_bound_cost(&greedy.schedule, &terms) >= bound * best_lb.objective_value - 1e-9 {
            lb_ok += 1;
        }
        let ratio = closed_form::sum_se(&scn, &greedy.schedule).unwrap().sum_se / best.objective_value;
        ratios.push(ratio);
        if ratio >= 0.98 {
            close += 1;
        }
    }
    outcome(
        lb_ok == n && close * 100 >= 95 * n,
        format!(
            "{n} instances: lower bound within (1-1/e) on {lb_ok}, true sum SE within 2% on {close} (need 95), median ratio {:.3}",
            median(&ratios).unwrap()
        ),
    )
}

/// UL UEs 0..4 and DL UEs 4..8 on two pilots, so every UE has a pilot
/// sharer of its own direction and no ratio needs the clamp.
fn shared_pilot_instance(i: u64) -> Scenario {
    let mut rng = stream(SEED, 1000 + i, Stream::Geometry);
    let m = rng.random_range(4..=8);
    let k = 8;
    let net = NetworkConfig::new(300.0, m, 4, k).with_cli_db(Some(-20.0));
    let g = build_geometry(&net, &mut rng).unwrap();
    let pilot = PilotConfig::uniform(200, 2, k, 100.0);
    let a = PilotAssignment::from_pilot_indices((0..k).map(|u| u % 2).collect(), 2).unwrap();
    Scenario::new(g, pilot, a, PowerConfig::from_snr_db(m, k, 10.0, 10.0, 1.0)).unwrap()
}

fn submodularity() -> Outcome {
    let mut total = AuditReport::default();
    let mut i = 0;
    while total.checked < 10_000 {
        let scn = shared_pilot_instance(i);
        let terms = objective_terms(&scn, &Schedule::ue_demand(scn.num_ues(), 0.5));
        total.merge(submodularity_audit(
            &terms,
            1000,
            &mut stream(SEED, i, Stream::Channels),
        ));
        i += 1;
    }
    outcome(
        total.submodularity_violations == 0,
        format!(
            "{} instances, {} checks ({} skipped): {} submodularity and {} monotonicity violations",
            i, total.checked, total.skipped_clamped, total.submodularity_violations, total.monotonicity_violations
        ),
    )
}

fn pilot_allocation() -> Outcome {
    let mut c = desk_config(300.0, 10.0, 16, 20, 5, 100);
    c.pilot.allocation = Allocation::Random;
    let mut strict = 0;
    let mut non_decreasing = 0;
    for d in 0..c.drops {
        let scn = cell_free_scenario(&c, d).unwrap();
        let r = iterative_allocation(&scn.geometry, &scn.pilot, &scn.assignment, &c.pilot.alloc_params()).unwrap();
        if r.final_min_alpha() > r.initial_min_alpha() {
            strict += 1;
        }
        if r.final_min_alpha() >= r.initial_min_alpha() {
            non_decreasing += 1;
        }
    }
    let med = |a: Allocation| {
        let mut cc = c.clone();
        cc.pilot.allocation = a;
        run_campaign(&cc).unwrap().points[0].sum_se.median
    };
    let (iterative, random, cellular) = (
        med(Allocation::Iterative),
        med(Allocation::Random),
        med(Allocation::Cellular),
    );
    outcome(
        non_decreasing == c.drops && iterative > random && iterative > cellular,
        format!(
            "{} instances: min-alpha strictly improved on {strict}, non-decreasing on {non_decreasing}; median sum SE iterative {iterative:.3} random {random:.3} cell-based {cellular:.3}",
            c.drops
        ),
    )
}

fn scheme_ordering() -> Outcome {
    let mut c = desk_config(300.0, 10.0, 16, 16, 8, 200);
    c.cellular.num_cells = 4;
    let r = compare_schemes(&c, &[Scheme::CfDtddGreedy, Scheme::CfTdd, Scheme::CellularTdd]).unwrap();
    let med: Vec<f64> = r.iter().map(|(_, r)| r.points[0].sum_se.median).collect();
    let (dtdd, tdd, cell) = (med[0], med[1], med[2]);
    outcome(
        dtdd >= 1.3 * tdd && dtdd >= 1.3 * cell,
        format!(
            "median sum SE: DTDD-CF {dtdd:.3}, TDD-CF {tdd:.3} (+{:.0}%), cellular TDD {cell:.3} (+{:.0}%)",
            100.0 * (dtdd / tdd - 1.0),
            100.0 * (dtdd / cell - 1.0)
        ),
    )
}

fn mmse_rzf() -> Outcome {
    let mut c = desk_config(1000.0, 60.0, 8, 8, 4, 40);
    let mrc = run_campaign(&c).unwrap();
    c.processing = Processing::MmseRzf;
    let mmse = run_campaign(&c).unwrap();
    let ratios: Vec<f64> = mrc.points[0]
        .drops
        .iter()
        .zip(&mmse.points[0].drops)
        .map(|(a, b)| b.sum_se / a.sum_se)
        .collect();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let med = median(&ratios).unwrap();
    outcome(
        min > 1.0 && med >= 1.2,
        format!(
            "{} paired drops: MMSE-RZF / MRC-MFP sum SE min {min:.3}, median {med:.3}",
            ratios.len()
        ),
    )
}

fn cli_sweep(scheme: Scheme) -> CampaignResult {
    let mut c = desk_config(2000.0, 60.0, 16, 16, 8, 200);
    c.scheme = scheme;
    c.sweep = Some(Sweep {
        parameter: SweepParameter::CliDb,
        values: vec![-70.0, -60.0, -50.0, -40.0, -30.0, -20.0, -10.0, 0.0],
    });
    run_campaign(&c).unwrap()
}

fn fd_fragility() -> Outcome {
    let ul = |r: &CampaignResult| r.points.iter().map(|p| p.ul_se.mean).collect::<Vec<_>>();
    let fd = ul(&cli_sweep(Scheme::CellularFd));
    let cf = ul(&cli_sweep(Scheme::CfDtddGreedy));
    let monotone = fd.windows(2).all(|w| w[1] <= w[0]);
    let fd_left = fd[fd.len() - 1] / fd[0];
    let cf_left = cf[cf.len() - 1] / cf[0];
    outcome(
        monotone && fd_left < 0.1 && cf_left > fd_left,
        format!(
            "UL sum SE -70 dB -> 0 dB: FD cellular {:.3} -> {:.3} ({:.1}% left, monotone {monotone}), DTDD-CF {:.3} -> {:.3} ({:.1}% left)",
            fd[0],
            fd[fd.len() - 1],
            100.0 * fd_left,
            cf[0],
            cf[cf.len() - 1],
            100.0 * cf_left
        ),
    )
}

/// Whether `p` is dominated by a time-sharing combination of two region
/// points.
fn in_region(region: &[(f64, f64)], p: (f64, f64)) -> bool {
    let tol = 1e-12;
    region.iter().any(|&a| {
        region.iter().any(|&b| {
            // t a + (1 - t) b >= p componentwise for some t in [0, 1].
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for (ai, bi, pi) in [(a.0, b.0, p.0), (a.1, b.1, p.1)] {
                let slope = ai - bi;
                let need = pi - bi;
                if slope.abs() < tol {
                    if need > tol {
                        return false;
                    }
                } else if slope > 0.0 {
                    lo = lo.max(need / slope);
                } else {
                    hi = hi.min(need / slope);
                }
            }
            lo <= hi + tol
        })
    })
}

fn rate_region() -> Outcome {
    let fractions = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    let region = |scheme: Scheme| {
        let mut c = desk_config(300.0, 10.0, 16, 16, 8, 100);
        c.scheme = scheme;
        c.sweep = Some(Sweep {
            parameter: SweepParameter::UlFraction,
            values: fractions.clone(),
        });
        run_campaign(&c)
            .unwrap()
            .points
            .iter()
            .map(|p| (p.ul_se.likely_90, p.dl_se.likely_90))
            .collect::<Vec<_>>()
    };
    let well_formed = |r: &[(f64, f64)]| {
        let last = r.len() - 1;
        r.iter().all(|p| p.0 <= r[last].0) && r.iter().all(|p| p.1 <= r[0].1)
    };
    let cf = region(Scheme::CfDtddGreedy);
    let fd = region(Scheme::CellularFd);
    let dominates = fd.iter().all(|&p| in_region(&cf, p));
    let fmt = |r: &[(f64, f64)]| {
        r.iter()
            .map(|p| format!("({:.2},{:.2})", p.0, p.1))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        well_formed(&cf) && well_formed(&fd) && dominates,
        format!(
            "90%-likely (UL, DL): DTDD-CF {} | FD cellular {} | DTDD-CF region contains FD {dominates}",
            fmt(&cf),
            fmt(&fd)
        ),
    )
}

fn determinism() -> Outcome {
    let mut c = desk_config(300.0, 10.0, 16, 16, 8, 20);
    c.sweep = Some(Sweep {
        parameter: SweepParameter::SnrDb,
        values: vec![0.0, 10.0],
    });
    let a = csv_string(&run_campaign(&c).unwrap()).unwrap();
    let b = csv_string(&run_campaign(&c).unwrap()).unwrap();
    let mut mc = desk_config(300.0, 10.0, 8, 8, 4, 6);
    mc.processing = Processing::MmseRzf;
    let x = csv_string(&run_campaign(&mc).unwrap()).unwrap();
    let y = csv_string(&run_campaign(&mc).unwrap()).unwrap();
    outcome(
        a == b && x == y,
        format!(
            "{} + {} CSV rows re-run bit-identical: {}",
            a.lines().count() - 1,
            x.lines().count() - 1,
            a == b && x == y
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("closed-form validation", closed_form_validation),
        ("greedy optimality", greedy_optimality),
        ("submodularity audit", submodularity),
        ("pilot allocation", pilot_allocation),
        ("scheme ordering", scheme_ordering),
        ("MMSE/RZF vs MRC/MFP", mmse_rzf),
        ("FD fragility", fd_fragility),
        ("rate region", rate_region),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({:.1}s) {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
