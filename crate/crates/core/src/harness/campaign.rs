//! Drops and campaigns.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Allocation, ExperimentConfig, Processing, Scheme, SweepParameter};
use super::stats::{Cdf, Summary};
use crate::cellular::{fd_cellular_sum_se, tdd_cellular_sum_se, CellularScenario};
use crate::closed_form::{sum_se, tdd_sum_se, ApMode, PowerConfig, Scenario, Schedule, SeReport};
use crate::estimation::PilotConfig;
use crate::geometry::{build_geometry, NetworkGeometry};
use crate::montecarlo::{mc_sum_se, mc_tdd_sum_se, Combining, Precoding};
use crate::pilots::{cellular_assignment, iterative_allocation, random_assignment};
use crate::rng::{stream, Stream};
use crate::scheduler::{exhaustive_schedule, greedy_schedule, objective_terms};
use crate::{db_to_linear, Error, Result};

/// One evaluated UE drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropOutcome {
    pub drop: usize,
    pub sum_se: f64,
    /// Pre-log and time-share weighted UL part of `sum_se`.
    pub ul_se: f64,
    pub dl_se: f64,
    /// Objective evaluations spent by the scheduler (0 without one).
    pub evaluations: usize,
    /// AP modes chosen by a cell-free DTDD scheduler.
    #[serde(default)]
    pub ap_modes: Option<Vec<Option<ApMode>>>,
}

impl DropOutcome {
    fn new(drop: usize, report: &SeReport, evaluations: usize, ap_modes: Option<Vec<Option<ApMode>>>) -> Self {
        Self {
            drop,
            sum_se: report.sum_se,
            ul_se: report.ul_sum(),
            dl_se: report.dl_sum(),
            evaluations,
            ap_modes,
        }
    }
}

/// The cell-free scenario of a drop: geometry, pilot allocation and powers.
pub fn cell_free_scenario(config: &ExperimentConfig, drop: usize) -> Result<Scenario> {
    let geometry = drop_geometry(config, drop)?;
    let k = config.network.num_ues;
    let p = &config.pilot;
    let power = db_to_linear(p.pilot_snr_db) * config.network.noise_power;
    let mut rng = stream(config.seed, drop as u64, Stream::Pilots);
    let (pilot, assignment) = match p.allocation {
        Allocation::Random => (
            PilotConfig::uniform(p.tau, p.tau_p, k, power),
            random_assignment(k, p.tau_p, &mut rng)?,
        ),
        Allocation::Iterative => {
            let pilot = PilotConfig::uniform(p.tau, p.tau_p, k, power);
            let initial = random_assignment(k, p.tau_p, &mut rng)?;
            let a = iterative_allocation(&geometry, &pilot, &initial, &p.alloc_params())?.assignment;
            (pilot, a)
        }
        Allocation::Cellular => {
            let cp = cellular_assignment(&geometry, p.tau_p, p.cells)?;
            if cp.effective_tau_p >= p.tau {
                return Err(Error::config(
                    "pilot.tau",
                    "too short for the largest cell's pilot length",
                ));
            }
            (PilotConfig::uniform(p.tau, cp.effective_tau_p, k, power), cp.assignment)
        }
    };
    let powers = PowerConfig::from_snr_db(
        config.network.num_aps,
        k,
        config.powers.ul_snr_db,
        config.powers.dl_snr_db,
        config.network.noise_power,
    );
    Scenario::new(geometry, pilot, assignment, powers)
}

/// The cellular scenario of a drop, sharing the UE positions of the
/// cell-free one.
pub fn cellular_scenario(config: &ExperimentConfig, drop: usize) -> Result<CellularScenario> {
    let geometry = drop_geometry(config, drop)?;
    let cells = config.cellular.num_cells;
    let k = config.network.num_ues;
    let powers = PowerConfig::from_snr_db(
        cells,
        k,
        config.powers.ul_snr_db,
        config.powers.dl_snr_db,
        config.network.noise_power,
    );
    CellularScenario::new(
        &config.network,
        cells,
        config.antennas_per_bs(),
        geometry.ue_positions,
        config.pilot.tau,
        config.pilot.tau_p,
        db_to_linear(config.pilot.pilot_snr_db) * config.network.noise_power,
        powers,
    )
}

fn drop_geometry(config: &ExperimentConfig, drop: usize) -> Result<NetworkGeometry> {
    build_geometry(&config.network, &mut stream(config.seed, drop as u64, Stream::Geometry))
}

fn evaluate(config: &ExperimentConfig, scn: &Scenario, schedule: &Schedule, drop: usize) -> Result<SeReport> {
    match config.processing {
        Processing::MrcMfp => sum_se(scn, schedule),
        Processing::MmseRzf => {
            let mut rng = stream(config.seed, drop as u64, Stream::Channels);
            mc_sum_se(
                scn,
                schedule,
                &config.montecarlo,
                Combining::Mmse,
                Precoding::Rzf,
                &mut rng,
            )
        }
    }
}

fn run_drop_inner(config: &ExperimentConfig, drop: usize) -> Result<DropOutcome> {
    let ue_modes = Schedule::ue_demand(config.network.num_ues, config.demand);
    match config.scheme {
        Scheme::CfDtddGreedy | Scheme::CfDtddExhaustive => {
            let scn = cell_free_scenario(config, drop)?;
            let terms = objective_terms(&scn, &ue_modes);
            let found = if config.scheme == Scheme::CfDtddGreedy {
                greedy_schedule(&terms)?
            } else {
                exhaustive_schedule(
                    &scn,
                    &terms,
                    config.scheduler.exhaustive_metric,
                    config.scheduler.exhaustive_cap,
                )?
            };
            let report = evaluate(config, &scn, &found.schedule, drop)?;
            Ok(DropOutcome::new(
                drop,
                &report,
                found.evaluations,
                Some(found.schedule.ap_modes),
            ))
        }
        Scheme::CfTdd => {
            let scn = cell_free_scenario(config, drop)?;
            let report = match config.processing {
                Processing::MrcMfp => tdd_sum_se(&scn, &ue_modes)?,
                Processing::MmseRzf => {
                    let mut rng = stream(config.seed, drop as u64, Stream::Channels);
                    mc_tdd_sum_se(
                        &scn,
                        &ue_modes,
                        &config.montecarlo,
                        Combining::Mmse,
                        Precoding::Rzf,
                        &mut rng,
                    )?
                }
            };
            Ok(DropOutcome::new(drop, &report, 0, None))
        }
        Scheme::CellularTdd | Scheme::CellularFd => {
            let scn = cellular_scenario(config, drop)?;
            let report = if config.scheme == Scheme::CellularFd {
                fd_cellular_sum_se(&scn, &ue_modes)?
            } else {
                tdd_cellular_sum_se(&scn, &ue_modes)?
            };
            Ok(DropOutcome::new(drop, &report, 0, None))
        }
    }
}

/// Evaluates one drop of a config without a sweep (see
/// [`ExperimentConfig::at_sweep_point`]).
pub fn run_drop(config: &ExperimentConfig, drop: usize) -> Result<DropOutcome> {
    run_drop_inner(config, drop).map_err(|e| Error::Drop {
        drop,
        source: Box::new(e),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPointResult {
    /// Sweep value, `None` for a single-point campaign.
    pub value: Option<f64>,
    pub drops: Vec<DropOutcome>,
    pub sum_se: Summary,
    pub ul_se: Summary,
    pub dl_se: Summary,
    pub cdf: Cdf,
}

impl SweepPointResult {
    fn from_drops(value: Option<f64>, drops: Vec<DropOutcome>) -> Result<Self> {
        let pick = |f: fn(&DropOutcome) -> f64| drops.iter().map(f).collect::<Vec<_>>();
        let sum = pick(|d| d.sum_se);
        Ok(Self {
            value,
            sum_se: Summary::of(&sum)?,
            ul_se: Summary::of(&pick(|d| d.ul_se))?,
            dl_se: Summary::of(&pick(|d| d.dl_se))?,
            cdf: Cdf::of(&sum),
            drops,
        })
    }

    pub fn sum_se_samples(&self) -> Vec<f64> {
        self.drops.iter().map(|d| d.sum_se).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: String,
    pub sweep_parameter: Option<SweepParameter>,
    pub points: Vec<SweepPointResult>,
    pub evaluations: usize,
    pub wall_clock_s: f64,
}

impl CampaignResult {
    pub fn num_rows(&self) -> usize {
        self.points.iter().map(|p| p.drops.len()).sum()
    }
}

/// Runs every drop at every sweep point. Drops run in parallel; results are
/// ordered by drop index and a failing drop aborts the campaign.
pub fn run_campaign(config: &ExperimentConfig) -> Result<CampaignResult> {
    config.validate()?;
    let start = Instant::now();
    let mut points = Vec::new();
    for point in config.sweep_points() {
        let c = config.at_sweep_point(point)?;
        let drops = (0..c.drops)
            .into_par_iter()
            .map(|d| run_drop(&c, d))
            .collect::<Result<Vec<_>>>()?;
        points.push(SweepPointResult::from_drops(point.map(|p| p.1), drops)?);
    }
    let evaluations = points.iter().flat_map(|p| &p.drops).map(|d| d.evaluations).sum();
    Ok(CampaignResult {
        config: config.clone(),
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        sweep_parameter: config.sweep.as_ref().map(|s| s.parameter),
        points,
        evaluations,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs the same campaign under several schemes; drops share UE positions,
/// pilots and channel streams across schemes.
pub fn compare_schemes(config: &ExperimentConfig, schemes: &[Scheme]) -> Result<Vec<(Scheme, CampaignResult)>> {
    schemes
        .iter()
        .map(|&s| {
            let mut c = config.clone();
            c.scheme = s;
            run_campaign(&c).map(|r| (s, r))
        })
        .collect()
}

/// Runs a campaign on a dedicated pool of `threads` workers.
pub fn run_campaign_with_threads(config: &ExperimentConfig, threads: usize) -> Result<CampaignResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| run_campaign(config))
}
