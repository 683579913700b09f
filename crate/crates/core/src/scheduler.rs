//! AP mode selection.
//!
//! The search objective is the high-SINR lower bound
//! `Σ_k 2 log2(Σ_{m∈S_k} G_mk / Σ_{m∈S_k} I_mk)`, where `S_k` is `A_u` for
//! UL UEs and `A_d` for DL UEs. The power coefficients κ depend only on the
//! DL demand set, so the per-(AP, UE) terms are fixed for a whole search.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{kappa_all_aps, sum_se_unchecked, ApMode, Scenario, Schedule};
use crate::{Error, Result};

pub const DEFAULT_SINR_FLOOR: f64 = 1e-9;
pub const DEFAULT_SINR_CAP: f64 = 1e9;
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyObjectiveTerms {
    pub g_u: DMatrix<f64>,
    pub i_u: DMatrix<f64>,
    pub g_d: DMatrix<f64>,
    pub i_d: DMatrix<f64>,
    pub sinr_floor: f64,
    pub sinr_cap: f64,
    pub ue_modes: Vec<ApMode>,
}

/// Builds the gain and pilot-contamination terms for the given UE demands.
///
/// Interference sums run over pilot sharers with the same direction as the
/// UE; sharers of the other direction send no data on that link.
pub fn objective_terms(scn: &Scenario, ue_modes: &[ApMode]) -> GreedyObjectiveTerms {
    let (m, k) = (scn.num_aps(), scn.num_ues());
    let kappa = kappa_all_aps(&scn.stats, ue_modes, scn.geometry.antennas_per_ap);
    let a2 = &scn.stats.alpha_sq;
    let beta = &scn.geometry.beta;
    let ep = &scn.pilot.pilot_power;
    let e_u = &scn.powers.ul_data_power;
    let e_d = &scn.powers.dl_ap_power;
    let cross = |ap: usize, n: usize, q: usize| (ep[n] / ep[q]).sqrt() * beta[(ap, n)] / beta[(ap, q)];

    let mut g_u = DMatrix::zeros(m, k);
    let mut i_u = DMatrix::zeros(m, k);
    let mut g_d = DMatrix::zeros(m, k);
    let mut i_d = DMatrix::zeros(m, k);
    for ap in 0..m {
        for ue in 0..k {
            match ue_modes[ue] {
                ApMode::Ul => {
                    g_u[(ap, ue)] = e_u[ue].sqrt() * a2[(ap, ue)];
                    i_u[(ap, ue)] = scn
                        .assignment
                        .co_pilot(ue)
                        .filter(|&n| ue_modes[n] == ApMode::Ul)
                        .map(|n| e_u[n].sqrt() * a2[(ap, ue)] * cross(ap, n, ue))
                        .sum();
                }
                ApMode::Dl => {
                    g_d[(ap, ue)] = kappa[(ap, ue)] * e_d[ap].sqrt() * a2[(ap, ue)];
                    i_d[(ap, ue)] = scn
                        .assignment
                        .co_pilot(ue)
                        .filter(|&q| ue_modes[q] == ApMode::Dl)
                        .map(|q| e_d[ap].sqrt() * kappa[(ap, q)] * a2[(ap, q)] * cross(ap, ue, q))
                        .sum();
                }
            }
        }
    }
    GreedyObjectiveTerms {
        g_u,
        i_u,
        g_d,
        i_d,
        sinr_floor: DEFAULT_SINR_FLOOR,
        sinr_cap: DEFAULT_SINR_CAP,
        ue_modes: ue_modes.to_vec(),
    }
}

impl GreedyObjectiveTerms {
    pub fn num_aps(&self) -> usize {
        self.g_u.nrows()
    }

    pub fn num_ues(&self) -> usize {
        self.g_u.ncols()
    }

    fn gain(&self, mode: ApMode) -> &DMatrix<f64> {
        match mode {
            ApMode::Ul => &self.g_u,
            ApMode::Dl => &self.g_d,
        }
    }

    fn interference(&self, mode: ApMode) -> &DMatrix<f64> {
        match mode {
            ApMode::Ul => &self.i_u,
            ApMode::Dl => &self.i_d,
        }
    }

    /// `2 log2` of the clamped per-UE ratio.
    fn ue_cost(&self, served: bool, g: f64, i: f64) -> f64 {
        let ratio = if !served || g <= 0.0 {
            self.sinr_floor
        } else if i <= 0.0 {
            self.sinr_cap
        } else {
            (g / i).clamp(self.sinr_floor, self.sinr_cap)
        };
        2.0 * ratio.log2()
    }

    /// Per-UE sums of gain and interference over each UE's serving set.
    fn sums(&self, ap_modes: &[Option<ApMode>]) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
        let k = self.num_ues();
        let mut g = vec![0.0; k];
        let mut i = vec![0.0; k];
        let mut served = vec![false; k];
        for (ap, mode) in ap_modes.iter().enumerate() {
            let Some(mode) = *mode else { continue };
            for ue in 0..k {
                if self.ue_modes[ue] == mode {
                    g[ue] += self.gain(mode)[(ap, ue)];
                    i[ue] += self.interference(mode)[(ap, ue)];
                    served[ue] = true;
                }
            }
        }
        (g, i, served)
    }

    /// Per-UE unclamped ratios; `None` for UEs without a serving AP.
    pub fn ratios(&self, ap_modes: &[Option<ApMode>]) -> Vec<Option<f64>> {
        let (g, i, served) = self.sums(ap_modes);
        (0..self.num_ues()).map(|k| served[k].then(|| g[k] / i[k])).collect()
    }
}

/// Clamped log-domain objective of a partial or complete schedule.
pub fn lower_bound_cost(schedule: &Schedule, terms: &GreedyObjectiveTerms) -> f64 {
    let (g, i, served) = terms.sums(&schedule.ap_modes);
    (0..terms.num_ues()).map(|k| terms.ue_cost(served[k], g[k], i[k])).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSearchResult {
    pub schedule: Schedule,
    pub objective_value: f64,
    pub evaluations: usize,
    /// Objective after each commit (greedy only).
    #[serde(default)]
    pub trace: Vec<f64>,
}

/// Adds one AP per step in the mode and position that maximise the full
/// schedule's objective; UL wins ties, lower AP index wins ties.
pub fn greedy_schedule(terms: &GreedyObjectiveTerms) -> Result<ScheduleSearchResult> {
    let m = terms.num_aps();
    let k = terms.num_ues();
    if m == 0 {
        return Err(Error::InvalidSchedule("empty AP set".into()));
    }
    let mut modes: Vec<Option<ApMode>> = vec![None; m];
    let mut g = vec![0.0; k];
    let mut i = vec![0.0; k];
    let mut ue_cost: Vec<f64> = (0..k).map(|_| terms.ue_cost(false, 0.0, 0.0)).collect();
    let mut total: f64 = ue_cost.iter().sum();
    let mut evaluations = 0;
    let mut trace = Vec::with_capacity(m);

    // A mode nobody demands serves nobody; it is only offered when the other
    // direction has no demand either.
    let candidates: Vec<ApMode> = [ApMode::Ul, ApMode::Dl]
        .into_iter()
        .filter(|&mode| terms.ue_modes.contains(&mode))
        .collect();
    let candidates = if candidates.is_empty() {
        vec![ApMode::Ul]
    } else {
        candidates
    };

    for _ in 0..m {
        let mut best: Option<(f64, usize, ApMode)> = None;
        for &mode in &candidates {
            let gain = terms.gain(mode);
            let intf = terms.interference(mode);
            let mut best_mode: Option<(f64, usize)> = None;
            for ap in (0..m).filter(|&a| modes[a].is_none()) {
                evaluations += 1;
                let mut value = total;
                for ue in (0..k).filter(|&q| terms.ue_modes[q] == mode) {
                    value += terms.ue_cost(true, g[ue] + gain[(ap, ue)], i[ue] + intf[(ap, ue)]) - ue_cost[ue];
                }
                if best_mode.is_none_or(|(v, _)| value > v) {
                    best_mode = Some((value, ap));
                }
            }
            if let Some((v, ap)) = best_mode {
                // UL is evaluated first, so a DL candidate must be strictly better.
                if best.is_none_or(|(bv, _, _)| v > bv) {
                    best = Some((v, ap, mode));
                }
            }
        }
        let (_, ap, mode) = best.expect("an unscheduled AP remains");
        modes[ap] = Some(mode);
        for ue in (0..k).filter(|&q| terms.ue_modes[q] == mode) {
            g[ue] += terms.gain(mode)[(ap, ue)];
            i[ue] += terms.interference(mode)[(ap, ue)];
            ue_cost[ue] = terms.ue_cost(true, g[ue], i[ue]);
        }
        total = ue_cost.iter().sum();
        trace.push(total);
    }
    let schedule = Schedule::new(modes, terms.ue_modes.clone());
    Ok(ScheduleSearchResult {
        objective_value: lower_bound_cost(&schedule, terms),
        schedule,
        evaluations,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMetric {
    LowerBound,
    TrueSumSe,
}

/// Schedule for bit pattern `mask`: bit `m` set means AP `m` is DL.
pub fn schedule_from_mask(mask: u64, num_aps: usize, ue_modes: &[ApMode]) -> Schedule {
    let modes = (0..num_aps)
        .map(|m| Some(if mask >> m & 1 == 1 { ApMode::Dl } else { ApMode::Ul }))
        .collect();
    Schedule::new(modes, ue_modes.to_vec())
}

/// Evaluates all `2^M` complete schedules; the lowest mask wins ties.
pub fn exhaustive_schedule(
    scn: &Scenario,
    terms: &GreedyObjectiveTerms,
    metric: SearchMetric,
    cap: usize,
) -> Result<ScheduleSearchResult> {
    let m = scn.num_aps();
    if m > cap || m >= 63 {
        return Err(Error::SearchTooLarge { aps: m, cap });
    }
    let count = 1u64 << m;
    let eval = |mask: u64| {
        let s = schedule_from_mask(mask, m, &terms.ue_modes);
        match metric {
            SearchMetric::LowerBound => lower_bound_cost(&s, terms),
            SearchMetric::TrueSumSe => sum_se_unchecked(scn, &s).sum_se,
        }
    };
    let (value, mask) = (0..count).into_par_iter().map(|mask| (eval(mask), mask)).reduce(
        || (f64::NEG_INFINITY, u64::MAX),
        |a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        },
    );
    Ok(ScheduleSearchResult {
        schedule: schedule_from_mask(mask, m, &terms.ue_modes),
        objective_value: value,
        evaluations: count as usize,
        trace: Vec::new(),
    })
}

/// Unclamped product of per-UE ratios; `None` when any UE is unserved or
/// any ratio is zero or non-finite (the cases the clamp exists for).
pub fn product_sinr(terms: &GreedyObjectiveTerms, ap_modes: &[Option<ApMode>]) -> Option<f64> {
    let mut f = 1.0;
    for r in terms.ratios(ap_modes) {
        let r = r?;
        if !(r.is_finite() && r > 0.0) {
            return None;
        }
        f *= r;
    }
    f.is_finite().then_some(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditViolation {
    pub kind: String,
    pub small_set: Vec<Option<ApMode>>,
    pub large_set: Vec<Option<ApMode>>,
    pub added_ap: usize,
    pub added_mode: ApMode,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub trials: usize,
    /// Trials where every evaluated set had finite, positive ratios.
    pub checked: usize,
    /// Trials skipped because an evaluation would need the clamp.
    pub skipped_clamped: usize,
    pub submodularity_violations: usize,
    pub monotonicity_violations: usize,
    /// First few violations, for inspection.
    pub examples: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn merge(&mut self, other: AuditReport) {
        self.trials += other.trials;
        self.checked += other.checked;
        self.skipped_clamped += other.skipped_clamped;
        self.submodularity_violations += other.submodularity_violations;
        self.monotonicity_violations += other.monotonicity_violations;
        let room = 8usize.saturating_sub(self.examples.len());
        self.examples.extend(other.examples.into_iter().take(room));
    }
}

const AUDIT_TOL: f64 = 1e-9;

/// Samples nested schedules `A_s ⊆ A_t` (modes included) and an AP `j ∉ A_t`
/// with a random mode, then checks diminishing returns and monotonicity of
/// the product of per-UE ratios.
pub fn submodularity_audit<R: Rng + ?Sized>(terms: &GreedyObjectiveTerms, trials: usize, rng: &mut R) -> AuditReport {
    let m = terms.num_aps();
    let mut report = AuditReport {
        trials,
        ..Default::default()
    };
    // The small set always holds one AP per demanded direction so that every
    // UE is served in all four evaluated sets.
    let needed: Vec<ApMode> = [ApMode::Ul, ApMode::Dl]
        .into_iter()
        .filter(|d| terms.ue_modes.contains(d))
        .collect();
    if m < needed.len() + 1 {
        report.skipped_clamped = trials;
        return report;
    }
    let mut order: Vec<usize> = (0..m).collect();
    for _ in 0..trials {
        order.shuffle(rng);
        let j = order[0];
        let mode_j = if rng.random::<bool>() { ApMode::Ul } else { ApMode::Dl };
        let t_size = rng.random_range(needed.len()..m);
        let s_size = rng.random_range(needed.len()..=t_size);
        let mut small = vec![None; m];
        let mut large = vec![None; m];
        for (pos, &ap) in order[1..=t_size].iter().enumerate() {
            let mode = Some(match needed.get(pos) {
                Some(&d) => d,
                None if rng.random::<bool>() => ApMode::Ul,
                None => ApMode::Dl,
            });
            large[ap] = mode;
            if pos < s_size {
                small[ap] = mode;
            }
        }
        let mut small_j = small.clone();
        small_j[j] = Some(mode_j);
        let mut large_j = large.clone();
        large_j[j] = Some(mode_j);

        let vals = [&small, &small_j, &large, &large_j].map(|s| product_sinr(terms, s));
        let [Some(fs), Some(fsj), Some(ft), Some(ftj)] = vals else {
            report.skipped_clamped += 1;
            continue;
        };
        report.checked += 1;
        let scale = fs.abs().max(fsj.abs()).max(ft.abs()).max(ftj.abs());
        let (ds, dt) = (fsj - fs, ftj - ft);
        let record = |kind: &str, lhs: f64, rhs: f64, report: &mut AuditReport| {
            if report.examples.len() < 8 {
                report.examples.push(AuditViolation {
                    kind: kind.into(),
                    small_set: small.clone(),
                    large_set: large.clone(),
                    added_ap: j,
                    added_mode: mode_j,
                    lhs,
                    rhs,
                });
            }
        };
        if ds < dt - AUDIT_TOL * scale {
            report.submodularity_violations += 1;
            record("submodularity", ds, dt, &mut report);
        }
        if fsj < fs - AUDIT_TOL * scale || ftj < ft - AUDIT_TOL * scale {
            report.monotonicity_violations += 1;
            record("monotonicity", fsj.min(ftj), fs.max(ft), &mut report);
        }
    }
    report
}
