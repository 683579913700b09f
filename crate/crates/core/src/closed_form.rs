//! Closed-form SINRs for MRC combining and matched-filter precoding in a
//! dynamic-TDD cell-free network, DL power coefficients and the sum SE.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::estimation::{estimation_stats, EstimationStats, PilotAssignment, PilotConfig};
use crate::geometry::NetworkGeometry;
use crate::{db_to_linear, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ApMode {
    #[serde(rename = "UL")]
    Ul,
    #[serde(rename = "DL")]
    Dl,
}

/// AP modes and UE demands.
///
/// Unscheduled APs (mode `None`) belong to neither `A_u` nor `A_d`, which is
/// how the greedy search represents partial schedules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub ap_modes: Vec<Option<ApMode>>,
    pub ue_modes: Vec<ApMode>,
}

impl Schedule {
    pub fn new(ap_modes: Vec<Option<ApMode>>, ue_modes: Vec<ApMode>) -> Self {
        Self { ap_modes, ue_modes }
    }

    pub fn unscheduled(num_aps: usize, ue_modes: Vec<ApMode>) -> Self {
        Self::new(vec![None; num_aps], ue_modes)
    }

    pub fn all(num_aps: usize, mode: ApMode, ue_modes: Vec<ApMode>) -> Self {
        Self::new(vec![Some(mode); num_aps], ue_modes)
    }

    /// Builds from index sets. Fails if the AP sets overlap or the UE sets do
    /// not partition `0..num_ues`.
    pub fn from_sets(
        num_aps: usize,
        num_ues: usize,
        ap_ul: &[usize],
        ap_dl: &[usize],
        ue_ul: &[usize],
    ) -> Result<Self> {
        let mut aps = vec![None; num_aps];
        for (set, mode) in [(ap_ul, ApMode::Ul), (ap_dl, ApMode::Dl)] {
            for &m in set {
                if m >= num_aps {
                    return Err(Error::InvalidSchedule(format!("AP {m} out of range")));
                }
                if aps[m].is_some() {
                    return Err(Error::InvalidSchedule(format!("AP {m} appears twice")));
                }
                aps[m] = Some(mode);
            }
        }
        let mut ues = vec![ApMode::Dl; num_ues];
        for &k in ue_ul {
            if k >= num_ues {
                return Err(Error::InvalidSchedule(format!("UE {k} out of range")));
            }
            ues[k] = ApMode::Ul;
        }
        Ok(Self::new(aps, ues))
    }

    /// First `round(fraction · K)` UEs demand UL, the rest DL.
    pub fn ue_demand(num_ues: usize, ul_fraction: f64) -> Vec<ApMode> {
        let n_ul = (ul_fraction * num_ues as f64).round() as usize;
        (0..num_ues)
            .map(|k| if k < n_ul { ApMode::Ul } else { ApMode::Dl })
            .collect()
    }

    pub fn num_aps(&self) -> usize {
        self.ap_modes.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ue_modes.len()
    }

    pub fn ap_in(&self, mode: ApMode) -> impl Iterator<Item = usize> + '_ {
        self.ap_modes
            .iter()
            .enumerate()
            .filter(move |(_, &m)| m == Some(mode))
            .map(|(i, _)| i)
    }

    pub fn ue_in(&self, mode: ApMode) -> impl Iterator<Item = usize> + '_ {
        self.ue_modes
            .iter()
            .enumerate()
            .filter(move |(_, &m)| m == mode)
            .map(|(i, _)| i)
    }

    pub fn ap_ul(&self) -> Vec<usize> {
        self.ap_in(ApMode::Ul).collect()
    }

    pub fn ap_dl(&self) -> Vec<usize> {
        self.ap_in(ApMode::Dl).collect()
    }

    pub fn ue_ul(&self) -> Vec<usize> {
        self.ue_in(ApMode::Ul).collect()
    }

    pub fn ue_dl(&self) -> Vec<usize> {
        self.ue_in(ApMode::Dl).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.ap_modes.iter().all(Option::is_some)
    }

    pub fn validate(&self, num_aps: usize, num_ues: usize) -> Result<()> {
        if self.ap_modes.len() != num_aps {
            return Err(Error::InvalidSchedule(format!(
                "{} AP modes for {num_aps} APs",
                self.ap_modes.len()
            )));
        }
        if self.ue_modes.len() != num_ues {
            return Err(Error::InvalidSchedule(format!(
                "{} UE demands for {num_ues} UEs",
                self.ue_modes.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    /// `E_u,k` per UE (only UL UEs transmit data).
    pub ul_data_power: Vec<f64>,
    /// `E_d,j` per AP.
    pub dl_ap_power: Vec<f64>,
}

impl PowerConfig {
    /// Equal powers with `E/N_0` set by the given SNRs.
    pub fn from_snr_db(num_aps: usize, num_ues: usize, ul_snr_db: f64, dl_snr_db: f64, noise: f64) -> Self {
        Self {
            ul_data_power: vec![db_to_linear(ul_snr_db) * noise; num_ues],
            dl_ap_power: vec![db_to_linear(dl_snr_db) * noise; num_aps],
        }
    }

    pub fn validate(&self, num_aps: usize, num_ues: usize) -> Result<()> {
        if self.ul_data_power.len() != num_ues {
            return Err(Error::config("ul_data_power", format!("needs {num_ues} entries")));
        }
        if self.dl_ap_power.len() != num_aps {
            return Err(Error::config("dl_ap_power", format!("needs {num_aps} entries")));
        }
        if self
            .ul_data_power
            .iter()
            .chain(&self.dl_ap_power)
            .any(|&p| !(p >= 0.0 && p.is_finite()))
        {
            return Err(Error::config("powers", "must be non-negative and finite"));
        }
        Ok(())
    }
}

/// Everything the closed forms need about one drop.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub geometry: NetworkGeometry,
    pub pilot: PilotConfig,
    pub assignment: PilotAssignment,
    pub stats: EstimationStats,
    pub powers: PowerConfig,
}

impl Scenario {
    pub fn new(
        geometry: NetworkGeometry,
        pilot: PilotConfig,
        assignment: PilotAssignment,
        powers: PowerConfig,
    ) -> Result<Self> {
        powers.validate(geometry.num_aps(), geometry.num_ues())?;
        let stats = estimation_stats(&geometry, &pilot, &assignment)?;
        Ok(Self {
            geometry,
            pilot,
            assignment,
            stats,
            powers,
        })
    }

    pub fn num_aps(&self) -> usize {
        self.geometry.num_aps()
    }

    pub fn num_ues(&self) -> usize {
        self.geometry.num_ues()
    }

    pub fn antennas(&self) -> f64 {
        self.geometry.antennas_per_ap as f64
    }

    /// `√(E_p,n/E_p,k) β_mn/β_mk`, the pilot-sharing cross factor.
    fn cross(&self, m: usize, n: usize, k: usize) -> f64 {
        let p = &self.pilot.pilot_power;
        (p[n] / p[k]).sqrt() * self.geometry.beta[(m, n)] / self.geometry.beta[(m, k)]
    }
}

/// `κ_jn = (N Σ_{k'∈U_d} α²_jk')^{-1}` for every AP and DL UE, zero for UL
/// UEs. Independent of which APs are in DL mode.
pub fn kappa_all_aps(stats: &EstimationStats, ue_modes: &[ApMode], antennas: usize) -> DMatrix<f64> {
    let (m, k) = stats.alpha_sq.shape();
    let mut kappa = DMatrix::zeros(m, k);
    for j in 0..m {
        let s: f64 = (0..k)
            .filter(|&q| ue_modes[q] == ApMode::Dl)
            .map(|q| stats.alpha_sq[(j, q)])
            .sum();
        if s > 0.0 {
            let v = 1.0 / (antennas as f64 * s);
            for q in (0..k).filter(|&q| ue_modes[q] == ApMode::Dl) {
                kappa[(j, q)] = v;
            }
        }
    }
    kappa
}

/// DL power coefficients, zero outside `A_d × U_d`.
pub fn dl_power_coeffs(stats: &EstimationStats, schedule: &Schedule, antennas: usize) -> DMatrix<f64> {
    let mut kappa = kappa_all_aps(stats, &schedule.ue_modes, antennas);
    for (j, mode) in schedule.ap_modes.iter().enumerate() {
        if *mode != Some(ApMode::Dl) {
            kappa.row_mut(j).fill(0.0);
        }
    }
    kappa
}

/// Numerator and denominator pieces of the UL SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlTerms {
    pub gain: f64,
    pub non_coherent: f64,
    pub coherent: f64,
    pub inter_ap: f64,
    pub noise: f64,
}

impl UlTerms {
    pub fn sinr(&self) -> f64 {
        if self.gain == 0.0 {
            return 0.0;
        }
        self.gain / (self.non_coherent + self.coherent + self.inter_ap + self.noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlTerms {
    pub gain: f64,
    pub non_coherent: f64,
    pub coherent: f64,
    pub ue_ue: f64,
    pub noise: f64,
}

impl DlTerms {
    pub fn sinr(&self) -> f64 {
        if self.gain == 0.0 {
            return 0.0;
        }
        self.gain / (self.non_coherent + self.coherent + self.ue_ue + self.noise)
    }
}

pub fn ul_terms(scn: &Scenario, schedule: &Schedule, kappa: &DMatrix<f64>, k: usize) -> UlTerms {
    let n_ant = scn.antennas();
    let a2 = &scn.stats.alpha_sq;
    let beta = &scn.geometry.beta;
    let e_u = &scn.powers.ul_data_power;
    let a_u = schedule.ap_ul();
    let a_d = schedule.ap_dl();

    let s: f64 = a_u.iter().map(|&m| a2[(m, k)]).sum();
    let non_coherent: f64 = schedule
        .ue_in(ApMode::Ul)
        .map(|n| e_u[n] * a_u.iter().map(|&m| a2[(m, k)] * beta[(m, n)]).sum::<f64>())
        .sum();
    let coherent: f64 = n_ant
        * scn
            .assignment
            .co_pilot(k)
            .filter(|&n| schedule.ue_modes[n] == ApMode::Ul)
            .map(|n| {
                let inner: f64 = a_u.iter().map(|&m| a2[(m, k)] * scn.cross(m, n, k)).sum();
                e_u[n] * inner * inner
            })
            .sum::<f64>();
    let mut inter_ap = 0.0;
    for &m in &a_u {
        for &j in &a_d {
            let zeta = scn.geometry.zeta[(m, j)];
            if zeta == 0.0 {
                continue;
            }
            let leak: f64 = schedule
                .ue_in(ApMode::Dl)
                .map(|n| kappa[(j, n)].powi(2) * a2[(j, n)])
                .sum();
            inter_ap += zeta * a2[(m, k)] * leak * scn.powers.dl_ap_power[j];
        }
    }
    UlTerms {
        gain: n_ant * e_u[k] * s * s,
        non_coherent,
        coherent,
        inter_ap: n_ant * inter_ap,
        noise: scn.geometry.noise_power * s,
    }
}

pub fn dl_terms(scn: &Scenario, schedule: &Schedule, kappa: &DMatrix<f64>, n: usize) -> DlTerms {
    let n_ant = scn.antennas();
    let a2 = &scn.stats.alpha_sq;
    let beta = &scn.geometry.beta;
    let e_d = &scn.powers.dl_ap_power;
    let a_d = schedule.ap_dl();

    let amp: f64 = a_d.iter().map(|&j| kappa[(j, n)] * e_d[j].sqrt() * a2[(j, n)]).sum();
    let non_coherent: f64 = schedule
        .ue_in(ApMode::Dl)
        .map(|q| {
            a_d.iter()
                .map(|&j| e_d[j] * kappa[(j, q)].powi(2) * beta[(j, n)] * a2[(j, q)])
                .sum::<f64>()
        })
        .sum();
    let coherent: f64 = scn
        .assignment
        .co_pilot(n)
        .filter(|&q| schedule.ue_modes[q] == ApMode::Dl)
        .map(|q| {
            let inner: f64 = a_d
                .iter()
                .map(|&j| e_d[j].sqrt() * kappa[(j, q)] * a2[(j, q)] * scn.cross(j, n, q))
                .sum();
            inner * inner
        })
        .sum();
    let ue_ue: f64 = schedule
        .ue_in(ApMode::Ul)
        .map(|k| scn.powers.ul_data_power[k] * scn.geometry.epsilon[(n, k)])
        .sum();
    DlTerms {
        gain: n_ant * n_ant * amp * amp,
        non_coherent: n_ant * non_coherent,
        coherent: n_ant * n_ant * coherent,
        ue_ue,
        noise: scn.geometry.noise_power,
    }
}

/// UL SINR of UE `k` with MRC over `A_u`; zero when `A_u` is empty.
pub fn ul_sinr_mrc(scn: &Scenario, schedule: &Schedule, k: usize) -> f64 {
    let kappa = kappa_all_aps(&scn.stats, &schedule.ue_modes, scn.geometry.antennas_per_ap);
    ul_terms(scn, schedule, &kappa, k).sinr()
}

/// DL SINR of UE `n` with matched-filter precoding over `A_d`; zero when
/// `A_d` is empty.
pub fn dl_sinr_mfp(scn: &Scenario, schedule: &Schedule, n: usize) -> f64 {
    let kappa = kappa_all_aps(&scn.stats, &schedule.ue_modes, scn.geometry.antennas_per_ap);
    dl_terms(scn, schedule, &kappa, n).sinr()
}

/// Per-UE SINRs and SEs plus the pre-log-scaled sum.
///
/// Per-UE arrays are indexed by UE; entries for UEs of the other direction
/// are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeReport {
    pub ul_sinr: Vec<f64>,
    pub dl_sinr: Vec<f64>,
    pub ul_se: Vec<f64>,
    pub dl_se: Vec<f64>,
    pub prelog: f64,
    /// Fraction of the data phase spent in UL (1 when UL and DL run
    /// concurrently).
    pub ul_share: f64,
    pub dl_share: f64,
    pub sum_se: f64,
}

impl SeReport {
    pub fn from_sinrs(ul_sinr: Vec<f64>, dl_sinr: Vec<f64>, prelog: f64) -> Self {
        Self::time_shared(ul_sinr, dl_sinr, prelog, 1.0, 1.0)
    }

    /// UL and DL served in separate phases occupying the given fractions of
    /// the data symbols.
    pub fn time_shared(ul_sinr: Vec<f64>, dl_sinr: Vec<f64>, prelog: f64, ul_share: f64, dl_share: f64) -> Self {
        let ul_se: Vec<f64> = ul_sinr.iter().map(|s| (1.0 + s).log2()).collect();
        let dl_se: Vec<f64> = dl_sinr.iter().map(|s| (1.0 + s).log2()).collect();
        let sum_se = prelog * (ul_share * ul_se.iter().sum::<f64>() + dl_share * dl_se.iter().sum::<f64>());
        Self {
            ul_sinr,
            dl_sinr,
            ul_se,
            dl_se,
            prelog,
            ul_share,
            dl_share,
            sum_se,
        }
    }

    /// UL part of `sum_se`.
    pub fn ul_sum(&self) -> f64 {
        self.prelog * self.ul_share * self.ul_se.iter().sum::<f64>()
    }

    pub fn dl_sum(&self) -> f64 {
        self.prelog * self.dl_share * self.dl_se.iter().sum::<f64>()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub fn sum_se(scn: &Scenario, schedule: &Schedule) -> Result<SeReport> {
    schedule.validate(scn.num_aps(), scn.num_ues())?;
    Ok(sum_se_unchecked(scn, schedule))
}

pub(crate) fn sum_se_unchecked(scn: &Scenario, schedule: &Schedule) -> SeReport {
    let kappa = kappa_all_aps(&scn.stats, &schedule.ue_modes, scn.geometry.antennas_per_ap);
    let k = scn.num_ues();
    let mut ul = vec![0.0; k];
    let mut dl = vec![0.0; k];
    for ue in 0..k {
        match schedule.ue_modes[ue] {
            ApMode::Ul => ul[ue] = ul_terms(scn, schedule, &kappa, ue).sinr(),
            ApMode::Dl => dl[ue] = dl_terms(scn, schedule, &kappa, ue).sinr(),
        }
    }
    SeReport::from_sinrs(ul, dl, scn.pilot.prelog())
}

/// Static TDD: all APs in UL for a share `|U_u|/K` of the data symbols,
/// then all in DL. UL UEs are silent during the DL phase, so no UE-UE
/// interference arises.
pub fn tdd_sum_se(scn: &Scenario, ue_modes: &[ApMode]) -> Result<SeReport> {
    let m = scn.num_aps();
    let k = scn.num_ues();
    let ul_phase = Schedule::all(m, ApMode::Ul, ue_modes.to_vec());
    let dl_phase = Schedule::all(m, ApMode::Dl, ue_modes.to_vec());
    ul_phase.validate(m, k)?;
    let kappa = kappa_all_aps(&scn.stats, ue_modes, scn.geometry.antennas_per_ap);
    let mut ul = vec![0.0; k];
    let mut dl = vec![0.0; k];
    for ue in 0..k {
        match ue_modes[ue] {
            ApMode::Ul => ul[ue] = ul_terms(scn, &ul_phase, &kappa, ue).sinr(),
            ApMode::Dl => {
                let mut t = dl_terms(scn, &dl_phase, &kappa, ue);
                t.ue_ue = 0.0;
                dl[ue] = t.sinr();
            }
        }
    }
    let w_u = ul_phase.ue_in(ApMode::Ul).count() as f64 / k as f64;
    Ok(SeReport::time_shared(ul, dl, scn.pilot.prelog(), w_u, 1.0 - w_u))
}
