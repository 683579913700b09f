//! Multi-cell baselines: full-duplex BSs with MRC/MFP, and static TDD with
//! the same processing.
//!
//! BSs sit at the centres of `L` equal square cells; each UE is served by the
//! nearest one. Pilots are orthogonal inside a cell and reused across cells
//! by local index, so a UE's pilot sharers are the equally indexed UEs of
//! other cells.

use nalgebra::DMatrix;

use crate::closed_form::{ApMode, PowerConfig, SeReport};
use crate::estimation::{estimation_stats, EstimationStats, PilotAssignment, PilotConfig};
use crate::geometry::{place_aps_grid, NetworkConfig, NetworkGeometry, Point};
use crate::pilots::cluster_by_cells;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct CellularScenario {
    /// BSs in the role of APs: `beta` is BS-UE, `zeta` is the residual
    /// inter-BS interference ρ, `epsilon` is UE-UE.
    pub geometry: NetworkGeometry,
    pub cell_of: Vec<usize>,
    pub pilot: PilotConfig,
    pub assignment: PilotAssignment,
    /// `σ²_jk` is `stats.alpha_sq[(j, k)]`.
    pub stats: EstimationStats,
    /// UL power per UE, DL power per BS.
    pub powers: PowerConfig,
}

impl CellularScenario {
    /// `network` supplies area, pathloss, noise and the residual CLI knob;
    /// its AP fields are replaced by `num_cells` BSs with `antennas` each.
    /// The pilot length grows to the largest cell population if needed.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        network: &NetworkConfig,
        num_cells: usize,
        antennas: usize,
        ue_positions: Vec<Point>,
        tau: usize,
        tau_p: usize,
        pilot_power: f64,
        powers: PowerConfig,
    ) -> Result<Self> {
        let k = ue_positions.len();
        if powers.ul_data_power.len() != k || powers.dl_ap_power.len() != num_cells {
            return Err(Error::LayoutMismatch(format!(
                "powers for {} UEs and {} BSs, layout has {k} UEs and {num_cells} cells",
                powers.ul_data_power.len(),
                powers.dl_ap_power.len()
            )));
        }
        let clusters = cluster_by_cells(&ue_positions, network.area_side_m, num_cells)?;
        let tau_p = tau_p.max(clusters.max_cluster);
        if tau_p > tau {
            return Err(Error::LayoutMismatch(format!(
                "largest cell needs {tau_p} pilots but the slot has {tau} symbols"
            )));
        }
        let mut bs = network.clone();
        bs.num_aps = num_cells;
        bs.antennas_per_ap = antennas;
        let geometry =
            NetworkGeometry::from_positions(&bs, place_aps_grid(num_cells, network.area_side_m), ue_positions)?;
        let pilot = PilotConfig::uniform(tau, tau_p, k, pilot_power);
        let assignment = PilotAssignment::from_pilot_indices(clusters.local_index, tau_p)?;
        let stats = estimation_stats(&geometry, &pilot, &assignment)?;
        powers.validate(num_cells, k)?;
        Ok(Self {
            geometry,
            cell_of: clusters.cell_of,
            pilot,
            assignment,
            stats,
            powers,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.geometry.num_aps()
    }

    pub fn num_ues(&self) -> usize {
        self.geometry.num_ues()
    }

    fn antennas(&self) -> f64 {
        self.geometry.antennas_per_ap as f64
    }

    /// `κ_lq = (N_t Σ_{q'∈U_{l,d}} σ²_llq')^{-1}` for DL UE `q` of cell `l`.
    pub fn kappa(&self, ue_modes: &[ApMode]) -> Vec<f64> {
        let mut load = vec![0.0; self.num_cells()];
        for (q, &mode) in ue_modes.iter().enumerate() {
            if mode == ApMode::Dl {
                load[self.cell_of[q]] += self.stats.alpha_sq[(self.cell_of[q], q)];
            }
        }
        ue_modes
            .iter()
            .enumerate()
            .map(|(q, &mode)| {
                let l = self.cell_of[q];
                if mode == ApMode::Dl && load[l] > 0.0 {
                    1.0 / (self.antennas() * load[l])
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Which transmissions are active while a SINR is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Activity {
    pub bs_transmit: bool,
    pub ue_transmit: bool,
}

impl Activity {
    pub const FULL_DUPLEX: Self = Self {
        bs_transmit: true,
        ue_transmit: true,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdUlTerms {
    pub gain: f64,
    pub inter_bs: f64,
    pub multi_user: f64,
    pub noise: f64,
}

impl FdUlTerms {
    pub fn sinr(&self) -> f64 {
        if self.gain == 0.0 {
            return 0.0;
        }
        self.gain / (self.inter_bs + self.multi_user + self.noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdDlTerms {
    pub gain: f64,
    pub ue_ue: f64,
    pub multi_user: f64,
    pub noise: f64,
}

impl FdDlTerms {
    pub fn sinr(&self) -> f64 {
        if self.gain == 0.0 {
            return 0.0;
        }
        self.gain / (self.ue_ue + self.multi_user + self.noise)
    }
}

fn dl_interference_power(scn: &CellularScenario, ue_modes: &[ApMode], kappa: &[f64]) -> Vec<f64> {
    // Per-BS transmit power Σ_q κ²_jq E_d,j N_t σ²_jq.
    let n = scn.antennas();
    let mut p = vec![0.0; scn.num_cells()];
    for (q, &mode) in ue_modes.iter().enumerate() {
        if mode == ApMode::Dl {
            let j = scn.cell_of[q];
            p[j] += kappa[q].powi(2) * scn.powers.dl_ap_power[j] * n * scn.stats.alpha_sq[(j, q)];
        }
    }
    p
}

/// UL SINR terms of UL UE `u` at its serving BS.
pub fn fd_ul_terms(
    scn: &CellularScenario,
    ue_modes: &[ApMode],
    kappa: &[f64],
    activity: Activity,
    u: usize,
) -> FdUlTerms {
    let n = scn.antennas();
    let l = scn.cell_of[u];
    let s2 = &scn.stats.alpha_sq;
    let e_u = &scn.powers.ul_data_power;

    let inter_bs = if activity.bs_transmit {
        let tx = dl_interference_power(scn, ue_modes, kappa);
        (0..scn.num_cells())
            .filter(|&j| j != l)
            .map(|j| scn.geometry.zeta[(l, j)] * tx[j])
            .sum()
    } else {
        0.0
    };
    let ul_ues = || {
        ue_modes
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == ApMode::Ul)
            .map(|(i, _)| i)
    };
    let coherent: f64 = scn
        .assignment
        .co_pilot(u)
        .filter(|&q| ue_modes[q] == ApMode::Ul)
        .map(|q| s2[(l, q)] * e_u[q])
        .sum();
    let spread: f64 = ul_ues().map(|q| scn.geometry.beta[(l, q)] * e_u[q]).sum();
    FdUlTerms {
        gain: n * s2[(l, u)] * e_u[u],
        inter_bs,
        multi_user: n * coherent + spread,
        noise: scn.geometry.noise_power,
    }
}

/// DL SINR terms of DL UE `u` served by its BS.
pub fn fd_dl_terms(
    scn: &CellularScenario,
    ue_modes: &[ApMode],
    kappa: &[f64],
    activity: Activity,
    u: usize,
) -> FdDlTerms {
    let n = scn.antennas();
    let l = scn.cell_of[u];
    let s2 = &scn.stats.alpha_sq;
    let e_d = &scn.powers.dl_ap_power;

    let mut coherent = 0.0;
    for q in scn.assignment.co_pilot(u).filter(|&q| ue_modes[q] == ApMode::Dl) {
        let j = scn.cell_of[q];
        coherent += kappa[q].powi(2) * e_d[j] * s2[(j, u)] * s2[(j, q)];
    }
    let mut spread = 0.0;
    for (q, &mode) in ue_modes.iter().enumerate() {
        if mode == ApMode::Dl {
            let j = scn.cell_of[q];
            spread += kappa[q].powi(2) * e_d[j] * scn.geometry.beta[(j, u)] * s2[(j, q)];
        }
    }
    let ue_ue = if activity.ue_transmit {
        ue_modes
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == ApMode::Ul)
            .map(|(k, _)| scn.powers.ul_data_power[k] * scn.geometry.epsilon[(u, k)])
            .sum()
    } else {
        0.0
    };
    FdDlTerms {
        gain: n * n * kappa[u].powi(2) * e_d[l] * s2[(l, u)].powi(2),
        ue_ue,
        multi_user: n * n * coherent + n * spread,
        noise: scn.geometry.noise_power,
    }
}

fn check_modes(scn: &CellularScenario, ue_modes: &[ApMode]) -> Result<()> {
    if ue_modes.len() != scn.num_ues() {
        return Err(Error::LayoutMismatch(format!(
            "{} UE demands for {} UEs",
            ue_modes.len(),
            scn.num_ues()
        )));
    }
    Ok(())
}

/// Every BS serves its UL and DL UEs simultaneously with perfect
/// self-interference cancellation.
pub fn fd_cellular_sum_se(scn: &CellularScenario, ue_modes: &[ApMode]) -> Result<SeReport> {
    check_modes(scn, ue_modes)?;
    let kappa = scn.kappa(ue_modes);
    let k = scn.num_ues();
    let mut ul = vec![0.0; k];
    let mut dl = vec![0.0; k];
    for u in 0..k {
        match ue_modes[u] {
            ApMode::Ul => ul[u] = fd_ul_terms(scn, ue_modes, &kappa, Activity::FULL_DUPLEX, u).sinr(),
            ApMode::Dl => dl[u] = fd_dl_terms(scn, ue_modes, &kappa, Activity::FULL_DUPLEX, u).sinr(),
        }
    }
    Ok(SeReport::from_sinrs(ul, dl, scn.pilot.prelog()))
}

/// Half-duplex BSs: a UL phase for a share `|U_u|/K` of the data symbols,
/// then a DL phase, network-wide.
pub fn tdd_cellular_sum_se(scn: &CellularScenario, ue_modes: &[ApMode]) -> Result<SeReport> {
    check_modes(scn, ue_modes)?;
    let kappa = scn.kappa(ue_modes);
    let k = scn.num_ues();
    let ul_phase = Activity {
        bs_transmit: false,
        ue_transmit: true,
    };
    let dl_phase = Activity {
        bs_transmit: true,
        ue_transmit: false,
    };
    let mut ul = vec![0.0; k];
    let mut dl = vec![0.0; k];
    for u in 0..k {
        match ue_modes[u] {
            ApMode::Ul => ul[u] = fd_ul_terms(scn, ue_modes, &kappa, ul_phase, u).sinr(),
            ApMode::Dl => dl[u] = fd_dl_terms(scn, ue_modes, &kappa, dl_phase, u).sinr(),
        }
    }
    let w_u = ue_modes.iter().filter(|&&m| m == ApMode::Ul).count() as f64 / k as f64;
    Ok(SeReport::time_shared(ul, dl, scn.pilot.prelog(), w_u, 1.0 - w_u))
}

/// Per-BS DL transmit powers, exposed for the normalisation check.
pub fn bs_transmit_power(scn: &CellularScenario, ue_modes: &[ApMode]) -> Vec<f64> {
    dl_interference_power(scn, ue_modes, &scn.kappa(ue_modes))
}

/// `ρ_lj` matrix (residual inter-BS interference variances).
pub fn rho(scn: &CellularScenario) -> &DMatrix<f64> {
    &scn.geometry.zeta
}
