//! LMMSE channel-estimation statistics and channel realizations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry::NetworkGeometry;
use crate::rng::complex_normal;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    /// Symbols per slot.
    pub tau: usize,
    /// Pilot length.
    pub tau_p: usize,
    /// Per-UE pilot power.
    pub pilot_power: Vec<f64>,
}

impl PilotConfig {
    pub fn uniform(tau: usize, tau_p: usize, num_ues: usize, power: f64) -> Self {
        Self {
            tau,
            tau_p,
            pilot_power: vec![power; num_ues],
        }
    }

    pub fn validate(&self, num_ues: usize) -> Result<()> {
        if self.tau_p < 1 || self.tau_p > self.tau {
            return Err(Error::config(
                "tau_p",
                format!("must satisfy 1 <= tau_p <= tau ({})", self.tau),
            ));
        }
        if self.pilot_power.len() != num_ues {
            return Err(Error::config(
                "pilot_power",
                format!("has {} entries for {num_ues} UEs", self.pilot_power.len()),
            ));
        }
        if let Some(k) = self.pilot_power.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidAssignment {
                ue: k,
                reason: "pilot power must be positive".into(),
            });
        }
        Ok(())
    }

    /// Fraction of the slot left for data, `(τ − τ_p)/τ`.
    pub fn prelog(&self) -> f64 {
        (self.tau - self.tau_p.min(self.tau)) as f64 / self.tau as f64
    }
}

/// Partition of the UEs into pilot groups.
///
/// Serialized as a JSON array holding the pilot index of every UE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PilotAssignment {
    pilot_of: Vec<usize>,
    groups: Vec<Vec<usize>>,
}

impl PilotAssignment {
    pub fn from_pilot_indices(pilot_of: Vec<usize>, tau_p: usize) -> Result<Self> {
        let mut groups = vec![Vec::new(); tau_p];
        for (k, &p) in pilot_of.iter().enumerate() {
            if p >= tau_p {
                return Err(Error::InvalidAssignment {
                    ue: k,
                    reason: format!("pilot {p} out of range for tau_p = {tau_p}"),
                });
            }
            groups[p].push(k);
        }
        Ok(Self { pilot_of, groups })
    }

    /// UE `k` gets pilot `k`; needs `tau_p >= K`.
    pub fn orthogonal(num_ues: usize, tau_p: usize) -> Result<Self> {
        if tau_p < num_ues {
            return Err(Error::config("tau_p", "orthogonal assignment needs tau_p >= K"));
        }
        Self::from_pilot_indices((0..num_ues).collect(), tau_p)
    }

    pub fn pilot_of(&self, k: usize) -> usize {
        self.pilot_of[k]
    }

    pub fn pilot_indices(&self) -> &[usize] {
        &self.pilot_of
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_pilots(&self) -> usize {
        self.groups.len()
    }

    pub fn num_ues(&self) -> usize {
        self.pilot_of.len()
    }

    /// UEs sharing `k`'s pilot, excluding `k`.
    pub fn co_pilot(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.groups[self.pilot_of[k]].iter().copied().filter(move |&n| n != k)
    }

    /// Moves UE `k` into group `p`, keeping the partition valid.
    pub fn reassign(&mut self, k: usize, p: usize) {
        let old = self.pilot_of[k];
        if old == p {
            return;
        }
        self.groups[old].retain(|&n| n != k);
        let pos = self.groups[p].partition_point(|&n| n < k);
        self.groups[p].insert(pos, k);
        self.pilot_of[k] = p;
    }

    pub fn validate(&self, num_ues: usize) -> Result<()> {
        if self.pilot_of.len() != num_ues {
            return Err(Error::InvalidAssignment {
                ue: self.pilot_of.len().min(num_ues),
                reason: format!("assignment covers {} UEs, expected {num_ues}", self.pilot_of.len()),
            });
        }
        let total: usize = self.groups.iter().map(Vec::len).sum();
        if total != num_ues {
            return Err(Error::InvalidAssignment {
                ue: 0,
                reason: "groups do not cover every UE exactly once".into(),
            });
        }
        Ok(())
    }
}

impl Serialize for PilotAssignment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pilot_of.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PilotAssignment {
    /// The pilot count is inferred as `max index + 1`.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let idx = Vec::<usize>::deserialize(d)?;
        let tau_p = idx.iter().max().map_or(1, |&p| p + 1);
        Self::from_pilot_indices(idx, tau_p).map_err(serde::de::Error::custom)
    }
}

/// Per-link estimate statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationStats {
    /// Estimate variance α²_mk (M×K).
    pub alpha_sq: DMatrix<f64>,
    /// Error variance β_mk − α²_mk.
    pub alpha_bar_sq: DMatrix<f64>,
    /// LMMSE normaliser c_mk.
    pub c: DMatrix<f64>,
}

/// `c_mk`, `α²_mk` for AP `m` and UE `k` under `assignment`.
pub fn link_stats(
    beta: &DMatrix<f64>,
    noise: f64,
    pilot: &PilotConfig,
    assignment: &PilotAssignment,
    m: usize,
    k: usize,
) -> (f64, f64) {
    let tp = pilot.tau_p as f64;
    let contamination: f64 = assignment
        .co_pilot(k)
        .map(|n| pilot.pilot_power[n] * beta[(m, n)])
        .sum();
    let c = 1.0 / (tp * pilot.pilot_power[k] * beta[(m, k)] + tp * contamination + noise);
    let alpha_sq = c * tp * pilot.pilot_power[k] * beta[(m, k)].powi(2);
    (c, alpha_sq)
}

pub fn estimation_stats(
    geometry: &NetworkGeometry,
    pilot: &PilotConfig,
    assignment: &PilotAssignment,
) -> Result<EstimationStats> {
    let (m, k) = geometry.beta.shape();
    pilot.validate(k)?;
    assignment.validate(k)?;
    let mut alpha_sq = DMatrix::zeros(m, k);
    let mut alpha_bar_sq = DMatrix::zeros(m, k);
    let mut c = DMatrix::zeros(m, k);
    for ap in 0..m {
        for ue in 0..k {
            let (cc, a2) = link_stats(&geometry.beta, geometry.noise_power, pilot, assignment, ap, ue);
            let a2 = a2.min(geometry.beta[(ap, ue)]);
            c[(ap, ue)] = cc;
            alpha_sq[(ap, ue)] = a2;
            alpha_bar_sq[(ap, ue)] = (geometry.beta[(ap, ue)] - a2).max(0.0);
        }
    }
    Ok(EstimationStats {
        alpha_sq,
        alpha_bar_sq,
        c,
    })
}

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Cross-link interference channels for one coherence block.
#[derive(Debug, Clone)]
pub struct CliDraw {
    /// `G_mj` (N×N) indexed `m * M + j`; `None` on the diagonal.
    pub ap_ap: Vec<Option<CMatrix>>,
    /// UE-UE scalars `g_nk`.
    pub ue_ue: CMatrix,
}

/// One draw of estimates and estimation errors for every (AP, UE) link.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub num_aps: usize,
    pub num_ues: usize,
    f_hat: Vec<CVector>,
    f_tilde: Vec<CVector>,
    pub cli: Option<CliDraw>,
}

impl ChannelRealization {
    /// Builds a realization from per-link vectors indexed `m * K + k`.
    pub fn from_parts(num_aps: usize, num_ues: usize, f_hat: Vec<CVector>, f_tilde: Vec<CVector>) -> Result<Self> {
        if f_hat.len() != num_aps * num_ues || f_tilde.len() != num_aps * num_ues {
            return Err(Error::config("channels", "need one vector per (AP, UE) link"));
        }
        Ok(Self {
            num_aps,
            num_ues,
            f_hat,
            f_tilde,
            cli: None,
        })
    }

    pub fn f_hat(&self, m: usize, k: usize) -> &CVector {
        &self.f_hat[m * self.num_ues + k]
    }

    pub fn f_tilde(&self, m: usize, k: usize) -> &CVector {
        &self.f_tilde[m * self.num_ues + k]
    }

    /// True channel `f̂ + f̃`.
    pub fn f(&self, m: usize, k: usize) -> CVector {
        self.f_hat(m, k) + self.f_tilde(m, k)
    }

    pub fn g_ap(&self, m: usize, j: usize) -> Option<&CMatrix> {
        self.cli.as_ref().and_then(|c| c.ap_ap[m * self.num_aps + j].as_ref())
    }
}

fn draw_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, var: f64) -> CVector {
    CVector::from_fn(n, |_, _| complex_normal(rng, var))
}

/// Draws estimates and errors only; enough for processing that treats
/// cross-link interference through its statistics. Estimates of UEs sharing
/// a pilot are scaled copies of one direction per AP.
pub fn draw_channels<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    stats: &EstimationStats,
    assignment: &PilotAssignment,
    rng: &mut R,
) -> ChannelRealization {
    let (m, k) = stats.alpha_sq.shape();
    let n = geometry.antennas_per_ap;
    let mut f_hat = Vec::with_capacity(m * k);
    let mut f_tilde = Vec::with_capacity(m * k);
    for ap in 0..m {
        let dirs: Vec<CVector> = (0..assignment.num_pilots()).map(|_| draw_vec(rng, n, 1.0)).collect();
        for ue in 0..k {
            f_hat.push(&dirs[assignment.pilot_of(ue)] * Complex64::new(stats.alpha_sq[(ap, ue)].sqrt(), 0.0));
            f_tilde.push(draw_vec(rng, n, stats.alpha_bar_sq[(ap, ue)]));
        }
    }
    ChannelRealization {
        num_aps: m,
        num_ues: k,
        f_hat,
        f_tilde,
        cli: None,
    }
}

/// Full block: estimates, errors, AP-AP channels `G_mj` and UE-UE scalars.
pub fn draw_channel_block<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    stats: &EstimationStats,
    assignment: &PilotAssignment,
    rng: &mut R,
) -> ChannelRealization {
    let mut real = draw_channels(geometry, stats, assignment, rng);
    real.cli = Some(draw_cli(geometry, rng));
    real
}

/// AP-AP matrices with i.i.d. CN(0, ζ_mj) entries and UE-UE scalars
/// CN(0, ε_nk).
pub fn draw_cli<R: Rng + ?Sized>(geometry: &NetworkGeometry, rng: &mut R) -> CliDraw {
    let m = geometry.num_aps();
    let k = geometry.num_ues();
    let n = geometry.antennas_per_ap;
    let mut ap_ap = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            ap_ap.push((a != b).then(|| CMatrix::from_fn(n, n, |_, _| complex_normal(rng, geometry.zeta[(a, b)]))));
        }
    }
    let ue_ue = CMatrix::from_fn(k, k, |a, b| {
        if a == b {
            Complex64::new(0.0, 0.0)
        } else {
            complex_normal(rng, geometry.epsilon[(a, b)])
        }
    });
    CliDraw { ap_ap, ue_ue }
}
