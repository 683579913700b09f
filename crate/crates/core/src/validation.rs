//! Signal-level Monte-Carlo estimators of the MRC/MFP SINRs.
//!
//! Each realization simulates the pilot phase (DFT pilots, received pilot
//! matrix with thermal noise, LMMSE estimation), draws true channels and
//! cross-link channels, and accumulates the effective-channel moments of
//! the data phase. Expectations over the unit-power data symbols are taken
//! analytically per realization. The use-and-then-forget decomposition of
//! those moments gives the same term families as the closed forms, so each
//! term can be compared on its own.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cellular::{Activity, CellularScenario, FdDlTerms, FdUlTerms};
use crate::closed_form::{
    dl_sinr_mfp, dl_terms, kappa_all_aps, ul_sinr_mrc, ul_terms, ApMode, DlTerms, Scenario, Schedule, UlTerms,
};
use crate::estimation::{
    draw_cli, CMatrix, CVector, ChannelRealization, EstimationStats, PilotAssignment, PilotConfig,
};
use crate::geometry::NetworkGeometry;
use crate::rng::{complex_normal, stream, Stream};
use crate::{Error, Result};

/// Realizations per parallel chunk; each chunk owns a seeded stream.
const CHUNK: usize = 2_000;

/// Simulates the pilot phase with DFT pilots `φ_p[t] = e^{2πi pt/τ_p}` and
/// returns LMMSE estimates together with the true channels.
pub fn simulate_pilot_phase<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    pilot: &PilotConfig,
    assignment: &PilotAssignment,
    stats: &EstimationStats,
    rng: &mut R,
) -> ChannelRealization {
    let m_total = geometry.num_aps();
    let k_total = geometry.num_ues();
    let n = geometry.antennas_per_ap;
    let tau_p = pilot.tau_p;
    let phi = CMatrix::from_fn(tau_p, tau_p, |t, p| {
        Complex64::from_polar(1.0, 2.0 * PI * (p * t) as f64 / tau_p as f64)
    });
    let mut f_hat = Vec::with_capacity(m_total * k_total);
    let mut f_tilde = Vec::with_capacity(m_total * k_total);
    for m in 0..m_total {
        let f: Vec<CVector> = (0..k_total)
            .map(|k| CVector::from_fn(n, |_, _| complex_normal(rng, geometry.beta[(m, k)])))
            .collect();
        let mut y = CMatrix::from_fn(n, tau_p, |_, _| complex_normal(rng, geometry.noise_power));
        for (k, fk) in f.iter().enumerate() {
            let s = Complex64::new(pilot.pilot_power[k].sqrt(), 0.0);
            let col = phi.column(assignment.pilot_of(k)).transpose();
            y += fk * col * s;
        }
        // Despreading with φ_p^*/√τ_p keeps the noise at N0 per entry.
        let despread = &y * phi.map(|z| z.conj()) / Complex64::new((tau_p as f64).sqrt(), 0.0);
        for (k, fk) in f.into_iter().enumerate() {
            let w = stats.c[(m, k)] * (tau_p as f64 * pilot.pilot_power[k]).sqrt() * geometry.beta[(m, k)];
            let est: CVector = despread.column(assignment.pilot_of(k)) * Complex64::new(w, 0.0);
            f_tilde.push(&fk - &est);
            f_hat.push(est);
        }
    }
    ChannelRealization::from_parts(m_total, k_total, f_hat, f_tilde).expect("sizes match by construction")
}

/// Sample moments of effective channels `a_rc` for one direction.
#[derive(Debug, Clone)]
struct Moments {
    mean: DMatrix<Complex64>,
    power: DMatrix<f64>,
    cli: Vec<f64>,
    noise: Vec<f64>,
    count: usize,
}

impl Moments {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            mean: DMatrix::zeros(rows, cols),
            power: DMatrix::zeros(rows, cols),
            cli: vec![0.0; rows],
            noise: vec![0.0; rows],
            count: 0,
        }
    }

    fn add_effective(&mut self, a: &DMatrix<Complex64>) {
        self.mean += a;
        self.power.zip_apply(a, |p, z| *p += z.norm_sqr());
    }

    fn merge(mut self, other: Self) -> Self {
        self.mean += other.mean;
        self.power += other.power;
        self.cli.iter_mut().zip(other.cli).for_each(|(a, b)| *a += b);
        self.noise.iter_mut().zip(other.noise).for_each(|(a, b)| *a += b);
        self.count += other.count;
        self
    }

    /// Gain, coherent and non-coherent pieces for row `r`. `weight[c]`
    /// multiplies column `c`; `sharer(c)` marks pilot sharers whose mean
    /// effective channel is non-zero.
    fn split(&self, r: usize, weight: &[f64], sharer: impl Fn(usize) -> bool) -> (f64, f64, f64) {
        let n = self.count as f64;
        let mut gain = 0.0;
        let mut coherent = 0.0;
        let mut non_coherent = 0.0;
        for (c, &w) in weight.iter().enumerate() {
            let mean_sq = (self.mean[(r, c)] / n).norm_sqr();
            let second = self.power[(r, c)] / n;
            if c == r {
                gain = w * mean_sq;
                non_coherent += w * (second - mean_sq);
            } else if sharer(c) {
                coherent += w * mean_sq;
                non_coherent += w * (second - mean_sq);
            } else {
                non_coherent += w * second;
            }
        }
        (gain, coherent, non_coherent)
    }
}

fn chunked<T: Send>(realizations: usize, seed: u64, f: impl Fn(usize, &mut crate::rng::SimRng) -> T + Sync) -> Vec<T> {
    let chunks = realizations.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(realizations - c * CHUNK);
            let mut rng = stream(seed, c as u64, Stream::Channels);
            f(len, &mut rng)
        })
        .collect()
}

fn fold(parts: Vec<(Moments, Moments)>) -> (Moments, Moments) {
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one chunk");
    it.fold(first, |(u, d), (a, b)| (u.merge(a), d.merge(b)))
}

/// Per-UE comparison of one SINR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrCheck {
    pub direction: ApMode,
    pub ue: usize,
    pub closed_form: f64,
    pub monte_carlo: f64,
}

impl SinrCheck {
    pub fn relative_error(&self) -> f64 {
        if self.closed_form == 0.0 {
            return self.monte_carlo.abs();
        }
        (self.monte_carlo / self.closed_form - 1.0).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub realizations: usize,
    pub checks: Vec<SinrCheck>,
}

impl ValidationReport {
    pub fn max_relative_error(&self) -> f64 {
        self.checks.iter().map(SinrCheck::relative_error).fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_error() <= tolerance
    }
}

/// Estimated UL and DL terms of a cell-free schedule with MRC/MFP.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFreeEstimate {
    /// Indexed by UE; `None` for UEs of the other direction.
    pub ul: Vec<Option<UlTerms>>,
    pub dl: Vec<Option<DlTerms>>,
}

pub fn estimate_cell_free(
    scn: &Scenario,
    schedule: &Schedule,
    realizations: usize,
    seed: u64,
) -> Result<CellFreeEstimate> {
    if realizations == 0 {
        return Err(Error::config("realizations", "must be at least 1"));
    }
    schedule.validate(scn.num_aps(), scn.num_ues())?;
    let n = scn.geometry.antennas_per_ap;
    let kappa = kappa_all_aps(&scn.stats, &schedule.ue_modes, n);
    let a_u = schedule.ap_ul();
    let a_d = schedule.ap_dl();
    let u_u = schedule.ue_ul();
    let u_d = schedule.ue_dl();
    let e_u = &scn.powers.ul_data_power;
    let e_d = &scn.powers.dl_ap_power;
    let n0 = scn.geometry.noise_power;

    let parts = chunked(realizations, seed, |len, rng| {
        let mut ul = Moments::new(u_u.len(), u_u.len());
        let mut dl = Moments::new(u_d.len(), u_d.len());
        for _ in 0..len {
            let real = simulate_pilot_phase(&scn.geometry, &scn.pilot, &scn.assignment, &scn.stats, rng);
            let cli = draw_cli(&scn.geometry, rng);
            let f: Vec<CVector> = (0..scn.num_aps() * scn.num_ues())
                .map(|i| real.f(i / scn.num_ues(), i % scn.num_ues()))
                .collect();
            let f_at = |m: usize, k: usize| &f[m * scn.num_ues() + k];
            // Precoding vectors κ_jq √E_d,j f̂_jq.
            let p_at = |j: usize, q: usize| real.f_hat(j, q) * Complex64::new(kappa[(j, q)] * e_d[j].sqrt(), 0.0);

            let a = DMatrix::from_fn(u_u.len(), u_u.len(), |r, c| {
                a_u.iter()
                    .map(|&m| real.f_hat(m, u_u[r]).dotc(f_at(m, u_u[c])))
                    .sum::<Complex64>()
            });
            ul.add_effective(&a);
            for (r, &k) in u_u.iter().enumerate() {
                let mut iap = 0.0;
                for &j in &a_d {
                    for &q in &u_d {
                        let p = p_at(j, q);
                        let t: Complex64 = a_u
                            .iter()
                            .map(|&m| {
                                real.f_hat(m, k)
                                    .dotc(&(cli.ap_ap[m * scn.num_aps() + j].as_ref().expect("m != j") * &p))
                            })
                            .sum();
                        iap += t.norm_sqr();
                    }
                }
                ul.cli[r] += iap;
                ul.noise[r] += n0 * a_u.iter().map(|&m| real.f_hat(m, k).norm_squared()).sum::<f64>();
            }
            ul.count += 1;

            let b = DMatrix::from_fn(u_d.len(), u_d.len(), |r, c| {
                a_d.iter()
                    .map(|&j| f_at(j, u_d[r]).dotc(&p_at(j, u_d[c])))
                    .sum::<Complex64>()
            });
            dl.add_effective(&b);
            for (r, &nu) in u_d.iter().enumerate() {
                dl.cli[r] += u_u.iter().map(|&k| e_u[k] * cli.ue_ue[(nu, k)].norm_sqr()).sum::<f64>();
                dl.noise[r] += n0;
            }
            dl.count += 1;
        }
        (ul, dl)
    });
    let (ul, dl) = fold(parts);
    let cnt = realizations as f64;
    let scale = 1.0 / n as f64;

    let mut out_ul = vec![None; scn.num_ues()];
    let ul_weight: Vec<f64> = u_u.iter().map(|&k| e_u[k]).collect();
    for (r, &k) in u_u.iter().enumerate() {
        if a_u.is_empty() {
            out_ul[k] = Some(UlTerms {
                gain: 0.0,
                non_coherent: 0.0,
                coherent: 0.0,
                inter_ap: 0.0,
                noise: 0.0,
            });
            continue;
        }
        let (gain, coherent, non_coherent) = ul.split(r, &ul_weight, |c| {
            scn.assignment.pilot_of(u_u[c]) == scn.assignment.pilot_of(k)
        });
        out_ul[k] = Some(UlTerms {
            gain: gain * scale,
            non_coherent: non_coherent * scale,
            coherent: coherent * scale,
            inter_ap: ul.cli[r] / cnt * scale,
            noise: ul.noise[r] / cnt * scale,
        });
    }
    let mut out_dl = vec![None; scn.num_ues()];
    let ones = vec![1.0; u_d.len()];
    for (r, &nu) in u_d.iter().enumerate() {
        let (gain, coherent, non_coherent) = dl.split(r, &ones, |c| {
            scn.assignment.pilot_of(u_d[c]) == scn.assignment.pilot_of(nu)
        });
        out_dl[nu] = Some(DlTerms {
            gain,
            non_coherent,
            coherent,
            ue_ue: dl.cli[r] / cnt,
            noise: dl.noise[r] / cnt,
        });
    }
    Ok(CellFreeEstimate { ul: out_ul, dl: out_dl })
}

/// Compares `ul_sinr_mrc` / `dl_sinr_mfp` with the signal-level estimate
/// for every scheduled UE.
pub fn validate_cell_free(
    scn: &Scenario,
    schedule: &Schedule,
    realizations: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let est = estimate_cell_free(scn, schedule, realizations, seed)?;
    let kappa = kappa_all_aps(&scn.stats, &schedule.ue_modes, scn.geometry.antennas_per_ap);
    let mut checks = Vec::new();
    for k in 0..scn.num_ues() {
        if let Some(t) = est.ul[k] {
            checks.push(SinrCheck {
                direction: ApMode::Ul,
                ue: k,
                closed_form: ul_terms(scn, schedule, &kappa, k).sinr(),
                monte_carlo: t.sinr(),
            });
        }
        if let Some(t) = est.dl[k] {
            checks.push(SinrCheck {
                direction: ApMode::Dl,
                ue: k,
                closed_form: dl_terms(scn, schedule, &kappa, k).sinr(),
                monte_carlo: t.sinr(),
            });
        }
    }
    Ok(ValidationReport { realizations, checks })
}

/// Estimated terms of the multi-cell model under the given activity.
#[derive(Debug, Clone, PartialEq)]
pub struct CellularEstimate {
    pub ul: Vec<Option<FdUlTerms>>,
    pub dl: Vec<Option<FdDlTerms>>,
}

pub fn estimate_cellular(
    scn: &CellularScenario,
    ue_modes: &[ApMode],
    activity: Activity,
    realizations: usize,
    seed: u64,
) -> Result<CellularEstimate> {
    if realizations == 0 {
        return Err(Error::config("realizations", "must be at least 1"));
    }
    if ue_modes.len() != scn.num_ues() {
        return Err(Error::LayoutMismatch(format!(
            "{} UE demands for {} UEs",
            ue_modes.len(),
            scn.num_ues()
        )));
    }
    let g = &scn.geometry;
    let n = g.antennas_per_ap;
    let kappa = scn.kappa(ue_modes);
    let cell = &scn.cell_of;
    let pick = |mode: ApMode| -> Vec<usize> { (0..ue_modes.len()).filter(|&k| ue_modes[k] == mode).collect() };
    let u_u = pick(ApMode::Ul);
    let u_d = pick(ApMode::Dl);
    let e_u = &scn.powers.ul_data_power;
    let e_d = &scn.powers.dl_ap_power;
    let n0 = g.noise_power;

    let parts = chunked(realizations, seed, |len, rng| {
        let mut ul = Moments::new(u_u.len(), u_u.len());
        let mut dl = Moments::new(u_d.len(), u_d.len());
        for _ in 0..len {
            let real = simulate_pilot_phase(g, &scn.pilot, &scn.assignment, &scn.stats, rng);
            let cli = draw_cli(g, rng);
            let p_of = |q: usize| real.f_hat(cell[q], q) * Complex64::new(kappa[q] * e_d[cell[q]].sqrt(), 0.0);

            let a = DMatrix::from_fn(u_u.len(), u_u.len(), |r, c| {
                let l = cell[u_u[r]];
                real.f_hat(l, u_u[r]).dotc(&real.f(l, u_u[c]))
            });
            ul.add_effective(&a);
            for (r, &u) in u_u.iter().enumerate() {
                let l = cell[u];
                let v = real.f_hat(l, u);
                if activity.bs_transmit {
                    ul.cli[r] += u_d
                        .iter()
                        .filter(|&&q| cell[q] != l)
                        .map(|&q| {
                            v.dotc(&(cli.ap_ap[l * g.num_aps() + cell[q]].as_ref().expect("l != j") * p_of(q)))
                                .norm_sqr()
                        })
                        .sum::<f64>();
                }
                ul.noise[r] += n0 * v.norm_squared();
            }
            ul.count += 1;

            let b = DMatrix::from_fn(u_d.len(), u_d.len(), |r, c| {
                let q = u_d[c];
                real.f(cell[q], u_d[r]).dotc(&p_of(q))
            });
            dl.add_effective(&b);
            for (r, &u) in u_d.iter().enumerate() {
                if activity.ue_transmit {
                    dl.cli[r] += u_u.iter().map(|&k| e_u[k] * cli.ue_ue[(u, k)].norm_sqr()).sum::<f64>();
                }
                dl.noise[r] += n0;
            }
            dl.count += 1;
        }
        (ul, dl)
    });
    let (ul, dl) = fold(parts);
    let cnt = realizations as f64;

    let mut out_ul = vec![None; scn.num_ues()];
    let ul_weight: Vec<f64> = u_u.iter().map(|&k| e_u[k]).collect();
    for (r, &u) in u_u.iter().enumerate() {
        let scale = 1.0 / (n as f64 * scn.stats.alpha_sq[(cell[u], u)]);
        let (gain, coherent, non_coherent) = ul.split(r, &ul_weight, |c| {
            scn.assignment.pilot_of(u_u[c]) == scn.assignment.pilot_of(u)
        });
        out_ul[u] = Some(FdUlTerms {
            gain: gain * scale,
            inter_bs: ul.cli[r] / cnt * scale,
            multi_user: (coherent + non_coherent) * scale,
            noise: ul.noise[r] / cnt * scale,
        });
    }
    let mut out_dl = vec![None; scn.num_ues()];
    let ones = vec![1.0; u_d.len()];
    for (r, &u) in u_d.iter().enumerate() {
        let (gain, coherent, non_coherent) = dl.split(r, &ones, |c| {
            scn.assignment.pilot_of(u_d[c]) == scn.assignment.pilot_of(u)
        });
        out_dl[u] = Some(FdDlTerms {
            gain,
            ue_ue: dl.cli[r] / cnt,
            multi_user: coherent + non_coherent,
            noise: dl.noise[r] / cnt,
        });
    }
    Ok(CellularEstimate { ul: out_ul, dl: out_dl })
}

/// Compares the full-duplex cellular closed forms with the signal-level
/// estimate.
pub fn validate_fd_cellular(
    scn: &CellularScenario,
    ue_modes: &[ApMode],
    realizations: usize,
    seed: u64,
) -> Result<ValidationReport> {
    use crate::cellular::{fd_dl_terms, fd_ul_terms};
    let est = estimate_cellular(scn, ue_modes, Activity::FULL_DUPLEX, realizations, seed)?;
    let kappa = scn.kappa(ue_modes);
    let mut checks = Vec::new();
    for u in 0..scn.num_ues() {
        if let Some(t) = est.ul[u] {
            checks.push(SinrCheck {
                direction: ApMode::Ul,
                ue: u,
                closed_form: fd_ul_terms(scn, ue_modes, &kappa, Activity::FULL_DUPLEX, u).sinr(),
                monte_carlo: t.sinr(),
            });
        }
        if let Some(t) = est.dl[u] {
            checks.push(SinrCheck {
                direction: ApMode::Dl,
                ue: u,
                closed_form: fd_dl_terms(scn, ue_modes, &kappa, Activity::FULL_DUPLEX, u).sinr(),
                monte_carlo: t.sinr(),
            });
        }
    }
    Ok(ValidationReport { realizations, checks })
}

/// Small random cell-free instances for closed-form validation: 3-4 APs
/// with 2-4 antennas, 4-6 UEs on one pilot fewer than UEs, a 100 m square,
/// 30 dB pilot SNR and both kinds of cross-link interference. Pilots come
/// from the iterative allocation and AP modes from the greedy scheduler, as
/// in a campaign drop. Drops leaving a scheduled UE below −30 dB SINR are
/// redrawn: the sample mean of such a UE's effective gain needs far more
/// than 10^5 draws to settle within a few percent.
pub fn standard_fixtures(count: usize, seed: u64) -> Result<Vec<(Scenario, Schedule)>> {
    use crate::closed_form::PowerConfig;
    use crate::geometry::{build_geometry, NetworkConfig};
    use crate::pilots::{iterative_allocation, random_assignment, PilotAllocParams};
    use crate::scheduler::{greedy_schedule, objective_terms};

    const MIN_SINR: f64 = 1e-3;
    let draw = |rng: &mut crate::rng::SimRng| -> Result<(Scenario, Schedule)> {
        let m = rng.random_range(3..=4);
        let n = rng.random_range(2..=4);
        let k = rng.random_range(4..=6);
        let cli = [-30.0, -20.0, -10.0][rng.random_range(0..3)];
        let c = NetworkConfig::new(100.0, m, n, k).with_cli_db(Some(cli));
        let g = build_geometry(&c, rng)?;
        let tau_p = k - 1;
        let pilot = PilotConfig::uniform(200, tau_p, k, 1000.0);
        let initial = random_assignment(k, tau_p, rng)?;
        let assignment = iterative_allocation(&g, &pilot, &initial, &PilotAllocParams::default())?.assignment;
        let scn = Scenario::new(g, pilot, assignment, PowerConfig::from_snr_db(m, k, 10.0, 10.0, 1.0))?;
        let ue_modes = Schedule::ue_demand(k, 0.5);
        let schedule = greedy_schedule(&objective_terms(&scn, &ue_modes))?.schedule;
        Ok((scn, schedule))
    };
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, i as u64, Stream::Geometry);
            loop {
                let (scn, schedule) = draw(&mut rng)?;
                let ul = schedule.ue_ul().into_iter().map(|k| ul_sinr_mrc(&scn, &schedule, k));
                let dl = schedule.ue_dl().into_iter().map(|n| dl_sinr_mfp(&scn, &schedule, n));
                if ul.chain(dl).all(|s| s >= MIN_SINR) {
                    return Ok((scn, schedule));
                }
            }
        })
        .collect()
}
