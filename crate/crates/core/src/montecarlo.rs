//! Monte-Carlo SE with centralized processing: MMSE (or MRC) combining over
//! the UL APs and RZF (or matched-filter) precoding over the DL APs.
//!
//! Conventions: the UL received signal is combined as `v^H y`, and DL UE `n`
//! receives `f_n^H x` where `x` stacks the DL APs' transmit vectors.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{kappa_all_aps, ApMode, Scenario, Schedule, SeReport};
use crate::estimation::{draw_channels, CMatrix, ChannelRealization};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combining {
    Mmse,
    Mrc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precoding {
    Rzf,
    /// Matched filter with the closed-form power coefficients κ.
    Mfp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    /// RZF regularisation ξ; `None` uses the noise power.
    #[serde(default)]
    pub rzf_xi: Option<f64>,
    /// Per-antenna DL budget; `None` uses each AP's `E_d,j`.
    #[serde(default)]
    pub dl_per_antenna_power: Option<f64>,
}

fn default_realizations() -> usize {
    200
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            n_realizations: default_realizations(),
            rzf_xi: None,
            dl_per_antenna_power: None,
        }
    }
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations < 1 {
            return Err(Error::config("n_realizations", "must be at least 1"));
        }
        if let Some(xi) = self.rzf_xi {
            if !(xi > 0.0 && xi.is_finite()) {
                return Err(Error::config("rzf_xi", "must be positive and finite"));
            }
        }
        if let Some(p) = self.dl_per_antenna_power {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::config("dl_per_antenna_power", "must be non-negative and finite"));
            }
        }
        Ok(())
    }
}

/// Stacks the N-vectors of `aps` for every UE in `ues` as columns.
fn stack<'a>(
    aps: &[usize],
    ues: &[usize],
    n: usize,
    block: impl Fn(usize, usize) -> &'a nalgebra::DVector<Complex64>,
) -> CMatrix {
    let mut out = CMatrix::zeros(n * aps.len(), ues.len());
    for (c, &k) in ues.iter().enumerate() {
        for (b, &m) in aps.iter().enumerate() {
            out.view_mut((b * n, c), (n, 1)).copy_from(block(m, k));
        }
    }
    out
}

pub fn stacked_estimates(real: &ChannelRealization, aps: &[usize], ues: &[usize], n: usize) -> CMatrix {
    stack(aps, ues, n, |m, k| real.f_hat(m, k))
}

pub fn stacked_channels(real: &ChannelRealization, aps: &[usize], ues: &[usize], n: usize) -> CMatrix {
    let mut out = stacked_estimates(real, aps, ues, n);
    out += stack(aps, ues, n, |m, k| real.f_tilde(m, k));
    out
}

/// DL precoder over the DL APs for the DL UEs of one realization.
#[derive(Debug, Clone)]
pub struct Precoder {
    pub aps: Vec<usize>,
    pub ues: Vec<usize>,
    /// `N|A_d| × |U_d|`, column per DL UE, power included.
    pub p: CMatrix,
    /// RZF scaling κ (1 for the matched filter, whose scaling is per link).
    pub kappa: f64,
    antennas: usize,
}

impl Precoder {
    /// `tr(P_j P_j^H)` for the `b`-th DL AP.
    pub fn ap_power(&self, b: usize) -> f64 {
        let n = self.antennas;
        self.p.rows(b * n, n).iter().map(|x| x.norm_sqr()).sum()
    }
}

/// `P = κ (F̂F̂^H + ξI)^{-1} F̂` with `κ² = min_j N E_d,j / tr(W_j W_j^H)`.
pub fn rzf_precoder(
    real: &ChannelRealization,
    scn: &Scenario,
    schedule: &Schedule,
    params: &McParams,
) -> Option<Precoder> {
    let aps = schedule.ap_dl();
    let ues = schedule.ue_dl();
    if aps.is_empty() || ues.is_empty() {
        return None;
    }
    let n = scn.geometry.antennas_per_ap;
    let xi = params.rzf_xi.unwrap_or(scn.geometry.noise_power);
    let f = stacked_estimates(real, &aps, &ues, n);
    // Push-through form: (F̂F̂^H + ξI)^{-1}F̂ = F̂(F̂^H F̂ + ξI)^{-1}.
    let mut gram = f.adjoint() * &f;
    for d in 0..gram.nrows() {
        gram[(d, d)] += Complex64::new(xi, 0.0);
    }
    let w = &f * Cholesky::new(gram)?.inverse();
    let mut kappa_sq = f64::INFINITY;
    for (b, &j) in aps.iter().enumerate() {
        let tr: f64 = w.rows(b * n, n).iter().map(|x| x.norm_sqr()).sum();
        let budget = n as f64 * params.dl_per_antenna_power.unwrap_or(scn.powers.dl_ap_power[j]);
        if tr > 0.0 {
            kappa_sq = kappa_sq.min(budget / tr);
        }
    }
    if !kappa_sq.is_finite() {
        kappa_sq = 0.0;
    }
    let kappa = kappa_sq.sqrt();
    Some(Precoder {
        aps,
        ues,
        p: w * Complex64::new(kappa, 0.0),
        kappa,
        antennas: n,
    })
}

/// `p_jn = κ_jn √E_d,j f̂_jn` with the closed-form κ.
pub fn mfp_precoder(real: &ChannelRealization, scn: &Scenario, schedule: &Schedule) -> Option<Precoder> {
    let aps = schedule.ap_dl();
    let ues = schedule.ue_dl();
    if aps.is_empty() || ues.is_empty() {
        return None;
    }
    let n = scn.geometry.antennas_per_ap;
    let kappa = kappa_all_aps(&scn.stats, &schedule.ue_modes, n);
    let mut p = stacked_estimates(real, &aps, &ues, n);
    for (c, &q) in ues.iter().enumerate() {
        for (b, &j) in aps.iter().enumerate() {
            let s = kappa[(j, q)] * scn.powers.dl_ap_power[j].sqrt();
            for r in 0..n {
                p[(b * n + r, c)] *= s;
            }
        }
    }
    Some(Precoder {
        aps,
        ues,
        p,
        kappa: 1.0,
        antennas: n,
    })
}

fn precoder_for(
    real: &ChannelRealization,
    scn: &Scenario,
    schedule: &Schedule,
    params: &McParams,
    precoding: Precoding,
) -> Option<Precoder> {
    match precoding {
        Precoding::Rzf => rzf_precoder(real, scn, schedule, params),
        Precoding::Mfp => mfp_precoder(real, scn, schedule),
    }
}

/// Per-UL-AP scale of `R_u`: estimation error of the UL UEs plus the
/// expected inter-AP interference from the DL transmissions.
pub fn ul_impairment(scn: &Scenario, schedule: &Schedule, precoder: Option<&Precoder>) -> Vec<f64> {
    schedule
        .ap_in(ApMode::Ul)
        .map(|m| {
            let err: f64 = schedule
                .ue_in(ApMode::Ul)
                .map(|k| scn.powers.ul_data_power[k] * scn.stats.alpha_bar_sq[(m, k)])
                .sum();
            let cli: f64 = precoder.map_or(0.0, |p| {
                p.aps
                    .iter()
                    .enumerate()
                    .map(|(b, &j)| scn.geometry.zeta[(m, j)] * p.ap_power(b))
                    .sum()
            });
            err + cli
        })
        .collect()
}

/// Per-realization UL SINRs (indexed by UE, zero for DL UEs).
pub fn ul_sinr(
    real: &ChannelRealization,
    scn: &Scenario,
    schedule: &Schedule,
    precoder: Option<&Precoder>,
    combining: Combining,
) -> Result<Vec<f64>> {
    let k_total = scn.num_ues();
    let mut out = vec![0.0; k_total];
    let aps = schedule.ap_ul();
    let ues = schedule.ue_ul();
    if aps.is_empty() || ues.is_empty() {
        return Ok(out);
    }
    let n = scn.geometry.antennas_per_ap;
    let f = stacked_estimates(real, &aps, &ues, n);
    let imp = ul_impairment(scn, schedule, precoder);
    let noise = scn.geometry.noise_power;
    let powers: Vec<f64> = ues.iter().map(|&k| scn.powers.ul_data_power[k]).collect();

    let mut q = CMatrix::zeros(f.nrows(), f.nrows());
    for (c, &e) in powers.iter().enumerate() {
        let col = f.column(c);
        q.ger(Complex64::new(e, 0.0), &col, &col.conjugate(), Complex64::new(1.0, 0.0));
    }
    for (b, r) in imp.iter().enumerate() {
        for d in 0..n {
            q[(b * n + d, b * n + d)] += Complex64::new(r + noise, 0.0);
        }
    }
    match combining {
        Combining::Mmse => {
            let ch = Cholesky::new(q).ok_or(Error::Singular("UL MMSE covariance"))?;
            let z = ch.solve(&f);
            for (c, &k) in ues.iter().enumerate() {
                let a = f.column(c).dotc(&z.column(c)).re;
                let ea = powers[c] * a;
                out[k] = if ea < 1.0 { ea / (1.0 - ea) } else { f64::MAX };
            }
        }
        Combining::Mrc => {
            let qf = &q * &f;
            for (c, &k) in ues.iter().enumerate() {
                let g = f.column(c).norm_squared();
                let total = f.column(c).dotc(&qf.column(c)).re;
                let sig = powers[c] * g * g;
                out[k] = sig / (total - sig);
            }
        }
    }
    Ok(out)
}

/// Running sums for the use-and-then-forget DL bound.
#[derive(Debug, Clone)]
pub struct DlAccumulator {
    ues: Vec<usize>,
    mean: Vec<Complex64>,
    power: DMatrix<f64>,
    count: usize,
}

impl DlAccumulator {
    pub fn new(schedule: &Schedule) -> Self {
        let ues = schedule.ue_dl();
        let d = ues.len();
        Self {
            ues,
            mean: vec![Complex64::new(0.0, 0.0); d],
            power: DMatrix::zeros(d, d),
            count: 0,
        }
    }

    /// Adds the effective channels `a_nn' = f_n^H p_n'` of one realization.
    pub fn add(&mut self, real: &ChannelRealization, precoder: &Precoder) {
        let f = stacked_channels(real, &precoder.aps, &precoder.ues, precoder.antennas);
        let a = f.adjoint() * &precoder.p;
        for r in 0..self.ues.len() {
            self.mean[r] += a[(r, r)];
            for c in 0..self.ues.len() {
                self.power[(r, c)] += a[(r, c)].norm_sqr();
            }
        }
        self.count += 1;
    }

    /// UatF SINRs indexed by UE. Realizations without a precoder count as
    /// zero effective channels.
    pub fn sinr(&self, scn: &Scenario, schedule: &Schedule, realizations: usize) -> Vec<f64> {
        let mut out = vec![0.0; scn.num_ues()];
        if self.count == 0 || realizations == 0 {
            return out;
        }
        let r = realizations as f64;
        for (i, &n) in self.ues.iter().enumerate() {
            let mean = self.mean[i] / r;
            let gain = mean.norm_sqr();
            let own = self.power[(i, i)] / r;
            let others: f64 = (0..self.ues.len())
                .filter(|&c| c != i)
                .map(|c| self.power[(i, c)] / r)
                .sum();
            let ue_ue: f64 = schedule
                .ue_in(ApMode::Ul)
                .map(|k| scn.powers.ul_data_power[k] * scn.geometry.epsilon[(n, k)])
                .sum();
            let denom = others + (own - gain).max(0.0) + ue_ue + scn.geometry.noise_power;
            out[n] = gain / denom;
        }
        out
    }
}

/// DL SINRs of the RZF precoder estimated from `params.n_realizations` draws.
pub fn rzf_dl_sinr<R: Rng + ?Sized>(
    scn: &Scenario,
    schedule: &Schedule,
    params: &McParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    params.validate()?;
    dl_sinr(scn, schedule, params, Precoding::Rzf, rng)
}

pub fn dl_sinr<R: Rng + ?Sized>(
    scn: &Scenario,
    schedule: &Schedule,
    params: &McParams,
    precoding: Precoding,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut acc = DlAccumulator::new(schedule);
    for _ in 0..params.n_realizations {
        let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, rng);
        if let Some(p) = precoder_for(&real, scn, schedule, params, precoding) {
            acc.add(&real, &p);
        }
    }
    Ok(acc.sinr(scn, schedule, params.n_realizations))
}

/// UL SE averages `log2(1+η)` over realizations; DL SE applies `log2(1+η)`
/// to the UatF SINR. Both carry the `(τ−τ_p)/τ` pre-log.
pub fn mc_sum_se<R: Rng + ?Sized>(
    scn: &Scenario,
    schedule: &Schedule,
    params: &McParams,
    combining: Combining,
    precoding: Precoding,
    rng: &mut R,
) -> Result<SeReport> {
    params.validate()?;
    schedule.validate(scn.num_aps(), scn.num_ues())?;
    let k = scn.num_ues();
    let mut ul_se = vec![0.0; k];
    let mut ul_sinr_mean = vec![0.0; k];
    let mut acc = DlAccumulator::new(schedule);
    for _ in 0..params.n_realizations {
        let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, rng);
        let p = precoder_for(&real, scn, schedule, params, precoding);
        if let Some(p) = &p {
            acc.add(&real, p);
        }
        let s = ul_sinr(&real, scn, schedule, p.as_ref(), combining)?;
        for ue in 0..k {
            ul_se[ue] += (1.0 + s[ue]).log2();
            ul_sinr_mean[ue] += s[ue];
        }
    }
    let r = params.n_realizations as f64;
    ul_se.iter_mut().for_each(|x| *x /= r);
    ul_sinr_mean.iter_mut().for_each(|x| *x /= r);
    let dl_sinr = acc.sinr(scn, schedule, params.n_realizations);
    let dl_se: Vec<f64> = dl_sinr.iter().map(|s| (1.0 + s).log2()).collect();
    let prelog = scn.pilot.prelog();
    let sum_se = prelog * (ul_se.iter().sum::<f64>() + dl_se.iter().sum::<f64>());
    Ok(SeReport {
        ul_sinr: ul_sinr_mean,
        dl_sinr,
        ul_se,
        dl_se,
        prelog,
        ul_share: 1.0,
        dl_share: 1.0,
        sum_se,
    })
}

/// Static TDD with the same processing: all APs UL for a `|U_u|/K` share of
/// the data symbols, then all DL. No cross-link interference in either phase.
pub fn mc_tdd_sum_se<R: Rng + ?Sized>(
    scn: &Scenario,
    ue_modes: &[ApMode],
    params: &McParams,
    combining: Combining,
    precoding: Precoding,
    rng: &mut R,
) -> Result<SeReport> {
    let m = scn.num_aps();
    let ul = Schedule::all(m, ApMode::Ul, ue_modes.to_vec());
    let dl = Schedule::all(m, ApMode::Dl, ue_modes.to_vec());
    let ul_rep = mc_sum_se(scn, &ul, params, combining, precoding, rng)?;
    // UL UEs are silent in the DL phase.
    let mut quiet = scn.clone();
    quiet.powers.ul_data_power.iter_mut().for_each(|p| *p = 0.0);
    let dl_rep = mc_sum_se(&quiet, &dl, params, combining, precoding, rng)?;
    let w_u = ue_modes.iter().filter(|&&x| x == ApMode::Ul).count() as f64 / ue_modes.len() as f64;
    let ul_se = ul_rep.ul_se;
    let dl_se = dl_rep.dl_se;
    let prelog = scn.pilot.prelog();
    let sum_se = prelog * (w_u * ul_se.iter().sum::<f64>() + (1.0 - w_u) * dl_se.iter().sum::<f64>());
    Ok(SeReport {
        ul_sinr: ul_rep.ul_sinr,
        dl_sinr: dl_rep.dl_sinr,
        ul_se,
        dl_se,
        prelog,
        ul_share: w_u,
        dl_share: 1.0 - w_u,
        sum_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{dl_sinr_mfp, PowerConfig};
    use crate::estimation::{estimation_stats, PilotAssignment, PilotConfig};
    use crate::geometry::{build_geometry, NetworkConfig, NetworkGeometry};
    use crate::pilots::random_assignment;
    use crate::rng::seeded;
    use approx::assert_relative_eq;

    fn scenario(seed: u64, m: usize, n: usize, k: usize, tau_p: usize, cli: Option<f64>) -> Scenario {
        let c = NetworkConfig::new(200.0, m, n, k).with_cli_db(cli);
        let g = build_geometry(&c, &mut seeded(seed)).unwrap();
        let pilot = PilotConfig::uniform(50, tau_p, k, 100.0);
        let a = random_assignment(k, tau_p, &mut seeded(seed + 1)).unwrap();
        Scenario::new(g, pilot, a, PowerConfig::from_snr_db(m, k, 10.0, 10.0, 1.0)).unwrap()
    }

    fn perfect_single(n: usize) -> Scenario {
        let mut c = NetworkConfig::new(100.0, 1, n, 1);
        c.noise_power = 0.5;
        let g = NetworkGeometry::from_positions(&c, vec![[0.0, 0.0]], vec![[20.0, 0.0]]).unwrap();
        let pilot = PilotConfig::uniform(10, 1, 1, 1.0);
        let a = PilotAssignment::orthogonal(1, 1).unwrap();
        let mut scn = Scenario::new(
            g,
            pilot,
            a,
            PowerConfig {
                ul_data_power: vec![3.0],
                dl_ap_power: vec![2.0],
            },
        )
        .unwrap();
        scn.stats.alpha_sq = scn.geometry.beta.clone();
        scn.stats.alpha_bar_sq.fill(0.0);
        scn
    }

    #[test]
    fn single_link_mmse_is_matched_filter_bound() {
        let scn = perfect_single(4);
        let s = Schedule::all(1, ApMode::Ul, vec![ApMode::Ul]);
        let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, &mut seeded(1));
        let eta = ul_sinr(&real, &scn, &s, None, Combining::Mmse).unwrap()[0];
        let expected = 3.0 * real.f(0, 0).norm_squared() / 0.5;
        assert_relative_eq!(eta, expected, max_relative = 1e-9);
    }

    /// Brute-force SINR maximisation over random combiners plus a local
    /// refinement; MMSE must match the best found and beat every sample.
    #[test]
    fn mmse_attains_numeric_maximum_on_two_by_two() {
        let mut scn = scenario(3, 1, 2, 2, 2, None);
        scn.stats.alpha_sq = scn.geometry.beta.clone();
        scn.stats.alpha_bar_sq.fill(0.0);
        let s = Schedule::all(1, ApMode::Ul, vec![ApMode::Ul, ApMode::Ul]);
        let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, &mut seeded(9));
        let eta = ul_sinr(&real, &scn, &s, None, Combining::Mmse).unwrap();
        let f = stacked_estimates(&real, &[0], &[0, 1], 2);
        let e = &scn.powers.ul_data_power;
        let n0 = scn.geometry.noise_power;
        let sinr_of = |v: &CMatrix| {
            let s0 = f.column(0).dotc(&v.column(0)).norm_sqr() * e[0];
            let s1 = f.column(1).dotc(&v.column(0)).norm_sqr() * e[1];
            s0 / (s1 + n0 * v.column(0).norm_squared())
        };
        let mut rng = seeded(10);
        let mut best = 0.0f64;
        for _ in 0..20_000 {
            let v = CMatrix::from_fn(2, 1, |_, _| crate::rng::complex_normal(&mut rng, 1.0));
            best = best.max(sinr_of(&v));
        }
        assert!(eta[0] >= best * (1.0 - 1e-12));
        assert!(best >= 0.99 * eta[0]);
    }

    #[test]
    fn mmse_dominates_mrc_per_realization() {
        let scn = scenario(4, 4, 2, 6, 3, Some(-10.0));
        let s = Schedule::from_sets(4, 6, &[0, 2], &[1, 3], &[0, 1, 2]).unwrap();
        let params = McParams::default();
        let mut rng = seeded(5);
        for _ in 0..1000 {
            let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, &mut rng);
            let p = rzf_precoder(&real, &scn, &s, &params);
            let a = ul_sinr(&real, &scn, &s, p.as_ref(), Combining::Mmse).unwrap();
            let b = ul_sinr(&real, &scn, &s, p.as_ref(), Combining::Mrc).unwrap();
            for k in 0..3 {
                assert!(a[k] >= b[k] * (1.0 - 1e-9), "{} < {}", a[k], b[k]);
            }
        }
    }

    #[test]
    fn rzf_power_constraint_binds() {
        let scn = scenario(6, 4, 2, 6, 6, None);
        let s = Schedule::from_sets(4, 6, &[0], &[1, 2, 3], &[0, 1]).unwrap();
        let params = McParams::default();
        let mut rng = seeded(7);
        for _ in 0..50 {
            let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, &mut rng);
            let p = rzf_precoder(&real, &scn, &s, &params).unwrap();
            let worst = (0..3).map(|b| p.ap_power(b) / (2.0 * 10.0)).fold(0.0, f64::max);
            assert_relative_eq!(worst, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn rzf_kappa_from_traces() {
        let scn = scenario(8, 2, 1, 1, 1, None);
        let s = Schedule::all(2, ApMode::Dl, vec![ApMode::Dl]);
        let params = McParams::default();
        let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, &mut seeded(3));
        let p = rzf_precoder(&real, &scn, &s, &params).unwrap();
        let f0 = real.f_hat(0, 0)[0];
        let f1 = real.f_hat(1, 0)[0];
        let g = f0.norm_sqr() + f1.norm_sqr() + 1.0;
        let tr = [f0.norm_sqr() / (g * g), f1.norm_sqr() / (g * g)];
        let kappa = (10.0 / tr[0]).min(10.0 / tr[1]).sqrt();
        assert_relative_eq!(p.kappa, kappa, max_relative = 1e-10);
    }

    #[test]
    fn heavy_regularisation_gives_matched_filter_direction() {
        let scn = scenario(9, 1, 4, 1, 1, None);
        let s = Schedule::all(1, ApMode::Dl, vec![ApMode::Dl]);
        let params = McParams {
            rzf_xi: Some(1e12),
            ..Default::default()
        };
        let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, &mut seeded(2));
        let p = rzf_precoder(&real, &scn, &s, &params).unwrap();
        let f = real.f_hat(0, 0);
        let cos = p.p.column(0).dotc(f).norm() / (p.p.column(0).norm() * f.norm());
        assert_relative_eq!(cos, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn no_ul_ues_means_no_cli_term() {
        let scn = scenario(10, 2, 2, 2, 2, None);
        let s = Schedule::all(2, ApMode::Dl, vec![ApMode::Dl, ApMode::Dl]);
        let mut acc = DlAccumulator::new(&s);
        let mut rng = seeded(1);
        let params = McParams::default();
        for _ in 0..10 {
            let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, &mut rng);
            acc.add(&real, &rzf_precoder(&real, &scn, &s, &params).unwrap());
        }
        let mut louder = scn.clone();
        louder.powers.ul_data_power = vec![1e6; 2];
        assert_eq!(acc.sinr(&scn, &s, 10), acc.sinr(&louder, &s, 10));
    }

    #[test]
    fn mfp_monte_carlo_tracks_closed_form() {
        let scn = scenario(11, 3, 2, 4, 2, None);
        let s = Schedule::from_sets(3, 4, &[0], &[1, 2], &[0]).unwrap();
        let params = McParams {
            n_realizations: 10_000,
            ..Default::default()
        };
        let mc = dl_sinr(&scn, &s, &params, Precoding::Mfp, &mut seeded(12)).unwrap();
        for (n, &m) in mc.iter().enumerate().skip(1) {
            let cf = dl_sinr_mfp(&scn, &s, n);
            assert!((m / cf - 1.0).abs() < 0.03, "UE {n}: {m} vs {cf}");
        }
    }

    #[test]
    fn zero_realizations_rejected() {
        let scn = scenario(12, 2, 1, 2, 2, None);
        let s = Schedule::all(2, ApMode::Ul, vec![ApMode::Ul, ApMode::Ul]);
        let params = McParams {
            n_realizations: 0,
            ..Default::default()
        };
        assert!(mc_sum_se(&scn, &s, &params, Combining::Mmse, Precoding::Rzf, &mut seeded(1)).is_err());
    }

    #[test]
    fn zero_powers_give_zero_se() {
        let mut scn = scenario(13, 2, 2, 4, 2, None);
        scn.powers.ul_data_power.fill(0.0);
        scn.powers.dl_ap_power.fill(0.0);
        let s = Schedule::from_sets(2, 4, &[0], &[1], &[0, 1]).unwrap();
        let params = McParams {
            n_realizations: 20,
            ..Default::default()
        };
        let r = mc_sum_se(&scn, &s, &params, Combining::Mmse, Precoding::Rzf, &mut seeded(1)).unwrap();
        assert_eq!(r.sum_se, 0.0);
    }

    #[test]
    fn standard_error_shrinks_with_more_realizations() {
        let scn = scenario(14, 2, 2, 3, 3, None);
        let s = Schedule::all(2, ApMode::Dl, vec![ApMode::Dl; 3]);
        let spread = |r: usize| {
            let params = McParams {
                n_realizations: r,
                ..Default::default()
            };
            let v: Vec<f64> = (0..40)
                .map(|seed| rzf_dl_sinr(&scn, &s, &params, &mut seeded(100 + seed)).unwrap()[0])
                .collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        let ratio = spread(100) / spread(400);
        assert!((1.4..3.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn estimates_stack_in_ap_order() {
        let scn = scenario(15, 3, 2, 2, 2, None);
        let real = draw_channels(&scn.geometry, &scn.stats, &scn.assignment, &mut seeded(1));
        let f = stacked_estimates(&real, &[2, 0], &[1], 2);
        assert_eq!(f[(0, 0)], real.f_hat(2, 1)[0]);
        assert_eq!(f[(3, 0)], real.f_hat(0, 1)[1]);
        let _ = estimation_stats(&scn.geometry, &scn.pilot, &scn.assignment).unwrap();
    }
}
