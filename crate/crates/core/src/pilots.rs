//! Pilot assignment: random reuse, cell-based reuse and the iterative
//! min-α improvement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::estimation::{link_stats, PilotAssignment, PilotConfig};
use crate::geometry::{distance, place_aps_grid, NetworkGeometry, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotAllocParams {
    #[serde(default = "default_n_iter")]
    pub n_iter: usize,
    /// Stop once the minimum α reaches this value. `None` disables the check.
    #[serde(default)]
    pub alpha_threshold: Option<f64>,
}

fn default_n_iter() -> usize {
    1000
}

impl Default for PilotAllocParams {
    fn default() -> Self {
        Self {
            n_iter: default_n_iter(),
            alpha_threshold: None,
        }
    }
}

/// Each UE draws a pilot uniformly; `tau_p >= K` gives the orthogonal
/// assignment `k -> k` without consuming randomness.
pub fn random_assignment<R: Rng + ?Sized>(num_ues: usize, tau_p: usize, rng: &mut R) -> Result<PilotAssignment> {
    if tau_p < 1 {
        return Err(Error::config("tau_p", "must be at least 1"));
    }
    if tau_p >= num_ues {
        return PilotAssignment::from_pilot_indices((0..num_ues).collect(), tau_p);
    }
    let idx = (0..num_ues).map(|_| rng.random_range(0..tau_p)).collect();
    PilotAssignment::from_pilot_indices(idx, tau_p)
}

/// UE clusters around the centres of `num_cells` equal square cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellClusters {
    pub centers: Vec<Point>,
    pub cell_of: Vec<usize>,
    /// Position of each UE inside its cell, in UE index order.
    pub local_index: Vec<usize>,
    pub max_cluster: usize,
}

pub fn cluster_by_cells(ue_positions: &[Point], area_side_m: f64, num_cells: usize) -> Result<CellClusters> {
    let side = (num_cells as f64).sqrt().round() as usize;
    if num_cells < 1 || side * side != num_cells {
        return Err(Error::config("num_cells", "must be a positive square number"));
    }
    let centers = place_aps_grid(num_cells, area_side_m);
    let mut counts = vec![0usize; num_cells];
    let mut cell_of = Vec::with_capacity(ue_positions.len());
    let mut local_index = Vec::with_capacity(ue_positions.len());
    for &ue in ue_positions {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, &center) in centers.iter().enumerate() {
            let d = distance(center, ue);
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        cell_of.push(best);
        local_index.push(counts[best]);
        counts[best] += 1;
    }
    let max_cluster = counts.iter().copied().max().unwrap_or(0);
    Ok(CellClusters {
        centers,
        cell_of,
        local_index,
        max_cluster,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellularPilots {
    pub assignment: PilotAssignment,
    /// `max(tau_p, largest cluster)`.
    pub effective_tau_p: usize,
    pub clusters: CellClusters,
}

/// Orthogonal pilots inside each cell, reused across cells. The pilot length
/// grows to the largest cluster when a cell holds more than `tau_p` UEs.
pub fn cellular_assignment(geometry: &NetworkGeometry, tau_p: usize, num_cells: usize) -> Result<CellularPilots> {
    let clusters = cluster_by_cells(&geometry.ue_positions, geometry.area_side_m, num_cells)?;
    let effective_tau_p = tau_p.max(clusters.max_cluster).max(1);
    let assignment = PilotAssignment::from_pilot_indices(clusters.local_index.clone(), effective_tau_p)?;
    Ok(CellularPilots {
        assignment,
        effective_tau_p,
        clusters,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotAllocation {
    pub assignment: PilotAssignment,
    /// Minimum α after each accepted move, starting with the initial value.
    pub min_alpha_trace: Vec<f64>,
}

impl PilotAllocation {
    pub fn initial_min_alpha(&self) -> f64 {
        self.min_alpha_trace[0]
    }

    pub fn final_min_alpha(&self) -> f64 {
        *self.min_alpha_trace.last().unwrap()
    }

    pub fn moves(&self) -> usize {
        self.min_alpha_trace.len() - 1
    }
}

/// `α_{m*_k, k}` for every UE, with `m*_k` the nearest AP.
pub fn nearest_alphas(geometry: &NetworkGeometry, pilot: &PilotConfig, assignment: &PilotAssignment) -> Vec<f64> {
    (0..geometry.num_ues())
        .map(|k| nearest_alpha(geometry, pilot, assignment, geometry.nearest_ap(k), k))
        .collect()
}

fn nearest_alpha(
    geometry: &NetworkGeometry,
    pilot: &PilotConfig,
    assignment: &PilotAssignment,
    m: usize,
    k: usize,
) -> f64 {
    link_stats(&geometry.beta, geometry.noise_power, pilot, assignment, m, k)
        .1
        .sqrt()
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter().enumerate().fold(
        (0, f64::INFINITY),
        |best, (i, &x)| if x < best.1 { (i, x) } else { best },
    )
}

/// Repeatedly moves the UE with the weakest estimate to the pilot that
/// maximises its estimate quality, keeping the move only if the network-wide
/// minimum improves.
pub fn iterative_allocation(
    geometry: &NetworkGeometry,
    pilot: &PilotConfig,
    initial: &PilotAssignment,
    params: &PilotAllocParams,
) -> Result<PilotAllocation> {
    if params.n_iter < 1 {
        return Err(Error::config("n_iter", "must be at least 1"));
    }
    pilot.validate(geometry.num_ues())?;
    initial.validate(geometry.num_ues())?;
    let nearest: Vec<usize> = (0..geometry.num_ues()).map(|k| geometry.nearest_ap(k)).collect();
    let alphas = |a: &PilotAssignment| -> Vec<f64> {
        (0..geometry.num_ues())
            .map(|k| nearest_alpha(geometry, pilot, a, nearest[k], k))
            .collect()
    };

    let mut current = initial.clone();
    let (_, mut min_alpha) = argmin(&alphas(&current));
    let mut trace = vec![min_alpha];

    for _ in 0..params.n_iter {
        if params.alpha_threshold.is_some_and(|t| min_alpha >= t) {
            break;
        }
        let (k_star, _) = argmin(&alphas(&current));
        let home = current.pilot_of(k_star);
        let mut best_p = home;
        let mut best_a = f64::NEG_INFINITY;
        for p in 0..current.num_pilots() {
            let mut trial = current.clone();
            trial.reassign(k_star, p);
            let a = nearest_alpha(geometry, pilot, &trial, nearest[k_star], k_star);
            if a > best_a {
                best_a = a;
                best_p = p;
            }
        }
        if best_p == home {
            break;
        }
        let mut next = current.clone();
        next.reassign(k_star, best_p);
        let (_, next_min) = argmin(&alphas(&next));
        if next_min <= min_alpha {
            break;
        }
        current = next;
        min_alpha = next_min;
        trace.push(min_alpha);
    }
    Ok(PilotAllocation {
        assignment: current,
        min_alpha_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, NetworkConfig};
    use crate::rng::seeded;

    #[test]
    fn orthogonal_when_enough_pilots() {
        let a = random_assignment(5, 5, &mut seeded(1)).unwrap();
        assert_eq!(a.pilot_indices(), &[0, 1, 2, 3, 4]);
        assert!(a.groups().iter().all(|g| g.len() == 1));
    }

    #[test]
    fn single_pilot_groups_everyone() {
        let a = random_assignment(6, 1, &mut seeded(1)).unwrap();
        assert_eq!(a.groups()[0].len(), 6);
    }

    #[test]
    fn random_assignment_reproducible() {
        let a = random_assignment(100, 25, &mut seeded(9)).unwrap();
        let b = random_assignment(100, 25, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.groups().iter().map(Vec::len).sum::<usize>(), 100);
    }

    #[test]
    fn four_cells_small_clusters_share_no_pilot_inside_a_cell() {
        let c = NetworkConfig::new(1000.0, 4, 1, 4);
        let ues = vec![[100.0, 100.0], [900.0, 100.0], [100.0, 900.0], [900.0, 900.0]];
        let g = NetworkGeometry::from_positions(&c, place_aps_grid(4, 1000.0), ues).unwrap();
        let cp = cellular_assignment(&g, 2, 4).unwrap();
        assert_eq!(cp.effective_tau_p, 2);
        for (k, &cell) in cp.clusters.cell_of.iter().enumerate() {
            for n in cp.assignment.co_pilot(k) {
                assert_ne!(cp.clusters.cell_of[n], cell);
            }
        }
    }

    #[test]
    fn one_cell_is_round_robin() {
        let c = NetworkConfig::new(1000.0, 4, 1, 7);
        let g = build_geometry(&c, &mut seeded(2)).unwrap();
        let cp = cellular_assignment(&g, 3, 1).unwrap();
        assert_eq!(cp.effective_tau_p, 7);
        assert_eq!(cp.assignment.pilot_indices(), &[0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn effective_length_tracks_largest_cluster() {
        let c = NetworkConfig::new(1000.0, 16, 1, 100);
        let g = build_geometry(&c, &mut seeded(2024)).unwrap();
        let cp = cellular_assignment(&g, 25, 4).unwrap();
        let mut sizes = [0usize; 4];
        for &cell in &cp.clusters.cell_of {
            sizes[cell] += 1;
        }
        let largest = *sizes.iter().max().unwrap();
        assert_eq!(cp.effective_tau_p, largest.max(25));
        assert_eq!(sizes.iter().sum::<usize>(), 100);
    }

    #[test]
    fn non_square_cell_count_rejected() {
        let c = NetworkConfig::new(1000.0, 4, 1, 4);
        let g = build_geometry(&c, &mut seeded(2)).unwrap();
        assert!(cellular_assignment(&g, 2, 3).is_err());
    }

    fn two_pairs() -> (NetworkGeometry, PilotConfig) {
        let c = NetworkConfig::new(1000.0, 4, 1, 4);
        let ues = vec![[230.0, 250.0], [270.0, 250.0], [731.0, 750.0], [769.0, 750.0]];
        let g = NetworkGeometry::from_positions(&c, place_aps_grid(4, 1000.0), ues).unwrap();
        (g, PilotConfig::uniform(20, 2, 4, 100.0))
    }

    #[test]
    fn separates_near_pairs_and_matches_brute_force() {
        let (g, pilot) = two_pairs();
        let initial = PilotAssignment::from_pilot_indices(vec![0, 0, 1, 1], 2).unwrap();
        let out = iterative_allocation(&g, &pilot, &initial, &PilotAllocParams::default()).unwrap();
        let a = &out.assignment;
        assert_ne!(a.pilot_of(0), a.pilot_of(1));
        assert_ne!(a.pilot_of(2), a.pilot_of(3));

        let mut best = 0.0f64;
        for mask in 0..16usize {
            let idx = (0..4).map(|k| (mask >> k) & 1).collect();
            let cand = PilotAssignment::from_pilot_indices(idx, 2).unwrap();
            let m = nearest_alphas(&g, &pilot, &cand)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            best = best.max(m);
        }
        assert!((out.final_min_alpha() - best).abs() <= 1e-12 * best);
    }

    #[test]
    fn orthogonal_start_is_a_fixed_point() {
        let (g, _) = two_pairs();
        let pilot = PilotConfig::uniform(20, 4, 4, 100.0);
        let initial = PilotAssignment::orthogonal(4, 4).unwrap();
        let out = iterative_allocation(&g, &pilot, &initial, &PilotAllocParams::default()).unwrap();
        assert_eq!(out.assignment, initial);
        assert_eq!(out.moves(), 0);
    }

    #[test]
    fn single_pilot_cannot_move() {
        let (g, _) = two_pairs();
        let pilot = PilotConfig::uniform(20, 1, 4, 100.0);
        let initial = PilotAssignment::from_pilot_indices(vec![0; 4], 1).unwrap();
        let out = iterative_allocation(&g, &pilot, &initial, &PilotAllocParams::default()).unwrap();
        assert_eq!(out.assignment, initial);
    }

    #[test]
    fn trace_is_increasing_on_random_instances() {
        for seed in 0..20 {
            let c = NetworkConfig::new(1000.0, 16, 1, 20);
            let g = build_geometry(&c, &mut seeded(seed)).unwrap();
            let pilot = PilotConfig::uniform(20, 5, 20, 100.0);
            let init = random_assignment(20, 5, &mut seeded(seed + 100)).unwrap();
            let out = iterative_allocation(&g, &pilot, &init, &PilotAllocParams::default()).unwrap();
            assert!(out.min_alpha_trace.windows(2).all(|w| w[1] > w[0]));
            out.assignment.validate(20).unwrap();
        }
    }

    #[test]
    fn threshold_stops_early() {
        let (g, pilot) = two_pairs();
        let initial = PilotAssignment::from_pilot_indices(vec![0, 0, 1, 1], 2).unwrap();
        let params = PilotAllocParams {
            n_iter: 10,
            alpha_threshold: Some(0.0),
        };
        let out = iterative_allocation(&g, &pilot, &initial, &params).unwrap();
        assert_eq!(out.moves(), 0);
    }
}
