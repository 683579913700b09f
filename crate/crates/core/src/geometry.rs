//! Network layouts, pathloss and cross-link interference variances.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{db_to_linear, Error, Result};

pub type Point = [f64; 2];

/// Static description of a deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub area_side_m: f64,
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    pub num_ues: usize,
    #[serde(default = "default_exponent")]
    pub pathloss_exponent: f64,
    #[serde(default = "default_reference")]
    pub reference_distance_m: f64,
    #[serde(default = "default_noise")]
    pub noise_power: f64,
    /// Residual inter-AP suppression in dB on top of the inter-AP pathloss.
    /// `None` disables AP-AP cross-link interference.
    #[serde(default)]
    pub cli_residual_db: Option<f64>,
}

fn default_exponent() -> f64 {
    -3.76
}
fn default_reference() -> f64 {
    10.0
}
fn default_noise() -> f64 {
    1.0
}

impl NetworkConfig {
    pub fn new(area_side_m: f64, num_aps: usize, antennas_per_ap: usize, num_ues: usize) -> Self {
        Self {
            area_side_m,
            num_aps,
            antennas_per_ap,
            num_ues,
            pathloss_exponent: default_exponent(),
            reference_distance_m: default_reference(),
            noise_power: default_noise(),
            cli_residual_db: None,
        }
    }

    pub fn with_cli_db(mut self, db: Option<f64>) -> Self {
        self.cli_residual_db = db;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_aps < 1 {
            return Err(Error::config("num_aps", "must be at least 1"));
        }
        if self.antennas_per_ap < 1 {
            return Err(Error::config("antennas_per_ap", "must be at least 1"));
        }
        if self.num_ues < 1 {
            return Err(Error::config("num_ues", "must be at least 1"));
        }
        if !(self.area_side_m > 0.0 && self.area_side_m.is_finite()) {
            return Err(Error::config("area_side_m", "must be positive and finite"));
        }
        if !(self.reference_distance_m > 0.0 && self.reference_distance_m.is_finite()) {
            return Err(Error::config("reference_distance_m", "must be positive and finite"));
        }
        if !self.pathloss_exponent.is_finite() || self.pathloss_exponent > 0.0 {
            return Err(Error::config("pathloss_exponent", "must be finite and non-positive"));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(Error::config("noise_power", "must be non-negative and finite"));
        }
        if let Some(db) = self.cli_residual_db {
            if db.is_nan() || db == f64::INFINITY {
                return Err(Error::config("cli_residual_db", "must be a number below +inf"));
            }
        }
        Ok(())
    }

    /// Linear CLI suppression factor; zero when disabled.
    pub fn cli_factor(&self) -> f64 {
        self.cli_residual_db.map_or(0.0, db_to_linear)
    }
}

/// Fully populated layout with its large-scale statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGeometry {
    pub area_side_m: f64,
    pub antennas_per_ap: usize,
    pub noise_power: f64,
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    /// M×K large-scale fading.
    #[serde(with = "crate::matrix_serde")]
    pub beta: DMatrix<f64>,
    /// M×M residual AP-AP interference variances (zero diagonal).
    #[serde(with = "crate::matrix_serde")]
    pub zeta: DMatrix<f64>,
    /// K×K UE-UE interference variances (zero diagonal).
    #[serde(with = "crate::matrix_serde")]
    pub epsilon: DMatrix<f64>,
}

/// `⌈√M⌉×⌈√M⌉` cell-centred grid, row-major from the bottom-left, truncated to M.
pub fn place_aps_grid(num_aps: usize, area_side_m: f64) -> Vec<Point> {
    let side = (1..).find(|s| s * s >= num_aps).unwrap_or(1);
    let step = area_side_m / side as f64;
    (0..num_aps)
        .map(|i| {
            let (row, col) = (i / side, i % side);
            [(col as f64 + 0.5) * step, (row as f64 + 0.5) * step]
        })
        .collect()
}

pub fn drop_ues<R: Rng + ?Sized>(num_ues: usize, area_side_m: f64, rng: &mut R) -> Vec<Point> {
    (0..num_ues)
        .map(|_| {
            let x: f64 = rng.random::<f64>() * area_side_m;
            let y: f64 = rng.random::<f64>() * area_side_m;
            [x, y]
        })
        .collect()
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `(max(d, d_ref) / d_ref)^exponent`.
pub fn pathloss(d: f64, config: &NetworkConfig) -> f64 {
    let d_ref = config.reference_distance_m;
    (d.max(d_ref) / d_ref).powf(config.pathloss_exponent)
}

pub fn build_geometry<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<NetworkGeometry> {
    config.validate()?;
    let ues = drop_ues(config.num_ues, config.area_side_m, rng);
    NetworkGeometry::from_positions(config, place_aps_grid(config.num_aps, config.area_side_m), ues)
}

impl NetworkGeometry {
    /// Builds a geometry from explicit coordinates. The AP and UE counts in
    /// `config` are ignored in favour of the supplied positions.
    pub fn from_positions(config: &NetworkConfig, aps: Vec<Point>, ues: Vec<Point>) -> Result<Self> {
        let mut check = config.clone();
        check.num_aps = aps.len();
        check.num_ues = ues.len();
        check.validate()?;

        let (m, k) = (aps.len(), ues.len());
        let beta = DMatrix::from_fn(m, k, |i, j| pathloss(distance(aps[i], ues[j]), config));
        let factor = config.cli_factor();
        let zeta = DMatrix::from_fn(m, m, |i, j| {
            if i == j || factor == 0.0 {
                0.0
            } else {
                pathloss(distance(aps[i], aps[j]), config) * factor
            }
        });
        let epsilon = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                0.0
            } else {
                pathloss(distance(ues[i], ues[j]), config)
            }
        });
        Ok(Self {
            area_side_m: config.area_side_m,
            antennas_per_ap: config.antennas_per_ap,
            noise_power: config.noise_power,
            ap_positions: aps,
            ue_positions: ues,
            beta,
            zeta,
            epsilon,
        })
    }

    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    /// Index of the closest AP to UE `k` (lowest index on ties).
    pub fn nearest_ap(&self, k: usize) -> usize {
        let ue = self.ue_positions[k];
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (m, &ap) in self.ap_positions.iter().enumerate() {
            let d = distance(ap, ue);
            if d < best_d {
                best = m;
                best_d = d;
            }
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
