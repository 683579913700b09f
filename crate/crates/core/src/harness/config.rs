//! Experiment configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::NetworkConfig;
use crate::montecarlo::McParams;
use crate::pilots::PilotAllocParams;
use crate::scheduler::{SearchMetric, DEFAULT_EXHAUSTIVE_CAP};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    CfDtddGreedy,
    CfDtddExhaustive,
    CfTdd,
    CellularTdd,
    CellularFd,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::CfDtddGreedy,
        Scheme::CfDtddExhaustive,
        Scheme::CfTdd,
        Scheme::CellularTdd,
        Scheme::CellularFd,
    ];

    pub fn is_cellular(self) -> bool {
        matches!(self, Scheme::CellularTdd | Scheme::CellularFd)
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::CfDtddGreedy => "cf_dtdd_greedy",
            Scheme::CfDtddExhaustive => "cf_dtdd_exhaustive",
            Scheme::CfTdd => "cf_tdd",
            Scheme::CellularTdd => "cellular_tdd",
            Scheme::CellularFd => "cellular_fd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Processing {
    MrcMfp,
    MmseRzf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    Random,
    /// Random start refined by the iterative min-α reassignment.
    Iterative,
    /// Orthogonal inside equal square cells, reused across cells.
    Cellular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotSettings {
    pub tau: usize,
    pub tau_p: usize,
    #[serde(default = "default_pilot_snr")]
    pub pilot_snr_db: f64,
    #[serde(default = "default_allocation")]
    pub allocation: Allocation,
    #[serde(default = "default_n_iter")]
    pub n_iter: usize,
    #[serde(default)]
    pub alpha_threshold: Option<f64>,
    /// Cells for the cell-based allocation.
    #[serde(default = "default_pilot_cells")]
    pub cells: usize,
}

fn default_pilot_snr() -> f64 {
    20.0
}
fn default_allocation() -> Allocation {
    Allocation::Iterative
}
fn default_n_iter() -> usize {
    1000
}
fn default_pilot_cells() -> usize {
    4
}

impl PilotSettings {
    pub fn alloc_params(&self) -> PilotAllocParams {
        PilotAllocParams {
            n_iter: self.n_iter,
            alpha_threshold: self.alpha_threshold,
        }
    }
}

/// Data SNRs `E/N0` in dB: per UE in UL, per AP (or BS) in DL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSettings {
    pub ul_snr_db: f64,
    pub dl_snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellularSettings {
    pub num_cells: usize,
    /// Antennas per BS; `None` keeps the cell-free antenna density,
    /// `M·N / L` rounded up.
    #[serde(default)]
    pub antennas_per_bs: Option<usize>,
}

impl Default for CellularSettings {
    fn default() -> Self {
        Self {
            num_cells: 4,
            antennas_per_bs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulerSettings {
    #[serde(default = "default_metric")]
    pub exhaustive_metric: SearchMetric,
    #[serde(default = "default_cap")]
    pub exhaustive_cap: usize,
}

fn default_metric() -> SearchMetric {
    SearchMetric::TrueSumSe
}
fn default_cap() -> usize {
    DEFAULT_EXHAUSTIVE_CAP
}

impl Default for SchedulerSettings {
    fn default() -> Self {
        Self {
            exhaustive_metric: default_metric(),
            exhaustive_cap: default_cap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Sets both UL and DL data SNR.
    SnrDb,
    /// Residual inter-AP (and inter-BS) CLI suppression.
    CliDb,
    UlFraction,
    NumUes,
}

impl SweepParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::SnrDb => "snr_db",
            SweepParameter::CliDb => "cli_db",
            SweepParameter::UlFraction => "ul_fraction",
            SweepParameter::NumUes => "num_ues",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub pilot: PilotSettings,
    pub powers: PowerSettings,
    /// Fraction of UEs with UL demand.
    pub demand: f64,
    pub scheme: Scheme,
    #[serde(default = "default_processing")]
    pub processing: Processing,
    #[serde(default = "default_drops")]
    pub drops: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cellular: CellularSettings,
    #[serde(default)]
    pub scheduler: SchedulerSettings,
    #[serde(default)]
    pub montecarlo: McParams,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

fn default_processing() -> Processing {
    Processing::MrcMfp
}
fn default_drops() -> usize {
    200
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.drops < 1 {
            return Err(Error::config("drops", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.demand) {
            return Err(Error::config("demand", "must lie in [0, 1]"));
        }
        if self.pilot.tau_p < 1 || self.pilot.tau_p >= self.pilot.tau {
            return Err(Error::config("pilot.tau_p", "must satisfy 1 <= tau_p < tau"));
        }
        if self.pilot.n_iter < 1 {
            return Err(Error::config("pilot.n_iter", "must be at least 1"));
        }
        if self.scheme.is_cellular() && self.processing != Processing::MrcMfp {
            return Err(Error::config("processing", "cellular baselines support mrc_mfp only"));
        }
        if self.scheme == Scheme::CfDtddExhaustive && self.network.num_aps > self.scheduler.exhaustive_cap {
            return Err(Error::SearchTooLarge {
                aps: self.network.num_aps,
                cap: self.scheduler.exhaustive_cap,
            });
        }
        let cells = self.cellular.num_cells;
        if self.scheme.is_cellular() && (cells == 0 || (cells as f64).sqrt().round().powi(2) as usize != cells) {
            return Err(Error::config("cellular.num_cells", "must be a positive perfect square"));
        }
        self.montecarlo.validate()?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::config("sweep.values", "must not be empty"));
            }
            for &v in &sweep.values {
                self.at_sweep_point(Some((sweep.parameter, v)))?;
            }
        }
        Ok(())
    }

    /// The config with one sweep value applied (the sweep itself removed).
    pub fn at_sweep_point(&self, point: Option<(SweepParameter, f64)>) -> Result<Self> {
        let mut c = self.clone();
        c.sweep = None;
        if let Some((param, v)) = point {
            if !v.is_finite() {
                return Err(Error::config("sweep.values", "must be finite"));
            }
            match param {
                SweepParameter::SnrDb => {
                    c.powers.ul_snr_db = v;
                    c.powers.dl_snr_db = v;
                }
                SweepParameter::CliDb => c.network.cli_residual_db = Some(v),
                SweepParameter::UlFraction => {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::config("sweep.values", "UL fraction must lie in [0, 1]"));
                    }
                    c.demand = v;
                }
                SweepParameter::NumUes => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(Error::config("sweep.values", "UE counts must be positive integers"));
                    }
                    c.network.num_ues = v as usize;
                }
            }
        }
        c.network.validate()?;
        Ok(c)
    }

    pub fn sweep_points(&self) -> Vec<Option<(SweepParameter, f64)>> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some((s.parameter, v))).collect(),
            None => vec![None],
        }
    }

    /// BS antenna count for the cellular baselines.
    pub fn antennas_per_bs(&self) -> usize {
        self.cellular.antennas_per_bs.unwrap_or_else(|| {
            (self.network.num_aps * self.network.antennas_per_ap).div_ceil(self.cellular.num_cells.max(1))
        })
    }
}
