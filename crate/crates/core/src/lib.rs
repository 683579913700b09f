//! System-level simulation and AP scheduling for dynamic-TDD cell-free
//! massive MIMO.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: AP/UE layouts, pathloss, cross-link interference variances.
//! * [`estimation`]: LMMSE channel-estimation statistics and channel draws.
//! * [`pilots`]: pilot assignment (random, cell-based, iterative min-α).
//! * [`closed_form`]: MRC/MFP SINRs, sum SE, DL power coefficients.
//! * [`cellular`]: TDD and full-duplex multi-cell baselines.
//! * [`scheduler`]: greedy and exhaustive AP mode selection, submodularity audit.
//! * [`montecarlo`]: centralized MMSE combining and RZF precoding.
//! * [`validation`]: signal-level Monte-Carlo estimators of the MRC/MFP SINRs.
//! * [`harness`]: experiment campaigns, percentiles, CSV/JSON output.
//!
//! Runnable walkthroughs live in `examples/`; the `dtdd` binary drives
//! campaigns from a TOML config.

pub mod cellular;
pub mod closed_form;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod harness;
pub mod montecarlo;
pub mod pilots;
pub mod rng;
pub mod scheduler;
pub mod validation;

mod matrix_serde;

pub use closed_form::{PowerConfig, Scenario, Schedule, SeReport};
pub use error::{Error, Result};
pub use estimation::{EstimationStats, PilotAssignment, PilotConfig};
pub use geometry::{NetworkConfig, NetworkGeometry};

/// Converts a dB value to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
