//! Experiment campaigns: drops, scheme comparisons, sweeps, percentiles and
//! result files.

mod campaign;
mod config;
mod output;
mod stats;

pub use campaign::{
    cell_free_scenario, cellular_scenario, compare_schemes, run_campaign, run_campaign_with_threads, run_drop,
    CampaignResult, DropOutcome, SweepPointResult,
};
pub use config::{
    Allocation, CellularSettings, ExperimentConfig, PilotSettings, PowerSettings, Processing, SchedulerSettings,
    Scheme, Sweep, SweepParameter,
};
pub use output::{csv_string, emit_results, read_json, write_csv, write_json, OutputFormat};
pub use stats::{median, percentile, percentile_90_likely, Cdf, Summary};
