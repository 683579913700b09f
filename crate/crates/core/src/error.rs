use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("invalid pilot assignment for UE {ue}: {reason}")]
    InvalidAssignment { ue: usize, reason: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("exhaustive search over {aps} APs exceeds the cap of {cap}")]
    SearchTooLarge { aps: usize, cap: usize },

    #[error("cellular layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("matrix is numerically singular ({0})")]
    Singular(&'static str),

    #[error("percentile of an empty sample set")]
    EmptySamples,

    #[error("drop {drop}: {source}")]
    Drop {
        drop: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
