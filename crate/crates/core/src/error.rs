use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("invalid drive parameters: {0}")]
    Drive(String),

    #[error("dimension mismatch: expected {expected} sites, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time series: {0}")]
    Series(String),

    #[error("observer `{name}` failed at period {period}: {message}")]
    Observer {
        name: String,
        period: u64,
        message: String,
    },

    #[error("grid point {point}, realization {realization}: {source}")]
    Task {
        point: usize,
        realization: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}", format_plan_errors(.0))]
    Plan(Vec<PlanIssue>),

    #[error("unknown preset `{id}`; available: {}", .available.join(", "))]
    UnknownPreset { id: String, available: Vec<String> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("png encoding: {0}")]
    Png(#[from] png::EncodingError),
}

/// One validation failure in a plan, located by its field path
/// (`alpha`, `axes[1].values`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanIssue {
    pub path: String,
    pub message: String,
}

fn format_plan_errors(issues: &[PlanIssue]) -> String {
    let mut out = String::from("invalid plan");
    for issue in issues {
        out.push_str(&format!("\n  {}: {}", issue.path, issue.message));
    }
    out
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
