//! Config-driven experiment runner for `entrel-core`.
//!
//! A run reads a flat `key = value` file (see [`config`]), dispatches to one
//! of the pipelines in [`experiments`] and renders a [`output::ResultRecord`]
//! as CSV or JSON. All randomness comes from ChaCha8 streams keyed by the
//! config seed and the sample index, so output does not depend on the number
//! of worker threads.

pub mod config;
pub mod experiments;
pub mod output;

use std::fmt;

pub use config::{Experiment, ExperimentConfig, Format, Violation, ViolationKind};
pub use experiments::run;
pub use output::ResultRecord;

/// Caps the rayon pool when set to a positive integer.
pub const WORKERS_ENV: &str = "ENTREL_WORKERS";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Invalid(Vec<Violation>),
    Usage(String),
    Io(String),
    Resource(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(v) if v.iter().all(|x| x.kind == ViolationKind::Resource) => EXIT_RESOURCE,
            Self::Invalid(_) | Self::Usage(_) | Self::Io(_) => EXIT_USAGE,
            Self::Resource(_) => EXIT_RESOURCE,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Invalid(_) => "invalid-config",
            Self::Usage(_) => "usage",
            Self::Io(_) => "io",
            Self::Resource(_) => "resource",
            Self::Numerical(_) => "numerical",
        }
    }

    /// One-line JSON error record.
    pub fn to_json(&self) -> String {
        let details: Vec<String> = match self {
            Self::Invalid(v) => v.iter().map(|x| x.to_string()).collect(),
            _ => vec![],
        };
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "violations": details,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(v) => write!(f, "{} config violation(s)", v.len()),
            Self::Usage(m) | Self::Io(m) | Self::Resource(m) | Self::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<entrel_core::Error> for CliError {
    fn from(e: entrel_core::Error) -> Self {
        use entrel_core::Error as E;
        match e {
            E::Argument(_) | E::DimensionMismatch { .. } => Self::Usage(e.to_string()),
            E::Resource(_) => Self::Resource(e.to_string()),
            E::Degenerate(_) | E::Integration { .. } => Self::Numerical(e.to_string()),
        }
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(CliError::Invalid)
}
