//! Scenario files, reproducible runs, artifacts and reports.

pub mod artifact;
pub mod config;
pub mod plot;
pub mod report;
pub mod scenarios;

pub use artifact::{RunArtifact, RunStatus};
pub use config::{LoadedConfig, Overrides, ScenarioConfig, ScenarioKind};
pub use report::{emit_report, report_dir};
pub use scenarios::{run_scenario, Mode};

use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numeric failure: {0}")]
    Numeric(#[from] crate::error::Error),

    #[error("report error: {0}")]
    Report(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    /// 3 for numeric failures, 2 for everything a user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Numeric(_) => 3,
            _ => 2,
        }
    }
}
