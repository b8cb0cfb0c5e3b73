//! Command line failures carry one of three stable exit codes so CI can
//! branch on outcomes without parsing messages: 2 for bad invocations,
//! 3 for unreadable or malformed data, 4 for failures while producing
//! outputs (assembly, locking, writes).

use stvg_core::config::ConfigError;
use stvg_core::graph::{BuildError, SnapshotError};
use stvg_core::io::DataError;
use stvg_core::metrics::MetricsError;
use stvg_core::projection::WindowParseError;
use stvg_core::road_prep::PrepError;
use stvg_core::synth::SynthError;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_BUILD: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Build(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Build(_) => EXIT_BUILD,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<WindowParseError> for CliError {
    fn from(e: WindowParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PrepError> for CliError {
    fn from(e: PrepError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SnapshotError> for CliError {
    fn from(e: SnapshotError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        CliError::Build(e.to_string())
    }
}

/// Wrapper for errors raised while writing an output file; those are build
/// failures even when the underlying error type says "data".
pub fn write_failed(e: impl std::fmt::Display) -> CliError {
    CliError::Build(e.to_string())
}
