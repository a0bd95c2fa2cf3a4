//! Batch runner for the field experiments: configs, presets, reports and
//! the exact-algebra fixture suite.

pub mod config;
pub mod exactcheck;
pub mod presets;
pub mod run;

use std::path::{Path, PathBuf};

use mdfield::exactalg::ExactError;
use mdfield::fields::FieldError;
use mdfield::limitlaw::LawError;
use mdfield::stats::StatsError;
use thiserror::Error;

pub use config::{CompareMode, ExperimentConfig, ExtraCheck, LawCheck, Tolerances};
pub use exactcheck::{run_exactcheck, ExactSummary, FixtureSource};
pub use presets::{preset, preset_names, preset_source};
pub use run::{run_experiment, Report, RunOptions, RunOutcome, Verdict, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no fixtures (*.toml) in {0}")]
    NoFixtures(PathBuf),
    #[error("fixture {0}: {1}")]
    Fixture(String, ExactError),
    #[error("invalid config: {0}")]
    Field(#[from] FieldError),
    #[error("invalid config: {0}")]
    Law(#[from] LawError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const STATISTICAL_FAILURE: u8 = 2;
}
