//! Command-line orchestration for contact1d: configuration, run modes and
//! deterministic CSV/JSON output.

pub mod args;
pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use args::{run_cli, Cli};
pub use config::{Mode, RunConfig};
pub use run::execute;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] contact1d::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("checks failed: {0}")]
    Check(String),
}

impl CliError {
    /// 2 for configuration problems, 1 for run failures.
    pub fn exit_code(&self) -> i32 {
        use contact1d::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Config(_) | E::Singularity { .. } | E::Domain(_) | E::Range { .. }) => 2,
            _ => 1,
        }
    }
}
