//! Experiment orchestration for `reslab`: config ingestion, named pipelines,
//! deterministic CSV/TOML emission and sweeps.

pub mod config;
pub mod output;
pub mod pipelines;
pub mod selfcheck;
pub mod sweep;

pub use config::{Experiment, ExperimentConfig, Parameters, PsiKind, Schedule};
pub use output::{OutputFile, RunRecord};
pub use pipelines::{run, run_in, RunOutcome};
pub use sweep::{sweep, SweepOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure in {module}: {source}")]
    Numerical {
        module: &'static str,
        #[source]
        source: reslab::Error,
    },
    #[error("selfcheck failed: {0} check(s)")]
    SelfcheckFailed(usize),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 2 validation, 3 numerical, 4 selfcheck, 1 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical { .. } => 3,
            Self::SelfcheckFailed(_) => 4,
            Self::Io { .. } => 1,
        }
    }
}

/// Tags a library error with the module it came from.
pub(crate) fn in_module(module: &'static str) -> impl Fn(reslab::Error) -> CliError {
    move |source| CliError::Numerical { module, source }
}
