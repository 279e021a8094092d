//! Experiment runner behind the `heisenberg-verify` binary: extremizer
//! ratio sweeps, property suites, volume cross-checks and report output.

pub mod config;
pub mod report;
pub mod suite;
pub mod sweep;
pub mod volume;

pub use config::{ExperimentConfig, OutputFormat};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Numeric(#[from] heisenberg_core::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl VerifyError {
    /// Process exit status: 2 for bad input, 3 for divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use heisenberg_core::Error as E;
        match self {
            VerifyError::Config(_) => 2,
            VerifyError::Numeric(E::InvalidArgument(_) | E::Unsupported(_)) => 2,
            VerifyError::Numeric(E::Divergence { .. }) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, VerifyError>;

/// Runs `work` on a pool of `jobs` threads. Results never depend on the
/// thread count: every parallel reduction in the pipeline is ordered.
pub fn with_jobs<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| VerifyError::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(work))
}
