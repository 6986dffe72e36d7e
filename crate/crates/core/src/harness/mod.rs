//! Config files, orchestration and artifact output for reproducible runs.
//!
//! A run validates its [`ExperimentConfig`], computes every artifact in
//! memory, then writes them (and a `manifest.json`) through temporary
//! files that are renamed into place only once all of them are ready.
//! Each artifact embeds the config digest; an artifact written under a
//! different digest is never replaced unless `force` is set.

mod artifacts;
mod config;
mod figures;
mod run;
mod tables;

pub use artifacts::{embedded_digest, write_artifacts, Artifact};
pub use config::{
    ChannelSection, ExperimentConfig, ExperimentKind, GainSection, Grid, NoiseKind, OracleSection, OutputSection,
    QecSection, Rounds, TrajSection, TrajSource,
};
pub use figures::{reproduce_figure, FigureId, FigureScale};
pub use run::{build_trajectory, run, RunManifest, StageTiming};
pub use tables::{read_trajectory_csv, trajectory_csv};

use std::path::PathBuf;

use crate::gatekit::GateError;
use crate::noisechan::NoiseError;
use crate::oracle::OracleError;
use crate::qecsim::QecError;

/// Environment variable read when no thread count is given explicitly.
pub const THREADS_ENV: &str = "IONQEC_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("unknown figure {0:?} (known: 1c, 2a, 2b, 3a, 3b, 4a)")]
    UnknownFigure(String),
    #[error("{} was written by a different configuration; pass --force to replace it", .0.display())]
    WouldOverwrite(PathBuf),
    #[error("numerical guard tripped: {0}")]
    Numerical(String),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Qec(#[from] QecError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl HarnessError {
    /// Process exit status: 2 for bad input, 3 for a tripped numerical
    /// guard, 4 when a size limit or the file system gets in the way.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical(_) => 3,
            Self::Io { .. } => 4,
            Self::Noise(NoiseError::SupportTooLarge { .. } | NoiseError::TooManyQubits { .. }) => 4,
            Self::Oracle(
                OracleError::DimensionTooLarge { .. } | OracleError::TooManySpins(_) | OracleError::TooManyModes(_),
            ) => 4,
            _ => 2,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }
}

/// Sizes the global worker pool: the explicit count wins, then
/// [`THREADS_ENV`], then the hardware parallelism. Returns the count in
/// effect. Only the first call can change the pool.
pub fn configure_threads(explicit: Option<usize>) -> usize {
    let from_env = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(n) = explicit.or(from_env).filter(|&n| n > 0) {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("worker pool already initialised");
        }
    }
    rayon::current_num_threads()
}
