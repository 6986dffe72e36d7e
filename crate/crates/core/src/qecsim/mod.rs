//! Rotated surface-code memory experiments under multiqubit-gate noise,
//! decoded with minimum-weight perfect matching.

mod circuit;
mod coset;
mod decoder;
mod dem;
mod layout;
mod matching;
mod noise;
mod sampler;
mod stats;

pub use circuit::{sector, Effect, Injection, MemoryCircuit, Phase, Slot};
pub use coset::CosetDecoder;
pub use decoder::{MatchingDecoder, SectorDecoding};
pub use dem::{DetectorErrorModel, GraphEdge};
pub use layout::{
    build_layout, GateStep, Schedule, Stabilizer, StabilizerKind, SurfaceCodeLayout, MAX_DISTANCE, MIN_DISTANCE,
};
pub use matching::max_weight_matching;
pub use noise::{build_noise_model, Mechanism, NoiseModel, PairMode, ScatterSource, ScatterTable};
pub use sampler::{simulate_memory, ShotRecord};
pub use stats::{
    crossing_estimate, gain_factor, logical_error_rate, run_memory, threshold_sweep, wilson_interval, MemoryConfig,
    SimResult, SweepPoint,
};

#[derive(Debug, thiserror::Error)]
pub enum QecError {
    #[error("distance must be odd and within {MIN_DISTANCE}..={MAX_DISTANCE}, got {0}")]
    BadDistance(usize),
    #[error("unknown schedule `{0}` (expected all or split)")]
    BadSchedule(String),
    #[error("unknown two-qubit mode `{0}` (expected all-pairs or coupled-only)")]
    BadPairMode(String),
    #[error("{name} = {value} is not a probability")]
    BadProbability { name: &'static str, value: f64 },
    #[error("scattering channel must act on {expected} qubits, got {got}")]
    ChannelQubits { expected: usize, got: usize },
    #[error("scattering table: {0}")]
    Table(String),
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error("shot count must be positive")]
    NoShots,
    #[error("a sweep needs at least two distances")]
    TooFewDistances,
}
