//! Noise channels for trapped-ion multiqubit gates, a small-system Lindblad
//! oracle to check them, and a rotated surface-code memory benchmark that
//! consumes them.
//!
//! Modules are layered bottom-up: [`gatekit`] produces phase-space
//! trajectories, [`noisechan`] turns them into Pauli channels, [`oracle`]
//! validates those channels by brute force, [`qecsim`] runs the code
//! benchmark, and [`harness`] wires everything to config files and artifacts.

pub mod gatekit;
pub mod harness;
pub mod noisechan;
pub mod numeric;
pub mod oracle;
pub mod qecsim;

pub use gatekit::{GateSpec, ModeSpec, Tone, TrajectorySource, TrajectoryTable};
pub use noisechan::{PauliChannel, PauliString, RateSet};
