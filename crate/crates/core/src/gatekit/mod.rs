//! Phase-space trajectories and entangling-phase histories for MS, robust-MS
//! and generic multi-tone gates.

mod analytic;
mod gatefile;
mod magnus;
mod table;

pub use analytic::{ms_trajectory, robust_trajectory};
pub use gatefile::{load_gate_file, parse_gate_file, GateFile};
pub use magnus::magnus_trajectories;
pub use table::{closure_residual, TrajectorySource, TrajectoryTable};

use ndarray::Array2;

/// Minimum grid size accepted by the trajectory builders.
pub const MIN_GRID_POINTS: usize = 16;

/// Default grid size used by the CLI and harness.
pub const DEFAULT_GRID_POINTS: usize = 4096;

#[derive(Debug, thiserror::Error)]
pub enum GateError {
    #[error("a gate needs at least two ions, got {0}")]
    TooFewIons(usize),
    #[error("gate duration must be positive and finite, got {0}")]
    BadDuration(f64),
    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("mode frequencies must be positive and strictly increasing")]
    BadFrequencies,
    #[error("Lamb-Dicke matrix is {rows}x{cols}, expected {modes}x{ions}")]
    LambDickeShape { rows: usize, cols: usize, modes: usize, ions: usize },
    #[error("gate has {gate} ions but the mode description has {modes}")]
    IonCountMismatch { gate: usize, modes: usize },
    #[error("tone addresses ion {ion} but the gate has {ions} ions")]
    ToneIon { ion: usize, ions: usize },
    #[error("tone parameters must be finite")]
    NonFiniteTone,
    #[error("target phases must form a symmetric matrix with zero diagonal")]
    BadTargets,
    #[error("grid under-resolves the fastest tone: {samples:.1} samples per period, need at least 20")]
    UnderResolved { samples: f64 },
    #[error("trajectory table is inconsistent: {0}")]
    BadTable(String),
    #[error("gate file: {0}")]
    GateFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Normal modes of the ion crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    frequencies: Vec<f64>,
    lamb_dicke: Array2<f64>,
}

impl ModeSpec {
    /// `frequencies` in rad/s; `lamb_dicke` indexed `[mode, ion]`.
    pub fn new(frequencies: Vec<f64>, lamb_dicke: Array2<f64>) -> Result<Self, GateError> {
        let ok = frequencies.iter().all(|f| f.is_finite() && *f > 0.0)
            && frequencies.windows(2).all(|w| w[1] > w[0]);
        if !ok || frequencies.is_empty() {
            return Err(GateError::BadFrequencies);
        }
        let (rows, cols) = lamb_dicke.dim();
        if rows != frequencies.len() {
            return Err(GateError::LambDickeShape {
                rows,
                cols,
                modes: frequencies.len(),
                ions: cols,
            });
        }
        Ok(Self { frequencies, lamb_dicke })
    }

    pub fn mode_count(&self) -> usize {
        self.frequencies.len()
    }

    pub fn ion_count(&self) -> usize {
        self.lamb_dicke.ncols()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn lamb_dicke(&self) -> &Array2<f64> {
        &self.lamb_dicke
    }
}

/// One spectral component of an ion's drive, `amplitude * cos(frequency * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub ion: usize,
    /// rad/s
    pub amplitude: f64,
    /// rad/s
    pub frequency: f64,
    pub phase: f64,
}

impl Tone {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }
}

/// A multiqubit gate as a set of drive tones plus the intended phases.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    ion_count: usize,
    duration: f64,
    tones: Vec<Tone>,
    targets: Array2<f64>,
}

impl GateSpec {
    pub fn new(
        ion_count: usize,
        duration: f64,
        tones: Vec<Tone>,
        targets: Array2<f64>,
    ) -> Result<Self, GateError> {
        if ion_count < 2 {
            return Err(GateError::TooFewIons(ion_count));
        }
        check_duration(duration)?;
        for tone in &tones {
            if tone.ion >= ion_count {
                return Err(GateError::ToneIon { ion: tone.ion, ions: ion_count });
            }
            if !(tone.amplitude.is_finite() && tone.frequency.is_finite() && tone.phase.is_finite())
            {
                return Err(GateError::NonFiniteTone);
            }
        }
        check_targets(&targets, ion_count)?;
        Ok(Self { ion_count, duration, tones, targets })
    }

    pub fn ion_count(&self) -> usize {
        self.ion_count
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn tones(&self) -> &[Tone] {
        &self.tones
    }

    pub fn targets(&self) -> &Array2<f64> {
        &self.targets
    }

    /// Drive amplitude on `ion` at time `t`.
    pub fn drive(&self, ion: usize, t: f64) -> f64 {
        self.tones.iter().filter(|tone| tone.ion == ion).map(|tone| tone.value(t)).sum()
    }
}

pub(crate) fn check_duration(tau: f64) -> Result<(), GateError> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(GateError::BadDuration(tau))
    }
}

pub(crate) fn check_targets(targets: &Array2<f64>, n: usize) -> Result<(), GateError> {
    if targets.dim() != (n, n) {
        return Err(GateError::BadTargets);
    }
    for i in 0..n {
        if targets[[i, i]] != 0.0 {
            return Err(GateError::BadTargets);
        }
        for j in 0..i {
            if (targets[[i, j]] - targets[[j, i]]).abs() > 1e-12 {
                return Err(GateError::BadTargets);
            }
        }
    }
    Ok(())
}

/// All-to-all target matrix with the same phase on every pair.
pub fn uniform_targets(n: usize, phase: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { phase })
}
