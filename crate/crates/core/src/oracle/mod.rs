//! Brute-force validation of the analytic channels on a few spins and one
//! or two modes: a direct leading-order evaluation and a quantum-jump
//! unravelling of the full master equation.
//!
//! Both work in the frame rotated by the ideal gate, where the gate itself
//! is the identity and each jump operator `C` becomes `U(t)^dag C U(t)`.
//! With `U(t) = sum_x |x><x| (x) D(beta_x(t)) e^{i theta_x(t)}` in the
//! spin `X` basis, `beta_x = sum_n alpha_n x_n` and
//! `theta_x = sum_{n<m} phi_nm x_n x_m`, every rotated operator has a
//! closed block form.

mod fock;
mod ops;
mod jump;
mod leading;

pub use fock::{displacement_matrix, thermal_populations};
pub use jump::{evolve_jump, FlipHistogram};
pub use leading::leading_order_channel;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gatekit::TrajectoryTable;
use crate::noisechan::NoiseError;

pub const MAX_SPINS: usize = 4;
pub const MAX_MODES: usize = 2;
pub const MIN_CUTOFF: usize = 8;
pub const MAX_DIMENSION: usize = 2_000_000;
/// Top-level population above which a run is flagged.
pub const LEAKAGE_WARNING: f64 = 1e-4;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("oracle handles at most {MAX_SPINS} spins, got {0}")]
    TooManySpins(usize),
    #[error("oracle handles at most {MAX_MODES} modes, got {0}")]
    TooManyModes(usize),
    #[error("Fock cutoff must be at least {MIN_CUTOFF}, got {0}")]
    CutoffTooSmall(usize),
    #[error("Hilbert dimension {dim} exceeds the limit {MAX_DIMENSION}")]
    DimensionTooLarge { dim: usize },
    #[error("jump {0} refers to a spin or mode outside the system")]
    BadJump(String),
    #[error("initial occupation list has {got} entries for {expected} modes")]
    OccupationShape { expected: usize, got: usize },
    #[error("shot count must be positive")]
    NoShots,
    #[error(transparent)]
    Channel(#[from] NoiseError),
}

/// Operator part of a jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "index", rename_all = "snake_case")]
pub enum JumpOp {
    SigmaX(usize),
    SigmaY(usize),
    SigmaZ(usize),
    /// Annihilation on a mode.
    Lower(usize),
    /// Creation on a mode.
    Raise(usize),
    /// Number operator on a mode.
    Number(usize),
}

impl JumpOp {
    pub fn is_spin(&self) -> bool {
        matches!(self, JumpOp::SigmaX(_) | JumpOp::SigmaY(_) | JumpOp::SigmaZ(_))
    }
}

impl std::fmt::Display for JumpOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JumpOp::SigmaX(i) => write!(f, "sigma_x({i})"),
            JumpOp::SigmaY(i) => write!(f, "sigma_y({i})"),
            JumpOp::SigmaZ(i) => write!(f, "sigma_z({i})"),
            JumpOp::Lower(j) => write!(f, "a({j})"),
            JumpOp::Raise(j) => write!(f, "a_dag({j})"),
            JumpOp::Number(j) => write!(f, "n({j})"),
        }
    }
}

/// A jump operator with its rate in 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    #[serde(flatten)]
    pub op: JumpOp,
    pub rate: f64,
}

impl Jump {
    pub fn new(op: JumpOp, rate: f64) -> Self {
        Self { op, rate }
    }
}

/// Jumps describing heating of `mode` at rate `gamma` towards occupation `nbar_th`.
pub fn heating_jumps(mode: usize, gamma: f64, nbar_th: f64) -> Vec<Jump> {
    vec![
        Jump::new(JumpOp::Lower(mode), gamma * (1.0 + nbar_th)),
        Jump::new(JumpOp::Raise(mode), gamma * nbar_th),
    ]
}

/// Everything the jump simulation needs.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub trajectory: TrajectoryTable,
    pub jumps: Vec<Jump>,
    /// Initial thermal occupation per mode.
    pub nbar: Vec<f64>,
    /// Highest Fock level kept per mode.
    pub cutoff: usize,
    pub shots: usize,
    pub seed: u64,
}

pub(crate) fn check_system(
    traj: &TrajectoryTable,
    jumps: &[Jump],
    nbar: &[f64],
    cutoff: usize,
) -> Result<(usize, usize, usize), OracleError> {
    let n = traj.ion_count();
    let m = traj.mode_count();
    if n > MAX_SPINS {
        return Err(OracleError::TooManySpins(n));
    }
    if m > MAX_MODES {
        return Err(OracleError::TooManyModes(m));
    }
    if cutoff < MIN_CUTOFF {
        return Err(OracleError::CutoffTooSmall(cutoff));
    }
    if nbar.len() != m {
        return Err(OracleError::OccupationShape { expected: m, got: nbar.len() });
    }
    let phonon_dim = (cutoff + 1).pow(m as u32);
    let dim = (1usize << n) * phonon_dim;
    if dim > MAX_DIMENSION {
        return Err(OracleError::DimensionTooLarge { dim });
    }
    for j in jumps {
        let ok = match j.op {
            JumpOp::SigmaX(i) | JumpOp::SigmaY(i) | JumpOp::SigmaZ(i) => i < n,
            JumpOp::Lower(i) | JumpOp::Raise(i) | JumpOp::Number(i) => i < m,
        };
        if !ok || !(j.rate.is_finite() && j.rate >= 0.0) {
            return Err(OracleError::BadJump(j.op.to_string()));
        }
    }
    Ok((n, m, phonon_dim))
}

/// Ideal-gate frame at one instant: per-configuration displacements and
/// phases. Configuration `b` has spin values `x_n = 1 - 2 b_n`.
#[derive(Debug, Clone)]
pub(crate) struct Frame {
    /// `beta[b][mode]`
    pub beta: Vec<Vec<Complex64>>,
    pub theta: Vec<f64>,
}

impl Frame {
    /// Frame at fractional grid position `s + frac`.
    pub fn at(traj: &TrajectoryTable, s: usize, frac: f64) -> Self {
        let n = traj.ion_count();
        let m = traj.mode_count();
        let alpha = traj.alpha();
        let phi = traj.phi();
        let s1 = (s + 1).min(traj.len() - 1);
        let a = |j: usize, i: usize| alpha[[s, j, i]] + (alpha[[s1, j, i]] - alpha[[s, j, i]]) * frac;
        let p = |i: usize, k: usize| phi[[s, i, k]] + (phi[[s1, i, k]] - phi[[s, i, k]]) * frac;
        let configs = 1usize << n;
        let mut beta = Vec::with_capacity(configs);
        let mut theta = Vec::with_capacity(configs);
        for b in 0..configs {
            let x = |i: usize| if b >> i & 1 == 0 { 1.0 } else { -1.0 };
            beta.push((0..m).map(|j| (0..n).map(|i| a(j, i) * x(i)).sum()).collect());
            let mut th = 0.0;
            for i in 0..n {
                for k in 0..i {
                    th += p(i, k) * x(i) * x(k);
                }
            }
            theta.push(th);
        }
        Self { beta, theta }
    }

    /// Linear blend `(1 - f) a + f b` written into `self`.
    pub fn lerp_into(&mut self, a: &Frame, b: &Frame, f: f64) {
        for ((out, x), y) in self.beta.iter_mut().zip(&a.beta).zip(&b.beta) {
            for ((o, &u), &v) in out.iter_mut().zip(x).zip(y) {
                *o = u + (v - u) * f;
            }
        }
        for ((o, &u), &v) in self.theta.iter_mut().zip(&a.theta).zip(&b.theta) {
            *o = u + (v - u) * f;
        }
    }
}

/// Spin value `x_k` of configuration `b`.
pub(crate) fn spin_value(b: usize, k: usize) -> f64 {
    if b >> k & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}
