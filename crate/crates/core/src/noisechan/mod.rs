//! Leading-order Pauli channels for scattering, heating and motional
//! dephasing, computed from a [`TrajectoryTable`](crate::gatekit::TrajectoryTable).

mod hadamard;
mod motional;
mod pauli;
mod raman;
mod rates;
mod scatter;

pub use hadamard::{hadamard_conjugate, MAX_HADAMARD_QUBITS};
pub use motional::{
    coupled_uncoupled_split, dephasing_probs, heating_1q_probs, heating_eta, heating_matrix, HeatingMatrix,
    SplitSummary,
};
pub use pauli::{ChannelDocument, ChannelTerm, Pauli, PauliChannel, PauliString, NORMALIZATION_TOLERANCE};
pub use raman::{raman_rate, scatter_budget};
pub use rates::RateSet;
pub use scatter::{
    gamma_k, hook_asymptotics, hook_deviation_from_two_qubit, hook_distribution, scatter_correlated_channel,
    scatter_single_flip_probs, scatter_support, two_qubit_hook_distribution, ScatterVariant, MAX_SUPPORT,
    SUPPORT_THRESHOLD,
};
pub(crate) use scatter::pattern_probabilities;

use crate::gatekit::TrajectoryTable;

#[derive(Debug, thiserror::Error)]
pub enum NoiseError {
    #[error("ion {ion} out of range for a {ions}-ion gate")]
    UnknownIon { ion: usize, ions: usize },
    #[error("time {0} s lies outside the trajectory grid")]
    TimeOutsideGrid(f64),
    #[error("{key} has {got} entries, expected {expected}")]
    RateShape { key: &'static str, expected: usize, got: usize },
    #[error("{0} must be non-negative and finite")]
    NegativeRate(&'static str),
    #[error("support set has {size} ions, enumeration limit is {limit}; raise the support threshold")]
    SupportTooLarge { size: usize, limit: usize },
    #[error("truncation threshold {0} outside [0, 1e-3]")]
    BadTruncation(f64),
    #[error("{n} qubits exceeds the dense limit of {limit}; use heating_1q_probs instead")]
    TooManyQubits { n: usize, limit: usize },
    #[error("matrix is {rows}x{cols}, expected a square power-of-two size")]
    NotSquarePow2 { rows: usize, cols: usize },
    #[error("Raman detuning must be non-zero")]
    ZeroDetuning,
    #[error("invalid Pauli string {0:?}")]
    BadPauli(String),
    #[error("invalid channel: {0}")]
    Channel(String),
    #[error("rates file: {0}")]
    RatesFile(String),
}

/// Heating channel as a Pauli map. Uses the exact pattern diagonal up to
/// [`MAX_HADAMARD_QUBITS`] ions and independent single flips beyond.
pub fn heating_channel(traj: &TrajectoryTable, rates: &RateSet) -> Result<PauliChannel, NoiseError> {
    rates.validate(traj.mode_count())?;
    let n = traj.ion_count();
    if n <= MAX_HADAMARD_QUBITS {
        let a = heating_matrix(traj, &rates.gamma_h, &rates.nbar_th)?;
        let eta = heating_eta(&a, n)?;
        let terms = eta.iter().enumerate().skip(1).map(|(mask, &p)| (flip_string(n, mask as u64), p));
        PauliChannel::from_terms(n, terms)
    } else {
        let p = heating_1q_probs(traj, &rates.gamma_h, &rates.nbar_th)?;
        PauliChannel::from_terms(n, p.iter().enumerate().map(|(i, &p)| (flip_string(n, 1 << i), p)))
    }
}

/// Dephasing channel with single and pair flips.
pub fn dephasing_channel(traj: &TrajectoryTable, rates: &RateSet) -> Result<PauliChannel, NoiseError> {
    rates.validate(traj.mode_count())?;
    let n = traj.ion_count();
    let (p1, p2) = dephasing_probs(traj, &rates.gamma_d, &rates.nbar)?;
    let mut terms: Vec<(PauliString, f64)> =
        p1.iter().enumerate().map(|(i, &p)| (flip_string(n, 1 << i), p)).collect();
    for a in 0..n {
        for b in 0..a {
            terms.push((flip_string(n, (1 << a) | (1 << b)), p2[[a, b]]));
        }
    }
    PauliChannel::from_terms(n, terms)
}

/// X on every qubit set in `mask`.
pub fn flip_string(n: usize, mask: u64) -> PauliString {
    PauliString::from_paulis((0..n).map(|i| if mask >> i & 1 == 1 { Pauli::X } else { Pauli::I }).collect())
}
