//! Circuit-level noise for multiqubit-gate syndrome extraction.
//!
//! Every error is a Pauli inserted just before a gate, written in the frame
//! of the equivalent CNOT circuit. For an X check the ancilla is the CNOT
//! control and is read out in the X basis; for a Z check it is the target
//! and is read out in the Z basis. Two single-qubit symbols matter:
//! the "commuting" symbol passes through the gate unchanged (`X` on data
//! in X rounds, `Z` on data in Z rounds; on the ancilla it flips the
//! readout), the "spreading" symbol on the ancilla copies onto every
//! coupled data qubit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::layout::{GateStep, StabilizerKind, SurfaceCodeLayout};
use super::QecError;
use crate::gatekit::ms_trajectory;
use crate::noisechan::{pattern_probabilities, Pauli, PauliChannel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    /// Every pair of qubits taking part in the gate.
    AllPairs,
    /// Only ancilla-data pairs coupled by the gate.
    CoupledOnly,
}

impl std::str::FromStr for PairMode {
    type Err = QecError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-pairs" | "all" => Ok(PairMode::AllPairs),
            "coupled-only" | "coupled" => Ok(PairMode::CoupledOnly),
            other => Err(QecError::BadPairMode(other.to_string())),
        }
    }
}

impl std::fmt::Display for PairMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PairMode::AllPairs => "all-pairs",
            PairMode::CoupledOnly => "coupled-only",
        })
    }
}

/// Where the scattering propagation tables come from.
#[derive(Debug, Clone)]
pub enum ScatterSource {
    /// Closed forms along the Molmer-Sorensen trajectory.
    MsClosedForm,
    /// One channel per ancilla weight; qubit 0 is the scattering ancilla.
    Channels(Vec<PauliChannel>),
}

/// Conditional pattern probabilities for one scattering event on an
/// ancilla coupled to `weight` data qubits. Bit 0 marks a flip of the
/// ancilla's own symbol, bit `1 + i` a flip of the `i`-th coupled data qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterTable {
    pub weight: usize,
    pub probs: Vec<f64>,
}

const TABLE_GRID: usize = 2049;

impl ScatterTable {
    pub fn ms_closed_form(weight: usize) -> Result<Self, QecError> {
        let traj = ms_trajectory(weight + 1, 1.0, TABLE_GRID).map_err(|e| QecError::Table(e.to_string()))?;
        let support: Vec<usize> = (0..=weight).collect();
        let probs = pattern_probabilities(&traj, 0, 1.0, &[0.0], &support);
        Self::normalized(weight, probs)
    }

    /// Reads the table off a channel whose qubit 0 is the faulty ancilla:
    /// terms with `Z` or `Y` there are kept, `Y` marking a flip.
    pub fn from_channel(channel: &PauliChannel) -> Result<Self, QecError> {
        let n = channel.qubit_count();
        if n < 2 {
            return Err(QecError::ChannelQubits { expected: 2, got: n });
        }
        let mut probs = vec![0.0; 1 << n];
        for (pauli, &p) in channel.terms() {
            let own = match pauli.get(0) {
                Pauli::Z => 0,
                Pauli::Y => 1,
                _ => continue,
            };
            let mut mask = own;
            for q in 1..n {
                if pauli.get(q).has_x() {
                    mask |= 1 << q;
                }
            }
            probs[mask] += p;
        }
        Self::normalized(n - 1, probs)
    }

    fn normalized(weight: usize, mut probs: Vec<f64>) -> Result<Self, QecError> {
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(QecError::Table(format!("weight {weight} table has no usable mass")));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(Self { weight, probs })
    }
}

/// Noise parameters plus the scattering tables needed by a layout.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub p_ph: f64,
    pub p_2q: f64,
    pub pair_mode: PairMode,
    /// Keyed by the number of data qubits an ancilla touches in one gate.
    pub tables: BTreeMap<usize, ScatterTable>,
}

pub fn build_noise_model(
    layout: &SurfaceCodeLayout,
    p_ph: f64,
    p_2q: f64,
    pair_mode: PairMode,
    source: &ScatterSource,
) -> Result<NoiseModel, QecError> {
    for (name, p) in [("p_ph", p_ph), ("p_2q", p_2q)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(QecError::BadProbability { name, value: p });
        }
    }
    let mut tables = BTreeMap::new();
    for kind in [StabilizerKind::X, StabilizerKind::Z] {
        for step in layout.steps(kind) {
            for (_, data) in ancilla_groups(step) {
                let w = data.len();
                if tables.contains_key(&w) {
                    continue;
                }
                let table = match source {
                    ScatterSource::MsClosedForm => ScatterTable::ms_closed_form(w)?,
                    ScatterSource::Channels(list) => {
                        let ch = list.iter().find(|c| c.qubit_count() == w + 1).ok_or(QecError::ChannelQubits {
                            expected: w + 1,
                            got: list.first().map_or(0, |c| c.qubit_count()),
                        })?;
                        ScatterTable::from_channel(ch)?
                    }
                };
                tables.insert(w, table);
            }
        }
    }
    Ok(NoiseModel { p_ph, p_2q, pair_mode, tables })
}

/// Ancillas of a gate with their coupled data qubits in coupling order.
pub(crate) fn ancilla_groups(step: &GateStep) -> Vec<(usize, Vec<usize>)> {
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &(a, d) in &step.couplings {
        match groups.iter_mut().find(|g| g.0 == a) {
            Some(g) => g.1.push(d),
            None => groups.push((a, vec![d])),
        }
    }
    groups
}

/// Single-qubit Pauli on one qubit.
pub type Fault = (usize, Pauli);

/// A fault mechanism firing with probability `p`, then choosing one of
/// its outcomes with the given conditional probabilities.
#[derive(Debug, Clone)]
pub struct Mechanism {
    pub p: f64,
    pub outcomes: Vec<(f64, Vec<Fault>)>,
}

fn symbol(is_x: bool) -> Pauli {
    if is_x {
        Pauli::X
    } else {
        Pauli::Z
    }
}

/// All mechanisms inserted before one gate. Idle depolarization is a
/// per-round memory error, so it is charged only when `idle` is set (the
/// first gate of each check type in a round).
pub(crate) fn step_mechanisms(layout: &SurfaceCodeLayout, step: &GateStep, noise: &NoiseModel, idle: bool) -> Vec<Mechanism> {
    let x_round = step.kind == StabilizerKind::X;
    // Commuting symbol on data, readout-flipping symbol on the ancilla,
    // spreading symbol on the ancilla.
    let data_t = symbol(x_round);
    let anc_local = symbol(!x_round);
    let anc_spread = symbol(x_round);
    let local = |q: usize| if layout.is_data(q) { data_t } else { anc_local };

    let mut out = Vec::new();
    if noise.p_ph > 0.0 && idle {
        for q in 0..layout.qubit_count() {
            out.push(Mechanism {
                p: noise.p_ph,
                outcomes: [Pauli::X, Pauli::Y, Pauli::Z].iter().map(|&s| (1.0 / 3.0, vec![(q, s)])).collect(),
            });
        }
    }
    let participants = step.participants();
    if noise.p_ph > 0.0 {
        for &q in &participants {
            out.push(Mechanism { p: noise.p_ph, outcomes: vec![(1.0, vec![(q, local(q))])] });
        }
    }
    if noise.p_2q > 0.0 {
        let pairs: Vec<(usize, usize)> = match noise.pair_mode {
            PairMode::CoupledOnly => step.couplings.clone(),
            PairMode::AllPairs => participants
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| participants[i + 1..].iter().map(move |&b| (a, b)))
                .collect(),
        };
        for (a, b) in pairs {
            out.push(Mechanism { p: noise.p_2q, outcomes: vec![(1.0, vec![(a, local(a)), (b, local(b))])] });
        }
    }
    if noise.p_ph > 0.0 {
        for (anc, data) in ancilla_groups(step) {
            let table = &noise.tables[&data.len()];
            let mut outcomes = vec![(1.0 / 3.0, vec![(anc, anc_local)])];
            for y_event in [false, true] {
                for (mask, &q) in table.probs.iter().enumerate() {
                    if q <= 0.0 {
                        continue;
                    }
                    let own = (mask & 1 == 1) != y_event;
                    let mut faults = vec![(anc, if own { Pauli::Y } else { anc_spread })];
                    for (i, &d) in data.iter().enumerate() {
                        if mask >> (i + 1) & 1 == 1 {
                            faults.push((d, data_t));
                        }
                    }
                    outcomes.push((q / 3.0, faults));
                }
            }
            out.push(Mechanism { p: noise.p_ph, outcomes });
        }
    }
    out
}
