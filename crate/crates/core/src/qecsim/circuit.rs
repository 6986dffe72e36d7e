//! Memory experiment circuit and single-shot Pauli-frame propagation.

use crate::noisechan::Pauli;

use super::layout::{GateStep, StabilizerKind, SurfaceCodeLayout};

/// One gate in time order. Faults are injected after the resets and
/// before the couplings (`Before`) or after the couplings and before the
/// readouts (`After`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub round: usize,
    pub kind: StabilizerKind,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Before,
    After,
}

/// A Pauli applied to one qubit at a point in the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Injection {
    pub slot: usize,
    pub phase: Phase,
    pub qubit: usize,
    pub pauli: Pauli,
}

/// Detection events and observable flips caused by a set of faults,
/// split by the type of check that sees them. Index 0 holds X-check
/// detectors (which see Z errors), index 1 Z-check detectors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Effect {
    pub detectors: [Vec<u32>; 2],
    pub observables: [bool; 2],
}

pub fn sector(kind: StabilizerKind) -> usize {
    match kind {
        StabilizerKind::X => 0,
        StabilizerKind::Z => 1,
    }
}

impl Effect {
    pub fn is_trivial(&self) -> bool {
        self.detectors.iter().all(|d| d.is_empty()) && !self.observables.iter().any(|&o| o)
    }

    /// Symmetric difference with another effect.
    pub fn xor(&self, other: &Effect) -> Effect {
        let mut out = Effect::default();
        for s in 0..2 {
            out.detectors[s] = xor_sorted(&self.detectors[s], &other.detectors[s]);
            out.observables[s] = self.observables[s] ^ other.observables[s];
        }
        out
    }
}

pub(crate) fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// `rounds` noisy rounds of X checks then Z checks, framed by a perfect
/// round before (implicit) and a perfect readout of all checks and both
/// logical operators from the data qubits at the end.
#[derive(Debug, Clone)]
pub struct MemoryCircuit {
    layout: SurfaceCodeLayout,
    rounds: usize,
    slots: Vec<Slot>,
}

impl MemoryCircuit {
    pub fn new(layout: SurfaceCodeLayout, rounds: usize) -> Self {
        let mut slots = Vec::new();
        for round in 0..rounds {
            for kind in [StabilizerKind::X, StabilizerKind::Z] {
                for step in 0..layout.steps(kind).len() {
                    slots.push(Slot { round, kind, step });
                }
            }
        }
        Self { layout, rounds, slots }
    }

    pub fn layout(&self) -> &SurfaceCodeLayout {
        &self.layout
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn step(&self, slot: usize) -> &GateStep {
        let s = self.slots[slot];
        &self.layout.steps(s.kind)[s.step]
    }

    /// Detectors per sector: one per check and round, plus the final readout.
    pub fn detector_count(&self, kind: StabilizerKind) -> usize {
        self.layout.checks(kind).len() * (self.rounds + 1)
    }

    /// Detector index of `check` comparing readout `round` with the one before.
    pub fn detector(&self, kind: StabilizerKind, check: usize, round: usize) -> u32 {
        (round * self.layout.checks(kind).len() + check) as u32
    }

    /// Propagates the injected Paulis to the end of the experiment.
    pub fn simulate(&self, injections: &[Injection]) -> Effect {
        let n = self.layout.qubit_count();
        let mut x = vec![false; n];
        let mut z = vec![false; n];
        let checks = [self.layout.checks(StabilizerKind::X).len(), self.layout.checks(StabilizerKind::Z).len()];
        // Readout flips per sector, round-major.
        let mut flips = [vec![false; checks[0] * (self.rounds + 1)], vec![false; checks[1] * (self.rounds + 1)]];
        let first = injections.iter().map(|i| i.slot).min().unwrap_or(self.slots.len());
        let inject = |slot: usize, phase: Phase, x: &mut [bool], z: &mut [bool]| {
            for inj in injections.iter().filter(|i| i.slot == slot && i.phase == phase) {
                x[inj.qubit] ^= inj.pauli.has_x();
                z[inj.qubit] ^= inj.pauli.has_z();
            }
        };
        for (idx, slot) in self.slots.iter().enumerate().skip(first) {
            let step = self.step(idx);
            let checks_here = self.layout.checks(slot.kind);
            for &c in &step.prepare {
                let a = checks_here[c].ancilla;
                x[a] = false;
                z[a] = false;
            }
            inject(idx, Phase::Before, &mut x, &mut z);
            for &(a, d) in &step.couplings {
                match slot.kind {
                    StabilizerKind::X => {
                        x[d] ^= x[a];
                        z[a] ^= z[d];
                    }
                    StabilizerKind::Z => {
                        x[a] ^= x[d];
                        z[d] ^= z[a];
                    }
                }
            }
            inject(idx, Phase::After, &mut x, &mut z);
            let s = sector(slot.kind);
            for &c in &step.measure {
                let a = checks_here[c].ancilla;
                let flip = match slot.kind {
                    StabilizerKind::X => z[a],
                    StabilizerKind::Z => x[a],
                };
                flips[s][slot.round * checks[s] + c] = flip;
            }
        }
        for kind in [StabilizerKind::X, StabilizerKind::Z] {
            let s = sector(kind);
            let bits = if kind == StabilizerKind::X { &z } else { &x };
            for (c, check) in self.layout.checks(kind).iter().enumerate() {
                flips[s][self.rounds * checks[s] + c] = check.support.iter().fold(false, |acc, &q| acc ^ bits[q]);
            }
        }
        let mut effect = Effect::default();
        for s in 0..2 {
            for r in 0..=self.rounds {
                for c in 0..checks[s] {
                    let prev = if r == 0 { false } else { flips[s][(r - 1) * checks[s] + c] };
                    if flips[s][r * checks[s] + c] != prev {
                        effect.detectors[s].push((r * checks[s] + c) as u32);
                    }
                }
            }
        }
        effect.observables[0] = self.layout.logical_x().iter().fold(false, |acc, &q| acc ^ z[q]);
        effect.observables[1] = self.layout.logical_z().iter().fold(false, |acc, &q| acc ^ x[q]);
        effect
    }
}
