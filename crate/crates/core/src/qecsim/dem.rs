//! Detector error model: every fault mechanism with the detectors and
//! observables it flips (for sampling), and its decomposition into
//! matching-graph edges (for decoding).

use std::collections::HashMap;

use crate::noisechan::Pauli;

use super::circuit::{Effect, Injection, MemoryCircuit, Phase};
use super::layout::StabilizerKind;
use super::noise::{step_mechanisms, NoiseModel};

/// Edge of a sector's matching graph; `b == None` joins the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub a: u32,
    pub b: Option<u32>,
    pub p: f64,
    pub flips_observable: bool,
}

/// Mechanisms sharing one firing probability, for geometric skipping.
#[derive(Debug, Clone)]
pub(crate) struct SampleGroup {
    pub p: f64,
    pub mechanisms: Vec<SampledMechanism>,
}

#[derive(Debug, Clone)]
pub(crate) struct SampledMechanism {
    /// Cumulative conditional outcome probabilities.
    pub cumulative: Vec<f64>,
    pub effects: Vec<Effect>,
}

#[derive(Debug, Clone)]
pub struct DetectorErrorModel {
    circuit: MemoryCircuit,
    pub(crate) groups: Vec<SampleGroup>,
    edges: [Vec<GraphEdge>; 2],
    /// Components that could not be reduced to graph edges.
    undecomposed: usize,
}

type ComponentKey = (usize, Phase, usize, bool);

struct Builder<'a> {
    circuit: &'a MemoryCircuit,
    full: HashMap<ComponentKey, Effect>,
    parts: HashMap<ComponentKey, Vec<Effect>>,
    undecomposed: usize,
}

impl<'a> Builder<'a> {
    /// Full effect of one Pauli bit (`true` for X) on one qubit.
    fn effect(&mut self, key: ComponentKey) -> Effect {
        if let Some(e) = self.full.get(&key) {
            return e.clone();
        }
        let (slot, phase, qubit, is_x) = key;
        let pauli = if is_x { Pauli::X } else { Pauli::Z };
        let e = self.circuit.simulate(&[Injection { slot, phase, qubit, pauli }]);
        self.full.insert(key, e.clone());
        e
    }

    /// Splits a single-bit fault into pieces that flip at most two
    /// detectors per sector, by pushing it through the gate it precedes.
    fn parts(&mut self, key: ComponentKey) -> Vec<Effect> {
        if let Some(p) = self.parts.get(&key) {
            return p.clone();
        }
        let whole = self.effect(key);
        let out = if whole.detectors.iter().all(|d| d.len() <= 2) {
            vec![whole]
        } else {
            let (slot, phase, qubit, is_x) = key;
            match phase {
                Phase::Before => {
                    let step = self.circuit.step(slot);
                    let x_round = step.kind == StabilizerKind::X;
                    // X on a control copies to the target, Z on a target to the control.
                    let mut spread: Vec<usize> = vec![qubit];
                    for &(a, d) in &step.couplings {
                        let (control, target) = if x_round { (a, d) } else { (d, a) };
                        if is_x && control == qubit {
                            spread.push(target);
                        }
                        if !is_x && target == qubit {
                            spread.push(control);
                        }
                    }
                    if spread.len() == 1 {
                        self.fallback(whole)
                    } else {
                        spread.iter().flat_map(|&q| self.parts((slot, Phase::After, q, is_x))).collect()
                    }
                }
                Phase::After if slot + 1 < self.circuit.slots().len() => self.parts((slot + 1, Phase::Before, qubit, is_x)),
                Phase::After => self.fallback(whole),
            }
        };
        self.parts.insert(key, out.clone());
        out
    }

    /// Pairs detectors in order when no structural split exists.
    fn fallback(&mut self, whole: Effect) -> Vec<Effect> {
        self.undecomposed += 1;
        log::debug!("fault flips {:?} detectors; pairing greedily", [whole.detectors[0].len(), whole.detectors[1].len()]);
        let mut out = Vec::new();
        for s in 0..2 {
            for (i, chunk) in whole.detectors[s].chunks(2).enumerate() {
                let mut e = Effect::default();
                e.detectors[s] = chunk.to_vec();
                e.observables[s] = i == 0 && whole.observables[s];
                out.push(e);
            }
        }
        out
    }
}

fn combine(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

impl DetectorErrorModel {
    pub fn build(circuit: MemoryCircuit, noise: &NoiseModel) -> Self {
        let mut b = Builder { circuit: &circuit, full: HashMap::new(), parts: HashMap::new(), undecomposed: 0 };
        let mut groups: Vec<SampleGroup> = Vec::new();
        let mut edge_p: [HashMap<(u32, Option<u32>, bool), f64>; 2] = [HashMap::new(), HashMap::new()];
        for slot in 0..circuit.slots().len() {
            let step = circuit.step(slot).clone();
            for mech in step_mechanisms(circuit.layout(), &step, noise, circuit.slots()[slot].step == 0) {
                let mut cumulative = Vec::with_capacity(mech.outcomes.len());
                let mut effects = Vec::with_capacity(mech.outcomes.len());
                let mut acc = 0.0;
                for (q, faults) in &mech.outcomes {
                    acc += q;
                    let mut total = Effect::default();
                    let mut pieces: [Vec<(u32, Option<u32>, bool)>; 2] = [Vec::new(), Vec::new()];
                    for &(qubit, pauli) in faults {
                        for (is_x, present) in [(true, pauli.has_x()), (false, pauli.has_z())] {
                            if !present {
                                continue;
                            }
                            let key = (slot, Phase::Before, qubit, is_x);
                            total = total.xor(&b.effect(key));
                            for part in b.parts(key) {
                                for s in 0..2 {
                                    let d = &part.detectors[s];
                                    let edge = match d.len() {
                                        0 => continue,
                                        1 => (d[0], None, part.observables[s]),
                                        _ => (d[0], Some(d[1]), part.observables[s]),
                                    };
                                    pieces[s].push(edge);
                                }
                            }
                        }
                    }
                    // Identical edges from different pieces cancel.
                    for (s, list) in pieces.iter_mut().enumerate() {
                        list.sort_by_key(|e| (e.0, e.1, e.2));
                        let mut i = 0;
                        while i < list.len() {
                            if i + 1 < list.len() && list[i] == list[i + 1] {
                                i += 2;
                                continue;
                            }
                            let slot_p = edge_p[s].entry(list[i]).or_insert(0.0);
                            *slot_p = combine(*slot_p, mech.p * q);
                            i += 1;
                        }
                    }
                    cumulative.push(acc);
                    effects.push(total);
                }
                let sampled = SampledMechanism { cumulative, effects };
                match groups.iter_mut().find(|g| g.p == mech.p) {
                    Some(g) => g.mechanisms.push(sampled),
                    None => groups.push(SampleGroup { p: mech.p, mechanisms: vec![sampled] }),
                }
            }
        }
        let undecomposed = b.undecomposed;
        let edges = edge_p.map(|map| {
            // Keep the likelier observable label when two edges share endpoints.
            let mut best: HashMap<(u32, Option<u32>), GraphEdge> = HashMap::new();
            for ((a, bnode, obs), p) in map {
                let e = GraphEdge { a, b: bnode, p, flips_observable: obs };
                best.entry((a, bnode))
                    .and_modify(|cur| {
                        if p > cur.p {
                            *cur = e;
                        }
                    })
                    .or_insert(e);
            }
            let mut list: Vec<GraphEdge> = best.into_values().collect();
            list.sort_by_key(|e| (e.a, e.b));
            list
        });
        Self { circuit, groups, edges, undecomposed }
    }

    pub fn circuit(&self) -> &MemoryCircuit {
        &self.circuit
    }

    /// Matching-graph edges of a sector (0: X checks, 1: Z checks).
    pub fn edges(&self, sector: usize) -> &[GraphEdge] {
        &self.edges[sector]
    }

    pub fn undecomposed_faults(&self) -> usize {
        self.undecomposed
    }

    pub fn mechanism_count(&self) -> usize {
        self.groups.iter().map(|g| g.mechanisms.len()).sum()
    }

    /// Expected number of fired mechanisms per shot.
    pub fn expected_faults(&self) -> f64 {
        self.groups.iter().map(|g| g.p * g.mechanisms.len() as f64).sum()
    }
}
