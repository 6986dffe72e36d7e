//! Data behind the published plots, at desk scale.
//!
//! Shot counts per figure and scale:
//!
//! | id | content | full | quick |
//! |----|---------|------|-------|
//! | 1c | hook distributions, 4 and 5 data qubits | exact | exact |
//! | 2a | heating flips by weight, MS N=3 (oracle) and N=6 | 20 000 | 2 000 |
//! | 2b | dephasing flips by weight, MS and robust N=3 | 20 000 | 2 000 |
//! | 3a | all-pairs sweep, d 5 and 7, p_2q = 3e-5 | 20 000 per point | 1 000 |
//! | 3b | coupled-only sweep, d 5, 7 and 9 | 20 000 per point | 1 000 |
//! | 4a | gain against p_2q, d = 5, both schedules | 100 000 per point | 5 000 |
//!
//! Sweeps use 12 log-spaced points in `[5e-3, 3e-2]`; the quick scale uses 5.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde_json::json;
use sha2::{Digest, Sha256};

use super::artifacts::Artifact;
use super::config::{ExperimentConfig, ExperimentKind, Grid, NoiseKind, Rounds};
use super::run::{compute, oracle_jumps, Outcome, RunManifest};
use super::tables::num;
use super::HarnessError;
use crate::gatekit::{ms_trajectory, robust_trajectory, TrajectoryTable, DEFAULT_GRID_POINTS};
use crate::noisechan::{
    dephasing_channel, heating_channel, hook_distribution, two_qubit_hook_distribution, PauliChannel, RateSet,
    ScatterVariant,
};
use crate::oracle::{evolve_jump, OracleConfig};
use crate::qecsim::{PairMode, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    HookDistribution,
    HeatingFlips,
    DephasingFlips,
    AllPairsThreshold,
    CoupledThreshold,
    ScheduleGain,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [
        Self::HookDistribution,
        Self::HeatingFlips,
        Self::DephasingFlips,
        Self::AllPairsThreshold,
        Self::CoupledThreshold,
        Self::ScheduleGain,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::HookDistribution => "1c",
            Self::HeatingFlips => "2a",
            Self::DephasingFlips => "2b",
            Self::AllPairsThreshold => "3a",
            Self::CoupledThreshold => "3b",
            Self::ScheduleGain => "4a",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FigureId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().trim_start_matches("fig").to_ascii_lowercase();
        Self::ALL.into_iter().find(|f| f.label() == key).ok_or_else(|| HarnessError::UnknownFigure(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FigureScale {
    #[default]
    Full,
    /// Fewer shots and grid points, for smoke tests.
    Quick,
}

impl FigureScale {
    fn pick<T>(self, full: T, quick: T) -> T {
        match self {
            Self::Full => full,
            Self::Quick => quick,
        }
    }
}

const TAU_US: f64 = 450.0;
const CUTOFF: usize = 20;

/// Computes one figure's data and writes `fig<id>.csv` plus
/// `fig<id>.manifest.json` into `dir`.
pub fn reproduce_figure(id: FigureId, dir: &Path, force: bool, scale: FigureScale) -> Result<RunManifest, HarnessError> {
    let start = Instant::now();
    let name = format!("fig{id}.csv");
    let (outcome, digest) = match id {
        FigureId::HookDistribution => {
            let digest = figure_digest(id, &json!({ "data_qubits": [4, 5] }));
            (hook_figure(&name, &digest), digest)
        }
        FigureId::HeatingFlips | FigureId::DephasingFlips => {
            let shots = scale.pick(20_000, 2_000);
            let digest = figure_digest(id, &json!({ "shots": shots, "tau_us": TAU_US, "cutoff": CUTOFF }));
            (flip_figure(id, &name, shots, &digest)?, digest)
        }
        FigureId::AllPairsThreshold | FigureId::CoupledThreshold | FigureId::ScheduleGain => {
            let mut cfg = qec_config(id, scale);
            cfg.output.dir = dir.to_path_buf();
            cfg.validate()?;
            let digest = cfg.digest()?;
            (compute(&cfg, &digest)?, digest)
        }
    };
    let mut outcome = outcome;
    for a in &mut outcome.artifacts {
        a.name.clone_from(&name);
    }
    outcome.finish(dir, &digest, force, &format!("figure-{id}"), &format!("fig{id}.manifest.json"), start)
}

fn figure_digest(id: FigureId, params: &serde_json::Value) -> String {
    let doc = json!({ "figure": id.label(), "params": params });
    hex::encode(Sha256::digest(serde_json::to_vec(&doc).expect("JSON value serializes")))
}

fn hook_figure(name: &str, digest: &str) -> Outcome {
    let mut rows = Vec::new();
    for n in [4, 5] {
        let mq = hook_distribution(n);
        let tq = two_qubit_hook_distribution(n);
        for (k, (a, b)) in mq.iter().zip(&tq).enumerate() {
            rows.push(vec![n.to_string(), k.to_string(), num(*a), num(*b)]);
        }
    }
    let mut out = Outcome::default();
    out.artifacts.push(Artifact::csv(name, &["data_qubits", "flips", "multiqubit", "two_qubit"], &rows, digest));
    out
}

/// Total probability of each flip count in a channel.
fn weight_masses(channel: &PauliChannel) -> Vec<f64> {
    let n = channel.qubit_count();
    let mut w = vec![0.0; n + 1];
    for (mask, p) in channel.flip_pattern_marginals() {
        w[mask.count_ones() as usize] += p;
    }
    w
}

fn flip_figure(id: FigureId, name: &str, shots: usize, digest: &str) -> Result<Outcome, HarnessError> {
    let tau = TAU_US * 1e-6;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let mut push = |out: &mut Outcome, label: &str, traj: TrajectoryTable, rates: &RateSet, noise: NoiseKind, oracle: bool| {
        let channel =
            if noise == NoiseKind::Heating { heating_channel(&traj, rates)? } else { dephasing_channel(&traj, rates)? };
        let analytic = weight_masses(&channel);
        let hist = if oracle {
            let cfg = OracleConfig {
                trajectory: traj.clone(),
                jumps: oracle_jumps(noise, 0, ScatterVariant::Z, rates),
                nbar: rates.nbar.clone(),
                cutoff: CUTOFF,
                shots,
                seed: 0,
            };
            Some(out.timed(&format!("oracle {label}"), || evolve_jump(&cfg))?)
        } else {
            None
        };
        for (w, a) in analytic.iter().enumerate() {
            let (o, e) = match &hist {
                Some(h) => (num(h.weight_probabilities[w]), num(h.weight_stderr[w])),
                None => (String::new(), String::new()),
            };
            rows.push(vec![label.to_string(), traj.ion_count().to_string(), w.to_string(), num(*a), o, e]);
        }
        Ok::<_, HarnessError>(())
    };
    if id == FigureId::HeatingFlips {
        // Gamma_h * nbar_th = 50 Hz.
        let rates = RateSet::uniform(1, 0.0, 50.0, 1.0, 0.0, 0.0);
        push(&mut out, "ms", ms_trajectory(3, tau, DEFAULT_GRID_POINTS)?, &rates, NoiseKind::Heating, true)?;
        push(&mut out, "ms", ms_trajectory(6, tau, DEFAULT_GRID_POINTS)?, &rates, NoiseKind::Heating, false)?;
    } else {
        let rates = RateSet::uniform(1, 0.0, 0.0, 0.0, 10.0, 1.0);
        push(&mut out, "ms", ms_trajectory(3, tau, DEFAULT_GRID_POINTS)?, &rates, NoiseKind::Dephasing, true)?;
        push(&mut out, "robust", robust_trajectory(3, tau, DEFAULT_GRID_POINTS)?, &rates, NoiseKind::Dephasing, true)?;
    }
    out.artifacts.push(Artifact::csv(
        name,
        &["gate", "ions", "flips", "analytic", "oracle", "oracle_stderr"],
        &rows,
        digest,
    ));
    Ok(out)
}

fn qec_config(id: FigureId, scale: FigureScale) -> ExperimentConfig {
    let grid: Grid = scale.pick("5e-3:3e-2:log12", "5e-3:3e-2:log5").parse().expect("static grid");
    let mut cfg;
    match id {
        FigureId::ScheduleGain => {
            cfg = ExperimentConfig::new(ExperimentKind::QecGain);
            cfg.gain.distance = 5;
            cfg.gain.p1q = 1e-3;
            cfg.gain.p2q_grid = Grid(vec![1e-5, 3e-5, 1e-4]);
            cfg.gain.schedules = vec![Schedule::Simultaneous, Schedule::SplitRows];
            cfg.gain.mode = PairMode::AllPairs;
            cfg.gain.rounds = Rounds(None);
            cfg.gain.shots = scale.pick(100_000, 5_000);
        }
        _ => {
            cfg = ExperimentConfig::new(ExperimentKind::QecSweep);
            cfg.qec.p = grid;
            cfg.qec.shots = scale.pick(20_000, 1_000);
            cfg.qec.rounds = Rounds(None);
            if id == FigureId::AllPairsThreshold {
                cfg.qec.distances = vec![5, 7];
                cfg.qec.mode = PairMode::AllPairs;
                cfg.qec.p2q = Some(3e-5);
            } else {
                cfg.qec.distances = vec![5, 7, 9];
                cfg.qec.mode = PairMode::CoupledOnly;
                cfg.qec.p2q = None;
            }
        }
    }
    cfg
}
