//! Orchestration of one configured experiment.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::artifacts::{write_artifacts, Artifact};
use super::config::{ExperimentConfig, ExperimentKind, NoiseKind, TrajSection, TrajSource};
use super::tables::{histogram_csv, num, read_trajectory_csv, sweep_row, trajectory_csv, SWEEP_HEADER};
use super::HarnessError;
use crate::gatekit::{closure_residual, load_gate_file, magnus_trajectories, ms_trajectory, robust_trajectory, TrajectoryTable};
use crate::noisechan::{
    dephasing_channel, heating_channel, scatter_correlated_channel, ChannelDocument, PauliChannel, RateSet, ScatterVariant,
};
use crate::oracle::{evolve_jump, heating_jumps, Jump, JumpOp, OracleConfig, LEAKAGE_WARNING};
use crate::qecsim::{crossing_estimate, gain_factor, run_memory, threshold_sweep, MemoryConfig, ScatterSource};

/// Name of the run summary written next to the artifacts.
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub name: String,
    pub seconds: f64,
}

/// What a run did. Timings make it differ between otherwise identical
/// runs, so it is kept apart from the result artifacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub kind: String,
    pub wall_clock_s: f64,
    pub stages: Vec<StageTiming>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
    /// Headline numbers, e.g. a threshold crossing or gain ratios.
    pub summary: BTreeMap<String, f64>,
}

/// Artifacts and bookkeeping of a finished computation, not yet written.
#[derive(Debug, Default)]
pub(crate) struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub stages: Vec<StageTiming>,
    pub warnings: Vec<String>,
    pub summary: BTreeMap<String, f64>,
}

impl Outcome {
    pub(crate) fn timed<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push(StageTiming { name: name.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    /// Writes the artifacts plus the manifest and returns the manifest.
    pub(crate) fn finish(
        self,
        dir: &Path,
        digest: &str,
        force: bool,
        kind: &str,
        manifest_name: &str,
        start: Instant,
    ) -> Result<RunManifest, HarnessError> {
        let Outcome { mut artifacts, stages, warnings, summary } = self;
        let mut names: Vec<String> = artifacts.iter().map(|a| a.name.clone()).collect();
        names.push(manifest_name.into());
        let manifest = RunManifest {
            config_digest: digest.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            kind: kind.into(),
            wall_clock_s: start.elapsed().as_secs_f64(),
            stages,
            warnings,
            artifacts: names,
            summary,
        };
        let value = serde_json::to_value(&manifest).expect("manifest serializes");
        artifacts.push(Artifact::json(manifest_name, value, digest));
        write_artifacts(dir, digest, force, &artifacts)?;
        Ok(manifest)
    }
}

/// Builds or loads the trajectory a section describes.
pub fn build_trajectory(section: &TrajSection) -> Result<TrajectoryTable, HarnessError> {
    let tau = section.tau_us * 1e-6;
    let traj = match section.source {
        TrajSource::Ms => ms_trajectory(section.ions, tau, section.grid)?,
        TrajSource::Robust => robust_trajectory(section.ions, tau, section.grid)?,
        TrajSource::GateFile => {
            let path = section.gate.as_deref().ok_or_else(|| missing("traj.gate"))?;
            let file = load_gate_file(path)?;
            magnus_trajectories(&file.gate, &file.modes, section.grid)?
        }
        TrajSource::Csv => {
            let t = section.traj_csv.as_deref().ok_or_else(|| missing("traj.traj_csv"))?;
            let p = section.phi_csv.as_deref().ok_or_else(|| missing("traj.phi_csv"))?;
            read_trajectory_csv(t, p)?
        }
    };
    if let Some(limit) = section.max_quadrature_error {
        let err = traj.quadrature_tolerance();
        if !(err <= limit) {
            return Err(HarnessError::Numerical(format!(
                "phase quadrature error {err:.3e} exceeds max_quadrature_error {limit:.3e}"
            )));
        }
    }
    Ok(traj)
}

fn missing(key: &str) -> HarnessError {
    HarnessError::Config(vec![format!("{key}: required")])
}

/// Rates from the config, with unset per-mode vectors filled with zeros.
fn load_rates(cfg: &ExperimentConfig, modes: usize) -> Result<RateSet, HarnessError> {
    let mut rates = match (&cfg.rates, &cfg.rates_file) {
        (Some(r), _) => r.clone(),
        (None, Some(path)) => RateSet::load(path)?,
        (None, None) => return Err(missing("rates")),
    };
    for v in [&mut rates.gamma_h, &mut rates.nbar_th, &mut rates.gamma_d, &mut rates.nbar] {
        if v.is_empty() {
            *v = vec![0.0; modes];
        }
    }
    rates.validate(modes)?;
    Ok(rates)
}

fn load_scatter_source(paths: &[std::path::PathBuf]) -> Result<ScatterSource, HarnessError> {
    if paths.is_empty() {
        return Ok(ScatterSource::MsClosedForm);
    }
    let channels = paths
        .iter()
        .map(|path| {
            let bytes = std::fs::read(path).map_err(|e| HarnessError::io(format!("reading {}", path.display()), e))?;
            let doc: ChannelDocument = serde_json::from_slice(&bytes)
                .map_err(|e| HarnessError::Config(vec![format!("{}: {e}", path.display())]))?;
            Ok(PauliChannel::from_document(&doc)?)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(ScatterSource::Channels(channels))
}

/// Validates, computes and writes one experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest, HarnessError> {
    let start = Instant::now();
    cfg.validate()?;
    let digest = cfg.digest()?;
    log::info!("{} run, config digest {}", cfg.kind, &digest[..12]);
    let outcome = compute(cfg, &digest)?;
    outcome.finish(&cfg.output.dir, &digest, cfg.output.force, &cfg.kind.to_string(), MANIFEST_NAME, start)
}

/// Computes every artifact of a validated config in memory.
pub(crate) fn compute(cfg: &ExperimentConfig, digest: &str) -> Result<Outcome, HarnessError> {
    let mut out = Outcome::default();
    match cfg.kind {
        ExperimentKind::Traj => {
            let traj = out.timed("trajectory", || build_trajectory(&cfg.traj))?;
            let (alpha, phase) = closure_residual(&traj);
            out.summary.insert("closure_alpha".into(), alpha);
            out.summary.insert("closure_phase".into(), phase);
            out.summary.insert("quadrature_error".into(), traj.quadrature_tolerance());
            out.artifacts.extend(trajectory_csv(&traj, digest, &cfg.traj.traj_out, &cfg.traj.phi_out));
        }
        ExperimentKind::Channel => {
            let traj = out.timed("trajectory", || build_trajectory(&cfg.traj))?;
            let rates = load_rates(cfg, traj.mode_count())?;
            let c = &cfg.channel;
            let channel = out.timed("channel", || match c.kind {
                NoiseKind::Scatter => {
                    scatter_correlated_channel(&traj, c.faulty, rates.gamma_s, &rates.nbar, c.truncation, c.variant)
                }
                NoiseKind::Heating => heating_channel(&traj, &rates),
                NoiseKind::Dephasing => dephasing_channel(&traj, &rates),
            })?;
            out.summary.insert("error_mass".into(), channel.error_mass());
            let value = serde_json::to_value(channel.to_document()).expect("channel serializes");
            out.artifacts.push(Artifact::json(&c.out, value, digest));
        }
        ExperimentKind::Oracle => {
            let traj = out.timed("trajectory", || build_trajectory(&cfg.traj))?;
            let rates = load_rates(cfg, traj.mode_count())?;
            let o = &cfg.oracle;
            let jumps = oracle_jumps(o.noise, o.faulty, o.variant, &rates);
            let oc = OracleConfig {
                trajectory: traj,
                jumps,
                nbar: rates.nbar.clone(),
                cutoff: o.cutoff,
                shots: o.shots,
                seed: cfg.seed,
            };
            let hist = out.timed("jump", || evolve_jump(&oc))?;
            if hist.leakage > LEAKAGE_WARNING {
                let msg = format!(
                    "top Fock level holds {:.2e} of the population (warning level {LEAKAGE_WARNING:.0e}); raise the cutoff",
                    hist.leakage
                );
                if o.strict_leakage {
                    return Err(HarnessError::Numerical(msg));
                }
                out.warn(msg);
            }
            out.summary.insert("leakage".into(), hist.leakage);
            out.summary.insert("error_mass".into(), 1.0 - hist.probabilities[0]);
            out.artifacts.push(histogram_csv(&o.out, &hist, digest));
        }
        ExperimentKind::QecSweep => {
            let q = &cfg.qec;
            let source = load_scatter_source(&q.scatter_channels)?;
            let template = MemoryConfig {
                distance: q.distances[0],
                rounds: q.rounds.0,
                schedule: q.schedule,
                p_ph: q.p.0[0],
                p_2q: q.p2q.unwrap_or(0.0),
                pair_mode: q.mode,
                shots: q.shots,
                seed: cfg.seed,
            };
            let points =
                out.timed("sweep", || threshold_sweep(&q.distances, &q.p.0, &template, q.p2q.is_none(), &source))?;
            match crossing_estimate(&points) {
                Some(x) => {
                    out.summary.insert("crossing".into(), x);
                }
                None => out.warn("logical error curves do not cross on this grid".into()),
            }
            let rows: Vec<Vec<String>> = points.iter().map(sweep_row).collect();
            out.artifacts.push(Artifact::csv(&q.out, &SWEEP_HEADER, &rows, digest));
        }
        ExperimentKind::QecGain => {
            let g = &cfg.gain;
            let source = load_scatter_source(&g.scatter_channels)?;
            let mut header: Vec<&str> = vec!["schedule"];
            header.extend(SWEEP_HEADER);
            header.push("gain");
            let mut rows = Vec::new();
            let mut by_schedule = Vec::new();
            for &schedule in &g.schedules {
                let mut rates = Vec::new();
                for &p2q in &g.p2q_grid.0 {
                    let mc = MemoryConfig {
                        distance: g.distance,
                        rounds: g.rounds.0,
                        schedule,
                        p_ph: g.p1q,
                        p_2q: p2q,
                        pair_mode: g.mode,
                        shots: g.shots,
                        seed: cfg.seed,
                    };
                    let r = out.timed(&format!("{schedule} p2q={}", num(p2q)), || run_memory(&mc, &source))?;
                    log::info!("{schedule} p2q={p2q:.1e}: {}/{} failures", r.failures, r.shots);
                    let mut row = vec![schedule.to_string()];
                    row.extend(sweep_row(&r));
                    row.push(num(gain_factor(r.p_ph, r.p_l)));
                    rows.push(row);
                    rates.push(r.p_l);
                }
                by_schedule.push((schedule, rates));
            }
            let find = |s| by_schedule.iter().find(|(k, _)| *k == s).map(|(_, r)| r);
            if let (Some(all), Some(split)) =
                (find(crate::qecsim::Schedule::Simultaneous), find(crate::qecsim::Schedule::SplitRows))
            {
                for ((p2q, a), s) in g.p2q_grid.0.iter().zip(all).zip(split) {
                    if *s > 0.0 {
                        out.summary.insert(format!("gain_ratio_split_over_all@{}", num(*p2q)), a / s);
                    }
                }
            }
            out.artifacts.push(Artifact::csv(&g.out, &header, &rows, digest));
        }
    }
    Ok(out)
}

/// Jump operators of a noise process on a gate.
pub(crate) fn oracle_jumps(noise: NoiseKind, faulty: usize, variant: ScatterVariant, rates: &RateSet) -> Vec<Jump> {
    match noise {
        NoiseKind::Scatter => {
            let op = match variant {
                ScatterVariant::Z => JumpOp::SigmaZ(faulty),
                ScatterVariant::Y => JumpOp::SigmaY(faulty),
            };
            vec![Jump::new(op, rates.gamma_s)]
        }
        NoiseKind::Heating => rates
            .gamma_h
            .iter()
            .zip(&rates.nbar_th)
            .enumerate()
            .flat_map(|(j, (&g, &nb))| heating_jumps(j, g, nb))
            .collect(),
        NoiseKind::Dephasing => {
            rates.gamma_d.iter().enumerate().map(|(j, &g)| Jump::new(JumpOp::Number(j), g)).collect()
        }
    }
}
