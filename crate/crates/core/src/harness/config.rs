//! Experiment configuration files.
//!
//! ```toml
//! kind = "qec-sweep"
//! seed = 7
//!
//! [output]
//! dir = "runs/threshold"
//!
//! [qec]
//! distances = [5, 7]
//! p = "5e-3:3e-2:log12"
//! mode = "coupled-only"
//! shots = 20000
//! ```
//!
//! Sections mirror the modules: `[traj]` picks the gate trajectory,
//! `[rates]` (or a `rates_file`) holds physical rates, and `[channel]`,
//! `[oracle]`, `[qec]`, `[gain]` configure the experiment kinds.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::noisechan::{RateSet, ScatterVariant};
use crate::qecsim::{PairMode, Schedule, MAX_DISTANCE, MIN_DISTANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Traj,
    Channel,
    Oracle,
    QecSweep,
    QecGain,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Traj => "traj",
            Self::Channel => "channel",
            Self::Oracle => "oracle",
            Self::QecSweep => "qec-sweep",
            Self::QecGain => "qec-gain",
        })
    }
}

/// Which noise process a channel or oracle run models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Scatter,
    Heating,
    Dephasing,
}

impl FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scatter" => Ok(Self::Scatter),
            "heating" => Ok(Self::Heating),
            "dephasing" => Ok(Self::Dephasing),
            _ => Err(format!("unknown noise kind {s:?} (scatter, heating, dephasing)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajSource {
    Ms,
    Robust,
    GateFile,
    Csv,
}

/// Gate trajectory to build or load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajSection {
    pub source: TrajSource,
    /// Ion count for the analytic gates.
    pub ions: usize,
    pub tau_us: f64,
    pub grid: usize,
    /// Gate description for `gate-file`.
    pub gate: Option<PathBuf>,
    /// Trajectory and phase tables for `csv`.
    pub traj_csv: Option<PathBuf>,
    pub phi_csv: Option<PathBuf>,
    /// Fail the run when the quadrature error estimate exceeds this.
    pub max_quadrature_error: Option<f64>,
    pub traj_out: String,
    pub phi_out: String,
}

impl Default for TrajSection {
    fn default() -> Self {
        Self {
            source: TrajSource::Ms,
            ions: 2,
            tau_us: 200.0,
            grid: crate::gatekit::DEFAULT_GRID_POINTS,
            gate: None,
            traj_csv: None,
            phi_csv: None,
            max_quadrature_error: None,
            traj_out: "traj.csv".into(),
            phi_out: "phi.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub kind: NoiseKind,
    pub faulty: usize,
    pub variant: ScatterVariant,
    pub truncation: f64,
    pub out: String,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { kind: NoiseKind::Scatter, faulty: 0, variant: ScatterVariant::Z, truncation: 0.0, out: "channel.json".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub noise: NoiseKind,
    pub faulty: usize,
    pub variant: ScatterVariant,
    pub cutoff: usize,
    pub shots: usize,
    /// Treat cutoff leakage above the warning level as a failure.
    pub strict_leakage: bool,
    pub out: String,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            noise: NoiseKind::Dephasing,
            faulty: 0,
            variant: ScatterVariant::Z,
            cutoff: 20,
            shots: 50_000,
            strict_leakage: false,
            out: "hist.csv".into(),
        }
    }
}

/// A list of rates given either literally or as `"lo:hi:logN"` /
/// `"lo:hi:linN"`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 1 {
            return s
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?} in grid {s:?}")))
                .collect::<Result<Vec<_>, _>>()
                .map(Grid);
        }
        let [lo, hi, spec] = parts[..] else {
            return Err(format!("grid {s:?} must look like lo:hi:logN or lo:hi:linN"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound in {s:?}"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound in {s:?}"))?;
        let (log, count) = if let Some(n) = spec.strip_prefix("log") {
            (true, n)
        } else if let Some(n) = spec.strip_prefix("lin") {
            (false, n)
        } else {
            return Err(format!("grid spacing in {s:?} must be logN or linN"));
        };
        let count: usize = count.parse().map_err(|_| format!("bad point count in {s:?}"))?;
        if count < 2 || !(hi > lo) || (log && lo <= 0.0) {
            return Err(format!("grid {s:?} needs lo < hi, at least two points and lo > 0 for log spacing"));
        }
        let values = (0..count)
            .map(|i| {
                let f = i as f64 / (count - 1) as f64;
                if log {
                    (lo.ln() + f * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + f * (hi - lo)
                }
            })
            .collect();
        Ok(Grid(values))
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            Spec(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(Grid(v)),
            Raw::Spec(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Rounds per memory experiment: a number, or `auto` for the distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rounds(pub Option<usize>);

impl FromStr for Rounds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Rounds(None));
        }
        s.parse().map(|r| Rounds(Some(r))).map_err(|_| format!("rounds must be a number or \"auto\", got {s:?}"))
    }
}

impl Serialize for Rounds {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(r) => s.serialize_u64(r as u64),
            None => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for Rounds {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(r) => Ok(Rounds(Some(r))),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Threshold sweep over distances and physical rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QecSection {
    pub distances: Vec<usize>,
    pub p: Grid,
    pub mode: PairMode,
    /// Fixed two-qubit rate; when absent it follows `p`.
    pub p2q: Option<f64>,
    pub rounds: Rounds,
    pub schedule: Schedule,
    pub shots: usize,
    /// Scattering tables read from channel files instead of the MS forms.
    pub scatter_channels: Vec<PathBuf>,
    pub out: String,
}

impl Default for QecSection {
    fn default() -> Self {
        Self {
            distances: vec![5, 7],
            p: Grid(vec![5e-3, 1e-2, 2e-2]),
            mode: PairMode::CoupledOnly,
            p2q: None,
            rounds: Rounds(None),
            schedule: Schedule::Simultaneous,
            shots: 20_000,
            scatter_channels: Vec::new(),
            out: "sweep.csv".into(),
        }
    }
}

/// Gain factor against two-qubit error rate for one or more schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainSection {
    pub distance: usize,
    pub p1q: f64,
    pub p2q_grid: Grid,
    pub schedules: Vec<Schedule>,
    pub mode: PairMode,
    pub rounds: Rounds,
    pub shots: usize,
    pub scatter_channels: Vec<PathBuf>,
    pub out: String,
}

impl Default for GainSection {
    fn default() -> Self {
        Self {
            distance: 5,
            p1q: 1e-3,
            p2q_grid: Grid(vec![1e-5, 3e-5, 1e-4]),
            schedules: vec![Schedule::Simultaneous, Schedule::SplitRows],
            mode: PairMode::AllPairs,
            rounds: Rounds(None),
            shots: 100_000,
            scatter_channels: Vec::new(),
            out: "gain.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Replace artifacts written under a different configuration.
    #[serde(skip_serializing)]
    pub force: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("."), force: false }
    }
}

/// One experiment: its kind, seed, output location and the sections the
/// kind reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub traj: TrajSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RateSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates_file: Option<PathBuf>,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub qec: QecSection,
    #[serde(default)]
    pub gain: GainSection,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("", &["kind", "seed", "output", "traj", "rates", "rates_file", "channel", "oracle", "qec", "gain"]),
    ("output", &["dir", "force"]),
    (
        "traj",
        &["source", "ions", "tau_us", "grid", "gate", "traj_csv", "phi_csv", "max_quadrature_error", "traj_out", "phi_out"],
    ),
    ("rates", &["gamma_s_hz", "gamma_h_hz", "nbar_th", "gamma_d_hz", "nbar"]),
    ("channel", &["kind", "faulty", "variant", "truncation", "out"]),
    ("oracle", &["noise", "faulty", "variant", "cutoff", "shots", "strict_leakage", "out"]),
    ("qec", &["distances", "p", "mode", "p2q", "rounds", "schedule", "shots", "scatter_channels", "out"]),
    ("gain", &["distance", "p1q", "p2q_grid", "schedules", "mode", "rounds", "shots", "scatter_channels", "out"]),
];

fn unknown_keys(table: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    let allowed = |section: &str| KNOWN.iter().find(|(s, _)| *s == section).map(|(_, k)| *k);
    for (key, value) in table {
        if !allowed("").is_some_and(|k| k.contains(&key.as_str())) {
            out.push(format!("{key}: unknown key"));
            continue;
        }
        if let (Some(keys), Some(inner)) = (allowed(key), value.as_table()) {
            for k in inner.keys() {
                if !keys.contains(&k.as_str()) {
                    out.push(format!("{key}.{k}: unknown key"));
                }
            }
        }
    }
    out
}

impl ExperimentConfig {
    /// Defaults for a kind, as used when every setting comes from flags.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            seed: 0,
            output: OutputSection::default(),
            traj: TrajSection::default(),
            rates: None,
            rates_file: None,
            channel: ChannelSection::default(),
            oracle: OracleSection::default(),
            qec: QecSection::default(),
            gain: GainSection::default(),
        }
    }

    /// Parses a config document. A missing `kind` is filled from
    /// `default_kind` when given. Relative paths are kept as written.
    pub fn parse(text: &str, default_kind: Option<ExperimentKind>) -> Result<Self, HarnessError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Config(vec![e.to_string()]))?;
        let unknown = unknown_keys(&table);
        if !unknown.is_empty() {
            return Err(HarnessError::Config(unknown));
        }
        if !table.contains_key("kind") {
            match default_kind {
                Some(k) => {
                    table.insert("kind".into(), toml::Value::String(k.to_string()));
                }
                None => return Err(HarnessError::Config(vec!["kind: missing".into()])),
            }
        }
        table.try_into::<Self>().map_err(|e| HarnessError::Config(vec![e.to_string()]))
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path, default_kind: Option<ExperimentKind>) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(vec![format!("{}: {e}", path.display())]))?;
        let mut cfg = Self::parse(&text, default_kind)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output.dir);
        for p in [&mut self.traj.gate, &mut self.traj.traj_csv, &mut self.traj.phi_csv, &mut self.rates_file]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        self.qec.scatter_channels.iter_mut().for_each(fix);
        self.gain.scatter_channels.iter_mut().for_each(fix);
    }

    /// Input files the selected kind reads.
    pub fn referenced_files(&self) -> Vec<PathBuf> {
        let mut out = Vec::new();
        let uses_traj = matches!(self.kind, ExperimentKind::Traj | ExperimentKind::Channel | ExperimentKind::Oracle);
        if uses_traj {
            match self.traj.source {
                TrajSource::GateFile => out.extend(self.traj.gate.clone()),
                TrajSource::Csv => {
                    out.extend(self.traj.traj_csv.clone());
                    out.extend(self.traj.phi_csv.clone());
                }
                _ => {}
            }
        }
        if matches!(self.kind, ExperimentKind::Channel | ExperimentKind::Oracle) {
            out.extend(self.rates_file.clone());
        }
        match self.kind {
            ExperimentKind::QecSweep => out.extend(self.qec.scatter_channels.clone()),
            ExperimentKind::QecGain => out.extend(self.gain.scatter_channels.clone()),
            _ => {}
        }
        out
    }

    /// Every problem with the configuration, keyed by setting.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut errs = Vec::new();
        let uses_traj = matches!(self.kind, ExperimentKind::Traj | ExperimentKind::Channel | ExperimentKind::Oracle);
        if uses_traj {
            let t = &self.traj;
            match t.source {
                TrajSource::Ms | TrajSource::Robust => {
                    if t.ions < 2 {
                        errs.push(format!("traj.ions: need at least 2, got {}", t.ions));
                    }
                    if !(t.tau_us.is_finite() && t.tau_us > 0.0) {
                        errs.push(format!("traj.tau_us: must be positive, got {}", t.tau_us));
                    }
                }
                TrajSource::GateFile if t.gate.is_none() => errs.push("traj.gate: required for source gate-file".into()),
                TrajSource::Csv if t.traj_csv.is_none() || t.phi_csv.is_none() => {
                    errs.push("traj.traj_csv, traj.phi_csv: both required for source csv".into())
                }
                _ => {}
            }
            if t.source != TrajSource::Csv && t.grid < crate::gatekit::MIN_GRID_POINTS {
                errs.push(format!("traj.grid: need at least {}, got {}", crate::gatekit::MIN_GRID_POINTS, t.grid));
            }
        }
        if matches!(self.kind, ExperimentKind::Channel | ExperimentKind::Oracle) {
            if self.rates.is_some() && self.rates_file.is_some() {
                errs.push("rates, rates_file: give one, not both".into());
            }
            if self.rates.is_none() && self.rates_file.is_none() {
                errs.push("rates: a [rates] section or rates_file is required".into());
            }
        }
        match self.kind {
            ExperimentKind::Channel => {
                let c = &self.channel;
                if !(0.0..=1e-3).contains(&c.truncation) {
                    errs.push(format!("channel.truncation: must lie in [0, 1e-3], got {}", c.truncation));
                }
                if self.traj.source != TrajSource::GateFile && self.traj.source != TrajSource::Csv && c.faulty >= self.traj.ions {
                    errs.push(format!("channel.faulty: ion {} outside a {}-ion gate", c.faulty, self.traj.ions));
                }
            }
            ExperimentKind::Oracle => {
                let o = &self.oracle;
                if o.shots == 0 {
                    errs.push("oracle.shots: must be positive".into());
                }
                if o.cutoff < crate::oracle::MIN_CUTOFF {
                    errs.push(format!("oracle.cutoff: need at least {}, got {}", crate::oracle::MIN_CUTOFF, o.cutoff));
                }
                if matches!(self.traj.source, TrajSource::Ms | TrajSource::Robust) {
                    if self.traj.ions > crate::oracle::MAX_SPINS {
                        errs.push(format!("traj.ions: oracle handles at most {} ions", crate::oracle::MAX_SPINS));
                    }
                    if o.faulty >= self.traj.ions {
                        errs.push(format!("oracle.faulty: ion {} outside a {}-ion gate", o.faulty, self.traj.ions));
                    }
                }
            }
            ExperimentKind::QecSweep => {
                let q = &self.qec;
                check_distances("qec.distances", &q.distances, &mut errs);
                if q.distances.len() < 2 {
                    errs.push("qec.distances: a sweep needs at least two distances".into());
                }
                check_probabilities("qec.p", &q.p.0, &mut errs);
                if let Some(p) = q.p2q {
                    check_probabilities("qec.p2q", &[p], &mut errs);
                }
                check_rounds("qec.rounds", q.rounds, &mut errs);
                if q.shots == 0 {
                    errs.push("qec.shots: must be positive".into());
                }
            }
            ExperimentKind::QecGain => {
                let g = &self.gain;
                check_distances("gain.distance", &[g.distance], &mut errs);
                check_probabilities("gain.p1q", &[g.p1q], &mut errs);
                check_probabilities("gain.p2q_grid", &g.p2q_grid.0, &mut errs);
                check_rounds("gain.rounds", g.rounds, &mut errs);
                if g.schedules.is_empty() {
                    errs.push("gain.schedules: list at least one schedule".into());
                }
                if g.shots == 0 {
                    errs.push("gain.shots: must be positive".into());
                }
            }
            ExperimentKind::Traj => {}
        }
        for path in self.referenced_files() {
            if !path.is_file() {
                errs.push(format!("{}: file not found", path.display()));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(errs))
        }
    }

    /// Content hash of the settings that shape the results: the config
    /// itself (without output location or force flag) plus the bytes of
    /// every referenced input file.
    pub fn digest(&self) -> Result<String, HarnessError> {
        let mut canonical = self.clone();
        canonical.output.dir = PathBuf::new();
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&canonical).expect("config serializes"));
        let files: BTreeSet<PathBuf> = self.referenced_files().into_iter().collect();
        for path in files {
            let bytes = std::fs::read(&path).map_err(|e| HarnessError::Config(vec![format!("{}: {e}", path.display())]))?;
            hasher.update(Sha256::digest(&bytes));
        }
        Ok(hex::encode(hasher.finalize()))
    }
}

fn check_distances(key: &str, ds: &[usize], errs: &mut Vec<String>) {
    for &d in ds {
        if d % 2 == 0 || !(MIN_DISTANCE..=MAX_DISTANCE).contains(&d) {
            errs.push(format!("{key}: {d} is not an odd distance in {MIN_DISTANCE}..={MAX_DISTANCE}"));
        }
    }
}

fn check_probabilities(key: &str, ps: &[f64], errs: &mut Vec<String>) {
    if ps.is_empty() {
        errs.push(format!("{key}: empty"));
    }
    for &p in ps {
        if !(0.0..=1.0).contains(&p) {
            errs.push(format!("{key}: {p} is not a probability"));
        }
    }
}

fn check_rounds(key: &str, rounds: Rounds, errs: &mut Vec<String>) {
    if rounds.0 == Some(0) {
        errs.push(format!("{key}: need at least one round"));
    }
}
