use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ionqec::harness::{
    configure_threads, reproduce_figure, run, ExperimentConfig, ExperimentKind, FigureId, FigureScale, Grid,
    HarnessError, NoiseKind, Rounds, RunManifest, TrajSource,
};
use ionqec::noisechan::ScatterVariant;
use ionqec::qecsim::{PairMode, Schedule};

/// Noise channels for trapped-ion multiqubit gates and the surface-code
/// memory benchmark built on them.
///
/// Settings come from built-in defaults, then a `--config` file, then
/// flags; later sources win. Exit status: 0 success, 2 invalid input,
/// 3 numerical guard tripped, 4 size limit or file-system failure.
#[derive(Parser)]
#[command(name = "ionqec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Worker threads (overrides IONQEC_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replace artifacts written under a different configuration.
    #[arg(long, global = true)]
    force: bool,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Build a gate trajectory and write traj.csv and phi.csv.
    Traj(TrajArgs),
    /// Build a Pauli channel and write it as JSON.
    Channel(ChannelArgs),
    /// Run the quantum-jump oracle and write a flip histogram.
    Oracle(OracleArgs),
    /// Surface-code memory experiments.
    #[command(subcommand)]
    Qec(QecCommand),
    /// Run any experiment from a config file.
    Run(RunArgs),
    /// Regenerate the data behind a figure.
    Figures(FigureArgs),
}

#[derive(Subcommand)]
enum QecCommand {
    /// Logical error rate against physical rate for several distances.
    Sweep(SweepArgs),
    /// Gain factor against two-qubit rate for each schedule.
    Gain(GainArgs),
}

#[derive(Args)]
struct GateArgs {
    /// `ms`, `robust` or the path of a TOML gate file.
    #[arg(long)]
    gate: Option<String>,
    /// Ion count for the analytic gates.
    #[arg(long)]
    ions: Option<usize>,
    /// Gate duration in microseconds for the analytic gates.
    #[arg(long)]
    tau_us: Option<f64>,
    /// Time samples on the trajectory grid.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct TrajArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    gate: GateArgs,
    /// Fail with status 3 when the phase quadrature error is larger.
    #[arg(long)]
    max_quadrature_error: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    gate: GateArgs,
    /// Trajectory table written by `traj` (use with --phi).
    #[arg(long, requires = "phi")]
    traj: Option<PathBuf>,
    #[arg(long, requires = "traj")]
    phi: Option<PathBuf>,
    /// Rates file (TOML).
    #[arg(long)]
    rates: Option<PathBuf>,
    #[arg(long)]
    kind: Option<NoiseKind>,
    /// Ion carrying the scattering event.
    #[arg(long)]
    faulty: Option<usize>,
    /// Scattering operator: z or y.
    #[arg(long, value_parser = parse_variant)]
    variant: Option<ScatterVariant>,
    /// Drop strings less likely than this.
    #[arg(long)]
    truncation: Option<f64>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<usize>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Code distances, e.g. 5,7,9.
    #[arg(long = "d", value_delimiter = ',')]
    distances: Vec<usize>,
    /// Physical rates: a list or `lo:hi:logN`.
    #[arg(long)]
    p: Option<Grid>,
    /// all-pairs or coupled-only.
    #[arg(long)]
    mode: Option<PairMode>,
    /// Fixed two-qubit rate; by default it follows --p.
    #[arg(long)]
    p2q: Option<f64>,
    /// all or split.
    #[arg(long)]
    schedule: Option<Schedule>,
    #[arg(long)]
    shots: Option<usize>,
    /// Rounds per experiment, or `auto` for the distance.
    #[arg(long)]
    rounds: Option<Rounds>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "d")]
    distance: Option<usize>,
    #[arg(long)]
    p1q: Option<f64>,
    /// Two-qubit rates: a list or `lo:hi:logN`.
    #[arg(long)]
    p2q_grid: Option<Grid>,
    /// Schedules to compare (all, split); repeat or separate by commas.
    #[arg(long = "schedule", value_delimiter = ',')]
    schedules: Vec<Schedule>,
    #[arg(long)]
    mode: Option<PairMode>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    rounds: Option<Rounds>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, replacing the config's.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// Figure id (1c, 2a, 2b, 3a, 3b, 4a) or `all`.
    #[arg(long)]
    id: String,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Reduced shot counts for a fast look.
    #[arg(long)]
    quick: bool,
}

fn parse_variant(s: &str) -> Result<ScatterVariant, String> {
    match s.to_ascii_lowercase().as_str() {
        "z" => Ok(ScatterVariant::Z),
        "y" => Ok(ScatterVariant::Y),
        _ => Err(format!("unknown variant {s:?} (z or y)")),
    }
}

fn base_config(path: Option<&Path>, kind: ExperimentKind) -> Result<ExperimentConfig, HarnessError> {
    let cfg = match path {
        Some(p) => ExperimentConfig::load(p, Some(kind))?,
        None => ExperimentConfig::new(kind),
    };
    if cfg.kind != kind {
        return Err(HarnessError::Config(vec![format!("kind: config describes {}, expected {kind}", cfg.kind)]));
    }
    Ok(cfg)
}

/// Splits an output file path into the run directory and artifact name.
fn split_out(out: &Path) -> (PathBuf, String) {
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let name = out.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    (dir, name)
}

fn apply_gate(cfg: &mut ExperimentConfig, g: &GateArgs) {
    if let Some(gate) = &g.gate {
        match gate.as_str() {
            "ms" => cfg.traj.source = TrajSource::Ms,
            "robust" => cfg.traj.source = TrajSource::Robust,
            path => {
                cfg.traj.source = TrajSource::GateFile;
                cfg.traj.gate = Some(PathBuf::from(path));
            }
        }
    }
    if let Some(n) = g.ions {
        cfg.traj.ions = n;
    }
    if let Some(t) = g.tau_us {
        cfg.traj.tau_us = t;
    }
    if let Some(k) = g.grid {
        cfg.traj.grid = k;
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn execute(command: Command, force: bool) -> Result<Vec<RunManifest>, HarnessError> {
    let mut cfg = match command {
        Command::Traj(a) => {
            let mut cfg = base_config(a.config.as_deref(), ExperimentKind::Traj)?;
            apply_gate(&mut cfg, &a.gate);
            if a.max_quadrature_error.is_some() {
                cfg.traj.max_quadrature_error = a.max_quadrature_error;
            }
            set(&mut cfg.output.dir, a.out);
            cfg
        }
        Command::Channel(a) => {
            let mut cfg = base_config(a.config.as_deref(), ExperimentKind::Channel)?;
            apply_gate(&mut cfg, &a.gate);
            if let (Some(t), Some(p)) = (a.traj, a.phi) {
                cfg.traj.source = TrajSource::Csv;
                cfg.traj.traj_csv = Some(t);
                cfg.traj.phi_csv = Some(p);
            }
            if let Some(r) = a.rates {
                cfg.rates = None;
                cfg.rates_file = Some(r);
            }
            set(&mut cfg.channel.kind, a.kind);
            set(&mut cfg.channel.faulty, a.faulty);
            set(&mut cfg.channel.variant, a.variant);
            set(&mut cfg.channel.truncation, a.truncation);
            if let Some(out) = a.out {
                (cfg.output.dir, cfg.channel.out) = split_out(&out);
            }
            cfg
        }
        Command::Oracle(a) => {
            let mut cfg = base_config(a.config.as_deref(), ExperimentKind::Oracle)?;
            set(&mut cfg.seed, a.seed);
            set(&mut cfg.oracle.shots, a.shots);
            if let Some(out) = a.out {
                (cfg.output.dir, cfg.oracle.out) = split_out(&out);
            }
            cfg
        }
        Command::Qec(QecCommand::Sweep(a)) => {
            let mut cfg = base_config(a.config.as_deref(), ExperimentKind::QecSweep)?;
            if !a.distances.is_empty() {
                cfg.qec.distances = a.distances;
            }
            set(&mut cfg.qec.p, a.p);
            set(&mut cfg.qec.mode, a.mode);
            if a.p2q.is_some() {
                cfg.qec.p2q = a.p2q;
            }
            set(&mut cfg.qec.schedule, a.schedule);
            set(&mut cfg.qec.shots, a.shots);
            set(&mut cfg.qec.rounds, a.rounds);
            set(&mut cfg.seed, a.seed);
            if let Some(out) = a.out {
                (cfg.output.dir, cfg.qec.out) = split_out(&out);
            }
            cfg
        }
        Command::Qec(QecCommand::Gain(a)) => {
            let mut cfg = base_config(a.config.as_deref(), ExperimentKind::QecGain)?;
            set(&mut cfg.gain.distance, a.distance);
            set(&mut cfg.gain.p1q, a.p1q);
            set(&mut cfg.gain.p2q_grid, a.p2q_grid);
            if !a.schedules.is_empty() {
                cfg.gain.schedules = a.schedules;
            }
            set(&mut cfg.gain.mode, a.mode);
            set(&mut cfg.gain.shots, a.shots);
            set(&mut cfg.gain.rounds, a.rounds);
            set(&mut cfg.seed, a.seed);
            if let Some(out) = a.out {
                (cfg.output.dir, cfg.gain.out) = split_out(&out);
            }
            cfg
        }
        Command::Run(a) => {
            let mut cfg = ExperimentConfig::load(&a.config, None)?;
            set(&mut cfg.output.dir, a.out);
            cfg
        }
        Command::Figures(a) => {
            let ids = if a.id == "all" { FigureId::ALL.to_vec() } else { vec![a.id.parse()?] };
            let scale = if a.quick { FigureScale::Quick } else { FigureScale::Full };
            return ids.into_iter().map(|id| reproduce_figure(id, &a.out, force, scale)).collect();
        }
    };
    cfg.output.force |= force;
    Ok(vec![run(&cfg)?])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let threads = configure_threads(cli.common.threads);
    log::debug!("using {threads} worker threads");
    match execute(cli.command, cli.common.force) {
        Ok(manifests) => {
            for m in manifests {
                log::info!("wrote {} in {:.1}s", m.artifacts.join(", "), m.wall_clock_s);
                for (k, v) in &m.summary {
                    println!("{k} = {v:.6e}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
