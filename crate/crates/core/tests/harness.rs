use std::fs;
use std::path::Path;

use ionqec::gatekit::ms_trajectory;
use ionqec::harness::{
    embedded_digest, read_trajectory_csv, run, trajectory_csv, write_artifacts, Artifact, ExperimentConfig,
    ExperimentKind, FigureId, Grid, HarnessError, Rounds, TrajSource,
};
use ionqec::noisechan::RateSet;

fn traj_config(dir: &Path, grid: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Traj);
    cfg.traj.ions = 3;
    cfg.traj.grid = grid;
    cfg.output.dir = dir.to_path_buf();
    cfg
}

fn config_errors(err: HarnessError) -> Vec<String> {
    match err {
        HarnessError::Config(list) => list,
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn grid_strings_parse() {
    let g: Grid = "1e-3:1e-1:log3".parse().unwrap();
    assert_eq!(g.0.len(), 3);
    for (a, b) in g.0.iter().zip([1e-3, 1e-2, 1e-1]) {
        assert!((a / b - 1.0).abs() < 1e-12);
    }
    assert_eq!("0:1:lin5".parse::<Grid>().unwrap().0, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert_eq!("0.1, 0.2".parse::<Grid>().unwrap().0, vec![0.1, 0.2]);
    for bad in ["0:1:log4", "1:0:lin3", "1e-3:1e-2:cube4", "1e-3:1e-2:log1", "a,b"] {
        assert!(bad.parse::<Grid>().is_err(), "{bad} accepted");
    }
    assert_eq!("auto".parse::<Rounds>().unwrap(), Rounds(None));
    assert_eq!("7".parse::<Rounds>().unwrap(), Rounds(Some(7)));
    assert!("seven".parse::<Rounds>().is_err());
}

#[test]
fn config_file_round_trip() {
    let text = r#"
kind = "qec-sweep"
seed = 11
[qec]
distances = [3, 5]
p = "1e-3:1e-2:log4"
mode = "all-pairs"
p2q = 3e-5
rounds = "auto"
schedule = "split"
"#;
    let cfg = ExperimentConfig::parse(text, None).unwrap();
    assert_eq!(cfg.seed, 11);
    assert_eq!(cfg.qec.distances, vec![3, 5]);
    assert_eq!(cfg.qec.p.0.len(), 4);
    assert_eq!(cfg.qec.p2q, Some(3e-5));
    assert_eq!(cfg.qec.rounds, Rounds(None));
    assert!(cfg.validate().is_ok());
    let defaulted = ExperimentConfig::parse("[traj]\nions = 4\n", Some(ExperimentKind::Traj)).unwrap();
    assert_eq!(defaulted.kind, ExperimentKind::Traj);
    assert!(ExperimentConfig::parse("[traj]\nions = 4\n", None).is_err());
}

#[test]
fn unknown_keys_are_all_reported() {
    let text = "kind = \"traj\"\ncolour = 1\n[traj]\nions = 3\nspeed = 2\n[qec]\nshotz = 5\n";
    let errs = config_errors(ExperimentConfig::parse(text, None).unwrap_err());
    assert_eq!(errs.len(), 3, "{errs:?}");
    for key in ["colour", "traj.speed", "qec.shotz"] {
        assert!(errs.iter().any(|e| e.starts_with(key)), "{key} missing from {errs:?}");
    }
}

#[test]
fn validation_lists_every_problem() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::QecSweep);
    cfg.qec.distances = vec![4];
    cfg.qec.p = Grid(vec![1.5]);
    cfg.qec.shots = 0;
    cfg.qec.rounds = Rounds(Some(0));
    let errs = config_errors(cfg.validate().unwrap_err());
    for key in ["qec.distances: 4", "qec.distances: a sweep", "qec.p:", "qec.shots", "qec.rounds"] {
        assert!(errs.iter().any(|e| e.starts_with(key)), "{key} missing from {errs:?}");
    }

    let mut oracle = ExperimentConfig::new(ExperimentKind::Oracle);
    oracle.traj.ions = 6;
    oracle.oracle.cutoff = 2;
    let errs = config_errors(oracle.validate().unwrap_err());
    for key in ["traj.ions", "oracle.cutoff", "rates"] {
        assert!(errs.iter().any(|e| e.starts_with(key)), "{key} missing from {errs:?}");
    }
}

#[test]
fn missing_input_file_is_a_config_error() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Channel);
    cfg.traj.source = TrajSource::Csv;
    cfg.traj.traj_csv = Some("does/not/exist.csv".into());
    cfg.traj.phi_csv = Some("does/not/exist_phi.csv".into());
    cfg.rates = Some(RateSet::uniform(1, 10.0, 0.0, 0.0, 0.0, 0.0));
    let err = cfg.validate().unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert_eq!(config_errors(err).len(), 2);
}

#[test]
fn trajectory_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let traj = ms_trajectory(3, 2e-4, 64).unwrap();
    let [a, p] = trajectory_csv(&traj, "abc", "traj.csv", "phi.csv");
    write_artifacts(dir.path(), "abc", false, &[a, p]).unwrap();
    let back = read_trajectory_csv(&dir.path().join("traj.csv"), &dir.path().join("phi.csv")).unwrap();
    assert_eq!(back.times(), traj.times());
    assert_eq!(back.alpha(), traj.alpha());
    assert_eq!(back.phi(), traj.phi());
    assert_eq!(embedded_digest(&dir.path().join("phi.csv")).as_deref(), Some("abc"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = traj_config(dir.path(), 128);
    let first = run(&cfg).unwrap();
    let traj = fs::read(dir.path().join("traj.csv")).unwrap();
    let phi = fs::read(dir.path().join("phi.csv")).unwrap();
    let second = run(&cfg).unwrap();
    assert_eq!(first.config_digest, second.config_digest);
    assert_eq!(fs::read(dir.path().join("traj.csv")).unwrap(), traj);
    assert_eq!(fs::read(dir.path().join("phi.csv")).unwrap(), phi);
    assert_eq!(first.artifacts, vec!["traj.csv", "phi.csv", "manifest.json"]);
}

#[test]
fn changed_config_does_not_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    run(&traj_config(dir.path(), 128)).unwrap();
    let before = fs::read(dir.path().join("traj.csv")).unwrap();
    let mut changed = traj_config(dir.path(), 256);
    let err = run(&changed).unwrap_err();
    assert!(matches!(err, HarnessError::WouldOverwrite(_)), "{err}");
    assert_eq!(err.exit_code(), 2);
    assert_eq!(fs::read(dir.path().join("traj.csv")).unwrap(), before);
    changed.output.force = true;
    let m = run(&changed).unwrap();
    assert_eq!(embedded_digest(&dir.path().join("traj.csv")), Some(m.config_digest));
}

#[test]
fn failed_write_leaves_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("b.json"), "{\"config_digest\": \"other\"}\n").unwrap();
    let artifacts = [
        Artifact { name: "a.csv".into(), bytes: b"x,config_digest\n1,new\n".to_vec() },
        Artifact { name: "b.json".into(), bytes: b"{\"config_digest\": \"new\"}\n".to_vec() },
    ];
    assert!(write_artifacts(dir.path(), "new", false, &artifacts).is_err());
    assert!(!dir.path().join("a.csv").exists());
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1, "stray files: {names:?}");
}

#[test]
fn digest_tracks_input_file_contents() {
    let dir = tempfile::tempdir().unwrap();
    let rates = dir.path().join("rates.toml");
    fs::write(&rates, "gamma_s_hz = 100.0\n").unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Channel);
    cfg.rates_file = Some(rates.clone());
    let d1 = cfg.digest().unwrap();
    assert_eq!(cfg.digest().unwrap(), d1);
    let mut moved = cfg.clone();
    moved.output.dir = "elsewhere".into();
    assert_eq!(moved.digest().unwrap(), d1);
    fs::write(&rates, "gamma_s_hz = 200.0\n").unwrap();
    assert_ne!(cfg.digest().unwrap(), d1);
}

#[test]
fn channel_run_reads_rates_file() {
    let dir = tempfile::tempdir().unwrap();
    let rates = dir.path().join("rates.toml");
    fs::write(&rates, "gamma_s_hz = 500.0\nnbar = [0.0]\n").unwrap();
    let cfg_path = dir.path().join("channel.toml");
    fs::write(
        &cfg_path,
        "kind = \"channel\"\nrates_file = \"rates.toml\"\n[traj]\nions = 3\ntau_us = 200.0\ngrid = 512\n[output]\ndir = \"out\"\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&cfg_path, None).unwrap();
    let m = run(&cfg).unwrap();
    let mass = m.summary["error_mass"];
    assert!((mass - 500.0 * 200e-6).abs() < 1e-9, "{mass}");
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/channel.json")).unwrap()).unwrap();
    assert_eq!(doc["n"], 3);
    assert_eq!(doc["config_digest"], m.config_digest.as_str());
}

#[test]
fn quadrature_guard_trips_with_status_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = traj_config(dir.path(), 64);
    cfg.traj.source = TrajSource::Robust;
    cfg.traj.max_quadrature_error = Some(0.0);
    let err = run(&cfg).unwrap_err();
    assert!(matches!(err, HarnessError::Numerical(_)), "{err}");
    assert_eq!(err.exit_code(), 3);
    assert!(!dir.path().join("traj.csv").exists());
}

#[test]
fn strict_leakage_trips_with_status_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Oracle);
    cfg.traj.grid = 64;
    cfg.rates = Some(RateSet::uniform(1, 0.0, 0.0, 0.0, 10.0, 3.0));
    cfg.oracle.cutoff = 8;
    cfg.oracle.shots = 20;
    cfg.output.dir = dir.path().to_path_buf();
    let relaxed = run(&cfg).unwrap();
    assert_eq!(relaxed.warnings.len(), 1, "{:?}", relaxed.warnings);
    let hist = fs::read_to_string(dir.path().join("hist.csv")).unwrap();
    assert!(hist.lines().last().unwrap().starts_with("leakage="), "{hist}");
    cfg.oracle.strict_leakage = true;
    let err = run(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn oversized_oracle_is_a_resource_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Oracle);
    cfg.traj.grid = 64;
    cfg.traj.ions = 4;
    cfg.rates = Some(RateSet::uniform(1, 0.0, 0.0, 0.0, 10.0, 0.0));
    cfg.oracle.cutoff = 200_000;
    cfg.output.dir = dir.path().to_path_buf();
    assert_eq!(run(&cfg).unwrap_err().exit_code(), 4);
}

#[test]
fn figure_ids_parse() {
    for id in FigureId::ALL {
        assert_eq!(id.label().parse::<FigureId>().unwrap(), id);
    }
    assert_eq!("fig3b".parse::<FigureId>().unwrap(), FigureId::CoupledThreshold);
    assert!(matches!("5x".parse::<FigureId>(), Err(HarnessError::UnknownFigure(_))));
}
