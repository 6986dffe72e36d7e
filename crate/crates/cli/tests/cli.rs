use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ionqec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ionqec"))
        .args(args)
        .current_dir(dir)
        .env_remove("IONQEC_THREADS")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn traj_then_channel_from_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = ionqec(dir.path(), &["traj", "--gate", "ms", "--ions", "3", "--grid", "256", "--out", "t"]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("t/traj.csv").is_file());
    assert!(dir.path().join("t/manifest.json").is_file());

    fs::write(dir.path().join("rates.toml"), "gamma_s_hz = 100.0\n").unwrap();
    let out = ionqec(
        dir.path(),
        &[
            "channel", "--traj", "t/traj.csv", "--phi", "t/phi.csv", "--rates", "rates.toml", "--kind", "scatter",
            "--faulty", "1", "--out", "c/scatter.json",
        ],
    );
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("c/scatter.json")).unwrap()).unwrap();
    assert_eq!(doc["n"], 3);
    let terms = doc["terms"].as_array().unwrap();
    assert!(terms.iter().all(|t| t["pauli"].as_str().unwrap().as_bytes()[1] != b'I'));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sweep.toml"),
        "kind = \"qec-sweep\"\nseed = 3\n[qec]\ndistances = [3, 5]\np = [1e-3]\nshots = 200\nout = \"from_file.csv\"\n",
    )
    .unwrap();
    let out = ionqec(dir.path(), &["qec", "sweep", "--config", "sweep.toml", "--shots", "50", "--d", "3,5", "--out", "s/flags.csv"]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("s/flags.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("50")), "{text}");
    assert!(!dir.path().join("from_file.csv").exists());
}

#[test]
fn gain_subcommand_writes_both_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let out = ionqec(
        dir.path(),
        &["qec", "gain", "--d", "3", "--p1q", "1e-3", "--p2q-grid", "1e-5,1e-4", "--schedule", "split,all", "--shots", "100", "--out", "gain.csv"],
    );
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("gain.csv")).unwrap();
    assert!(text.starts_with("schedule,d,p_ph,p_2q,shots,failures,p_l,ci_lo,ci_hi,gain,config_digest"));
    assert_eq!(text.lines().filter(|l| l.starts_with("split-rows,")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.starts_with("simultaneous,")).count(), 2);
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad = ionqec(dir.path(), &["qec", "sweep", "--d", "4,5", "--out", "x.csv"]);
    assert_eq!(status(&bad), 2);
    assert!(stderr(&bad).contains("qec.distances"));

    let guard = ionqec(dir.path(), &["traj", "--gate", "robust", "--grid", "64", "--max-quadrature-error", "0", "--out", "g"]);
    assert_eq!(status(&guard), 3, "{}", stderr(&guard));

    fs::write(
        dir.path().join("big.toml"),
        "kind = \"oracle\"\n[traj]\nions = 4\ngrid = 64\n[rates]\ngamma_d_hz = [1.0]\nnbar = [0.0]\n[oracle]\ncutoff = 200000\n",
    )
    .unwrap();
    let big = ionqec(dir.path(), &["oracle", "--config", "big.toml", "--out", "h.csv"]);
    assert_eq!(status(&big), 4, "{}", stderr(&big));

    let figure = ionqec(dir.path(), &["figures", "--id", "7q"]);
    assert_eq!(status(&figure), 2);

    let usage = ionqec(dir.path(), &["qec", "sweep", "--shots", "many"]);
    assert_eq!(status(&usage), 2);
}

#[test]
fn overwrite_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let first = ionqec(dir.path(), &["traj", "--grid", "64", "--out", "o"]);
    assert_eq!(status(&first), 0);
    let again = ionqec(dir.path(), &["traj", "--grid", "64", "--out", "o"]);
    assert_eq!(status(&again), 0);
    let changed = ionqec(dir.path(), &["traj", "--grid", "128", "--out", "o"]);
    assert_eq!(status(&changed), 2);
    assert!(stderr(&changed).contains("--force"));
    let forced = ionqec(dir.path(), &["traj", "--grid", "128", "--out", "o", "--force"]);
    assert_eq!(status(&forced), 0);
}

#[test]
fn thread_count_from_environment_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let from_env = Command::new(env!("CARGO_BIN_EXE_ionqec"))
        .args(["-v", "traj", "--grid", "64", "--out", "a"])
        .current_dir(dir.path())
        .env("IONQEC_THREADS", "3")
        .env_remove("RUST_LOG")
        .output()
        .unwrap();
    assert!(stderr(&from_env).contains("using 3 worker threads"), "{}", stderr(&from_env));
    let from_flag = Command::new(env!("CARGO_BIN_EXE_ionqec"))
        .args(["-v", "traj", "--grid", "64", "--out", "b", "--threads", "2"])
        .current_dir(dir.path())
        .env("IONQEC_THREADS", "3")
        .env_remove("RUST_LOG")
        .output()
        .unwrap();
    assert!(stderr(&from_flag).contains("using 2 worker threads"), "{}", stderr(&from_flag));
}

#[test]
fn hook_figure_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = ionqec(dir.path(), &["figures", "--id", "1c", "--out", "figs"]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("figs/fig1c.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 + 6);
    assert!(dir.path().join("figs/fig1c.manifest.json").is_file());
}
