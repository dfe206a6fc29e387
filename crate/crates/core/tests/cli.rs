//! Drives the `replaylab` binary: outputs, exit codes and the seed override.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use replaylab::experiment::{parse_rows, RUNS_HEADER};

fn replaylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replaylab"))
        .args(args)
        .env_remove("REPLAYLAB_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "representation = tabular\nalgorithm = combined\nbuffer_size = 100\nepisodes = 12\nruns = 3\nbase_seed = 5\n";

#[test]
fn oracle_on_open_three_by_three() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(dir.path(), "m.txt", "S..\n...\n..G\n");
    let o = replaylab(&["oracle", "--map", &map]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "optimal_steps=4 optimal_return=-4\n");
}

#[test]
fn oracle_rejects_malformed_and_missing_maps() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(dir.path(), "m.txt", "S.S\n..G\n");
    let o = replaylab(&["oracle", "--map", &map]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("malformed map"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());

    let missing = dir.path().join("nope.txt");
    let o = replaylab(&["oracle", "--map", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn prob_prints_analytic_and_monte_carlo() {
    let o = replaylab(&["prob", "--m", "1", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "analytic=1.0\n");

    let o = replaylab(&["prob", "--m", "10", "--k", "5", "--monte-carlo", "20000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let z: f64 = out.split("z=").nth(1).unwrap().trim().parse().unwrap();
    assert!(z.abs() < 4.0, "{out}");
    assert!(out.contains("trials=20000"));
}

#[test]
fn run_writes_both_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", SMALL);
    let out = dir.path().join("out");
    let o = replaylab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert!(runs.starts_with(RUNS_HEADER));
    let rows = parse_rows(&runs).unwrap();
    assert_eq!(rows.len(), 3 * 12);
    let seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.iter().min(), Some(&5));
    assert_eq!(seeds.iter().max(), Some(&7));

    let aggregate = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(aggregate.lines().count(), 1 + 12);
    assert!(stdout(&o).contains("runs_csv="));
}

#[test]
fn seed_environment_variable_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", SMALL);
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_replaylab"))
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("REPLAYLAB_SEED", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_rows(&fs::read_to_string(out.join("runs.csv")).unwrap()).unwrap();
    assert!(rows.iter().all(|r| (100..103).contains(&r.seed)));

    let o = Command::new(env!("CARGO_BIN_EXE_replaylab"))
        .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("REPLAYLAB_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_concatenates_every_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", SMALL);
    let out = dir.path().join("sweep");
    let o = replaylab(&[
        "sweep",
        "--config",
        &cfg,
        "--buffer-sizes",
        "10,1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = parse_rows(&fs::read_to_string(out.join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * 3 * 12);
    assert_eq!(rows.iter().filter(|r| r.buffer_size == 10).count(), 36);
    assert_eq!(rows.iter().filter(|r| r.buffer_size == 1000).count(), 36);
}

#[test]
fn sweep_needs_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", SMALL);
    let out = dir.path().join("sweep");
    let o = replaylab(&["sweep", "--config", &cfg, "--buffer-sizes", "", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.join("sweep.csv").exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let cfg = write(dir.path(), "bad.cfg", "task = mountain_car\nrepresentation = tabular\n");
    let o = replaylab(&["run", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("only the grid world is compatible with tabular methods"));

    let cfg = write(dir.path(), "syntax.cfg", "episodes = many\n");
    let o = replaylab(&["run", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn io_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.cfg");
    let o = replaylab(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // The output directory cannot be created beneath a regular file.
    let cfg = write(dir.path(), "c.cfg", SMALL);
    let blocker = write(dir.path(), "blocker", "");
    let out = format!("{blocker}/out");
    let o = replaylab(&["run", "--config", &cfg, "--out", &out]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(replaylab(&[]).status.code(), Some(1));
    assert_eq!(replaylab(&["run"]).status.code(), Some(1));
    assert_eq!(replaylab(&["prob", "--m", "x", "--k", "1"]).status.code(), Some(1));
    let help = replaylab(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("sweep") || stderr(&help).contains("sweep"));
}
