use dplab::harness::artifact::{read_snapshot, snapshot_files, CsvTable};
use dplab::harness::{run_scenario, Mode, RunArtifact, RunStatus, ScenarioConfig};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const STABILITY: &str = r#"
kind = "stability_run"
seed = 3

[grid]
n = 2048
l = 40.0

[solver]
t_end = 2.0
record_every = 50
"#;

fn dplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dplab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_lib(text: &str, out: &Path, mode: Mode) -> RunArtifact {
    let mut loaded = ScenarioConfig::parse(text, true).unwrap();
    loaded.config.output = out.to_path_buf();
    run_scenario(&loaded, mode).unwrap()
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn rerun_gives_identical_csv_and_snapshots() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_lib(STABILITY, &a, Mode::Simulate);
    run_lib(STABILITY, &b, Mode::Simulate);
    let files = csv_files(&a);
    assert!(files.len() >= 3, "{files:?}");
    for f in files {
        let name = f.file_name().unwrap();
        assert_eq!(fs::read(&f).unwrap(), fs::read(b.join(name)).unwrap(), "{name:?} differs");
    }
    let sa = snapshot_files(&a).unwrap();
    let sb = snapshot_files(&b).unwrap();
    assert_eq!(sa.len(), sb.len());
    for (x, y) in sa.iter().zip(&sb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn snapshots_round_trip_the_grid() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    run_lib(STABILITY, &out, Mode::Simulate);
    let snaps = snapshot_files(&out).unwrap();
    let (t0, u0) = read_snapshot(&snaps[0]).unwrap();
    let (t1, _) = read_snapshot(snaps.last().unwrap()).unwrap();
    assert_eq!(t0, 0.0);
    assert!((t1 - 2.0).abs() < 1e-12);
    assert_eq!(u0.len(), 2048);
    assert_eq!(u0.grid().half_length(), 40.0);
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "kind = \"stability_run\"\n[profile]\nepz = 0.1\n");
    let out = dplab(&["verify", cfg.to_str().unwrap(), "--out", tmp.path().join("run").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("profile.epz"));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn loose_parsing_warns_and_runs() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{STABILITY}\n[profile]\nepz = 0.1\n");
    let cfg = write_config(tmp.path(), "loose.toml", &text);
    let run = tmp.path().join("run");
    let out = dplab(&["verify", "--no-strict", cfg.to_str().unwrap(), "--out", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: ignoring unknown config key `profile.epz`"));
    let art = RunArtifact::read(&run).unwrap();
    assert_eq!(art.status, RunStatus::Pass);
    assert!(art.snapshots.is_none());
}

#[test]
fn flags_override_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", STABILITY);
    let run = tmp.path().join("run");
    let out = dplab(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--grid-n",
        "1024",
        "--grid-l",
        "30",
        "--seed",
        "5",
        "--t-end",
        "0.5",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let echo = fs::read_to_string(run.join("config.toml")).unwrap();
    assert!(echo.starts_with(STABILITY));
    let resolved = echo.split("# resolved\n").nth(1).unwrap();
    for needle in ["# seed = 5", "# n = 1024", "# l = 30.0", "# t_end = 0.5"] {
        assert!(resolved.contains(needle), "{needle} missing from\n{resolved}");
    }
    let (t, u) = read_snapshot(snapshot_files(&run).unwrap().last().unwrap()).unwrap();
    assert_eq!(u.len(), 1024);
    assert!((t - 0.5).abs() < 1e-12);
}

#[test]
fn subcommand_requires_matching_kind() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", STABILITY);
    assert_eq!(dplab(&["collide", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dplab(&["blowup", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dplab(&["simulate", "missing.toml"]).status.code(), Some(2));
    assert_eq!(dplab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn report_rebuilds_plots_and_summary() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("run");
    run_lib(STABILITY, &run, Mode::Simulate);
    for name in ["invariants.svg", "distance.svg", "extrema.svg", "waterfall.svg", "summary.txt"] {
        fs::remove_file(run.join(name)).unwrap();
    }
    let out = dplab(&["report", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["invariants.svg", "distance.svg", "extrema.svg", "waterfall.svg"] {
        let svg = fs::read_to_string(run.join(name)).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"), "{name}");
    }
    let summary = fs::read_to_string(run.join("summary.txt")).unwrap();
    for key in ["sup_distance", "distance_bound", "max_m1_deviation", "max_sum_sq", "max_drift_e2"] {
        assert!(summary.contains(key), "{key} missing");
    }
    let art = RunArtifact::read(&run).unwrap();
    assert_eq!(art.plots.len(), 4);
    assert!(art.missing(&run).is_empty());
}

#[test]
fn report_without_snapshots_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("sweep");
    run_lib("kind = \"certificate_sweep\"\n[grid]\nn = 2048\n[sweep]\ncount = 4\n", &run, Mode::Simulate);
    let out = dplab(&["report", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no snapshots"));
    assert_eq!(dplab(&["report", tmp.path().join("absent").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn rerun_replaces_the_output_directory() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("run");
    run_lib(STABILITY, &run, Mode::Simulate);
    fs::write(run.join("stale.txt"), "x").unwrap();
    run_lib(STABILITY, &run, Mode::Verify);
    assert!(!run.join("stale.txt").exists());
    let leftovers: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn verify_does_not_evolve() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("run");
    let art = run_lib(STABILITY, &run, Mode::Verify);
    assert_eq!(art.status, RunStatus::Pass);
    assert!(snapshot_files(&run).unwrap().is_empty());
    let verdict = fs::read_to_string(run.join("verdict.txt")).unwrap();
    assert!(verdict.starts_with("verdict = pass") && verdict.contains("positivity = true"));
}

#[test]
fn seed_sweep_writes_one_directory_per_seed() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("run");
    let text = format!("{STABILITY}\n[sweep]\nseeds = [1, 2]\n");
    let art = run_lib(&text, &run, Mode::Verify);
    assert_eq!(art.children, vec![PathBuf::from("seed_1"), PathBuf::from("seed_2")]);
    for s in ["seed_1", "seed_2"] {
        assert_eq!(RunArtifact::read(&run.join(s)).unwrap().status, RunStatus::Pass);
    }
    let one = CsvTable::read(&run.join("seed_1/certificates.csv")).unwrap().column("distance").unwrap();
    let two = CsvTable::read(&run.join("seed_2/certificates.csv")).unwrap().column("distance").unwrap();
    assert_ne!(one, two);
}

#[test]
fn certificate_sweep_and_shock_residual_pass() {
    let tmp = TempDir::new().unwrap();
    let sweep = run_lib("kind = \"certificate_sweep\"\n[grid]\nn = 4096\n[sweep]\ncount = 20\n", &tmp.path().join("sw"), Mode::Simulate);
    assert_eq!(sweep.status, RunStatus::Pass);
    assert_eq!(CsvTable::read(&tmp.path().join("sw/certificates.csv")).unwrap().column("seed").unwrap().len(), 20);
    let shock = run_lib("kind = \"shock_residual\"\n", &tmp.path().join("sh"), Mode::Simulate);
    assert_eq!(shock.status, RunStatus::Pass);
    assert!(tmp.path().join("sh/refinement.csv").exists());
}

#[test]
fn collision_and_blowup_runs_pass() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = TempDir::new().unwrap();
    for (sub, file) in [("collide", "collision.toml"), ("blowup", "blowup.toml")] {
        let run = tmp.path().join(sub);
        let out = dplab(&[sub, root.join(file).to_str().unwrap(), "--out", run.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&out.stdout));
        assert!(RunArtifact::read(&run).unwrap().plots.len() >= 3);
    }
    let verdict = fs::read_to_string(tmp.path().join("collide/verdict.txt")).unwrap();
    assert!(verdict.contains("collision = true"));
}
