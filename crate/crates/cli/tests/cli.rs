//! End-to-end tests of the binary: exit codes, artifact layout, and
//! byte-level determinism of the diagnostics CSV.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

static COUNTER: AtomicUsize = AtomicUsize::new(0);

fn scratch(label: &str) -> PathBuf {
    let id = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!(
        "qhdlab-cli-test-{}-{label}-{id}",
        std::process::id()
    ));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write config");
    path
}

fn qhdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhdlab"))
        .args(args)
        .env_remove("QHDLAB_OUT")
        .output()
        .expect("run qhdlab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const CONSTANT_GP: &str = r#"
[experiment]
kind = "nls"
seed = 7

[grid]
dim = 1
n = 64
length = 10.0

[model]
eps = 0.5
law = "gp"

[data]
family = "constant"
amplitude = 1.0

[time]
t_end = 0.1
dt = 1e-3
observe_every = 10
"#;

#[test]
fn constant_background_run_succeeds_with_constant_diagnostics() {
    let dir = scratch("constant");
    let cfg = write_config(&dir, "constant.toml", CONSTANT_GP);
    let out_dir = dir.join("out");
    let out = qhdlab(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let csv = std::fs::read_to_string(out_dir.join("diagnostics.csv")).expect("diagnostics");
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines.len() >= 3, "expected several records, got {}", lines.len());
    assert!(lines[0].starts_with("t,M,H,"));

    // the uniform state is an equilibrium: mass and energy columns constant
    let column = |line: &str, idx: usize| -> f64 { line.split(',').nth(idx).unwrap().parse().unwrap() };
    let first = lines[1];
    let last = lines[lines.len() - 1];
    assert!((column(first, 1) - column(last, 1)).abs() < 1e-12, "mass drifted");
    assert!((column(first, 2) - column(last, 2)).abs() < 1e-12, "energy drifted");

    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("snapshots").join("snap_000000.json").exists());
    assert!(out_dir.join("snapshots").join("snap_000000_psi.bin").exists());
}

#[test]
fn identical_config_and_seed_reproduce_identical_csv() {
    let dir = scratch("determinism");
    let cfg = write_config(
        &dir,
        "random.toml",
        r#"
[experiment]
kind = "nls"
seed = 42

[grid]
dim = 1
n = 64
length = 20.0

[model]
eps = 1.0
law = "gp"

[data]
family = "random"
background = 1.0
amplitude = 0.05
max_mode = 3

[time]
t_end = 0.05
dt = 1e-3
observe_every = 5
"#,
    );
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = qhdlab(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let a = std::fs::read(out_a.join("diagnostics.csv")).unwrap();
    let b = std::fs::read(out_b.join("diagnostics.csv")).unwrap();
    assert_eq!(a, b, "diagnostics CSV must be byte-identical for equal config and seed");
}

#[test]
fn embedding_violation_is_a_validation_error() {
    let dir = scratch("embedding");
    let cfg = write_config(
        &dir,
        "power.toml",
        r#"
[experiment]
kind = "nls"

[grid]
dim = 1
n = 64
length = 10.0

[model]
eps = 0.5
law = "power"
sigma = 3

[data]
family = "packet"
amplitude = 0.5
width = 1.0

[time]
t_end = 0.1
dt = 1e-3
"#,
    );
    let out = qhdlab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("embedding"),
        "error must name the violated hypothesis, got: {}",
        stderr(&out)
    );
}

#[test]
fn compact_bump_euler_run_reports_breakdown() {
    let dir = scratch("breakdown");
    let cfg = write_config(
        &dir,
        "blowup.toml",
        r#"
[experiment]
kind = "euler"

[grid]
dim = 1
n = 256
length = 30.0

[model]
law = "cubic"

[data]
family = "compact_bump"
amplitude = 1.0
radius = 4.0

[time]
t_end = 3.0
dt = 0.0117187500
observe_every = 16

[breakdown]
max_gradient = 4.0
min_density = -1.0
"#,
    );
    let out_dir = dir.join("out");
    let out = qhdlab(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));

    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("error.json")).unwrap()).unwrap();
    assert_eq!(record["kind"], "breakdown");
    assert_eq!(record["breakdown"]["cause"], "gradient_blowup");
    // partial diagnostics are still written
    assert!(out_dir.join("diagnostics.csv").exists());
}

#[test]
fn cfl_gate_rejects_oversized_step_unless_overridden() {
    let dir = scratch("cfl");
    let cfg = write_config(
        &dir,
        "fast.toml",
        r#"
[experiment]
kind = "nls"

[grid]
dim = 1
n = 256
length = 10.0

[model]
eps = 0.5

[data]
family = "packet"
amplitude = 0.5

[time]
t_end = 0.5
dt = 0.05
"#,
    );
    let refused = qhdlab(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.join("a").to_str().unwrap()]);
    assert_eq!(code(&refused), 2, "stderr: {}", stderr(&refused));
    assert!(stderr(&refused).contains("--override-cfl"));

    let forced = qhdlab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("b").to_str().unwrap(),
        "--override-cfl",
    ]);
    assert_eq!(code(&forced), 0, "stderr: {}", stderr(&forced));
}

#[test]
fn sweep_continues_past_failing_cells_and_reports_them() {
    let dir = scratch("sweep");
    let cfg = write_config(
        &dir,
        "sweep.toml",
        r#"
[experiment]
kind = "nls"
seed = 3

[grid]
dim = 1
n = 64
length = 10.0

[model]
eps = [0.5, 1.0]
law = "gp"

[data]
family = "constant"
amplitude = 1.0

[time]
t_end = 0.1
dt = [1e-3, 0.5]
observe_every = 10
"#,
    );
    let out_dir = dir.join("out");
    let out = qhdlab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--jobs", "2"]);
    // dt = 0.5 does not divide t_end = 0.1: those cells fail validation
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(report["ok"], 2);
    assert_eq!(report["failed"], 2);
    assert!(out_dir.join("cells.csv").exists());
    // good cells still produced full runs
    assert!(out_dir.join("cell_000").join("diagnostics.csv").exists());
    assert!(out_dir.join("cell_001").join("error.json").exists());
}

#[test]
fn sweep_without_lists_is_rejected() {
    let dir = scratch("sweep-scalar");
    let cfg = write_config(&dir, "scalar.toml", CONSTANT_GP);
    let out = qhdlab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("list"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = scratch("suite");
    let out = qhdlab(&["verify", "nonsense", "--out", dir.join("v").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown suite"));
}

#[test]
fn verify_dispersion_passes_and_writes_report() {
    let dir = scratch("verify");
    let out_dir = dir.join("v");
    let out = qhdlab(&["verify", "dispersion", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("verify_dispersion.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["suite"], "dispersion");
    assert_eq!(report["passed"], true);
}

#[test]
fn list_experiments_names_the_surface() {
    let out = qhdlab(&["list-experiments"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    for needle in ["nls", "harness:transonic", "vortex_lattice", "weakqhd"] {
        assert!(text.contains(needle), "missing {needle} in listing");
    }
}

#[test]
fn euler_limit_harness_emits_points_and_fit() {
    let dir = scratch("harness");
    let cfg = write_config(
        &dir,
        "limit.toml",
        r#"
[experiment]
kind = "harness:euler_limit"

[grid]
dim = 1
n = 256
length = 30.0

[model]
eps = [0.4, 0.2, 0.1]
law = "cubic"

[data]
family = "gaussian"
background = 1.0
amplitude = 0.2
width = 1.0

[time]
t_end = 0.1
dt = 1e-3
"#,
    );
    let out_dir = dir.join("out");
    let out = qhdlab(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(out_dir.join("points.csv").exists());
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("fit.json")).unwrap()).unwrap();
    assert!(fit["total_order"]["slope"].as_f64().unwrap() > 0.5);
}
