//! End-to-end tests of the `randgrid` binary: exit codes, artifacts, and the
//! sweep aggregation.

use std::path::Path;
use std::process::{Command, Output};

fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randgrid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const COUNT_CONFIG: &str = r#"
kind = "count-asymptotics"
seed = 7
n = 10000
paths = 20
mesh_steps = 2048

[model]
preset = "brownian"
dimension = 1

[theta]
strategy = "constant"
value = 2.0

[expect]
count_rel_dev = 0.001
"#;

#[test]
fn count_run_passes_and_emits_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "count.toml", COUNT_CONFIG);
    let out = dir.path().join("out");
    let output = run_bin(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    // mean N/n within 0.1% of 2 for constant theta = 2
    assert!(stdout.contains("mean_count_over_n = 2"), "{stdout}");
    assert!(out.join("report.json").exists());
    assert!(out.join("counts.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert_eq!(report["seed"], 7);
    // manifest carries a content hash per emitted file
    assert_eq!(report["manifest"][0]["file"], "counts.csv");
    assert_eq!(
        report["manifest"][0]["sha256"].as_str().unwrap().len(),
        64
    );
}

#[test]
fn failing_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // N/n = ceil(12345.6)/10000 deviates from ∫θ = 1.23456 by ~3e-5, above
    // the demanded 1e-6
    let text = COUNT_CONFIG
        .replace("count_rel_dev = 0.001", "count_rel_dev = 0.000001")
        .replace("value = 2.0", "value = 1.23456");
    let config = write(dir.path(), "fail.toml", &text);
    let out = dir.path().join("out");
    let output = run_bin(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1), "{output:?}");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // unknown model preset
    let bad = COUNT_CONFIG.replace("preset = \"brownian\"", "preset = \"heston\"");
    let config = write(dir.path(), "bad.toml", &bad);
    let output = run_bin(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    assert!(String::from_utf8_lossy(&output.stderr).contains("heston"));

    // unparseable file with position information
    let config = write(dir.path(), "syntax.toml", "kind = [broken\n");
    let output = run_bin(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));

    // missing file
    let output = run_bin(&["run", "--config", "/nonexistent/zzz.toml"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn seed_override_changes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    // constant θ makes count runs path-independent, so use a convergence run
    // whose terminals depend on the simulated paths
    let config = write(
        dir.path(),
        "conv.toml",
        r#"
kind = "convergence"
seed = 7
n = 32
paths = 50
mesh_factor = 16

[model]
preset = "brownian"
dimension = 1

[integrand]
preset = "identity"

[theta]
strategy = "constant"
value = 1.0
"#,
    );
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    run_bin(&["run", "--config", &config, "--out", out1.to_str().unwrap(), "--seed", "100"]);
    run_bin(&["run", "--config", &config, "--out", out2.to_str().unwrap(), "--seed", "200"]);
    let a = std::fs::read_to_string(out1.join("terminals.csv")).unwrap();
    let b = std::fs::read_to_string(out2.join("terminals.csv")).unwrap();
    assert_ne!(a, b);
}

const PSI_BASE: &str = r#"
kind = "lemma-psi"
seed = 5
n = 128
paths = 400
mesh_factor = 16

[model]
preset = "brownian"
dimension = 1

[theta]
strategy = "constant"
value = 1.0

[psi]
power = 2
"#;

#[test]
fn sweep_aggregates_and_shows_trend() {
    let dir = tempfile::tempdir().unwrap();
    let c1 = write(dir.path(), "n128.toml", PSI_BASE);
    let c2 = write(dir.path(), "n512.toml", &PSI_BASE.replace("n = 128", "n = 512"));
    let out = dir.path().join("sweep");
    let output = run_bin(&[
        "sweep",
        "--axis",
        "n",
        "--config",
        &c1,
        "--config",
        &c2,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("n,"));
    let col = header
        .split(',')
        .position(|c| c == "deviation_p95")
        .unwrap();
    let p95: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    // the sup-deviation percentile shrinks when n quadruples
    assert!(p95[1] < p95[0], "no trend: {p95:?}");
    assert!(out.join("run_00/report.json").exists());
    assert!(out.join("run_01/report.json").exists());
}

#[test]
fn sweep_axis_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let c1 = write(dir.path(), "a.toml", PSI_BASE);
    // differs in seed as well as the declared axis n
    let c2 = write(
        dir.path(),
        "b.toml",
        &PSI_BASE.replace("n = 128", "n = 512").replace("seed = 5", "seed = 6"),
    );
    let out = dir.path().join("sweep");
    let output = run_bin(&[
        "sweep",
        "--axis",
        "n",
        "--config",
        &c1,
        "--config",
        &c2,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    assert!(String::from_utf8_lossy(&output.stderr).contains("axis"));
}

#[test]
fn n_sweep_ks_statistic_trend() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#"
kind = "limit-compare"
seed = 8
n = 64
paths = 6000
mesh_factor = 16

[model]
preset = "gbm"
mu = 0.05
sigma = 0.2
y0 = 1.0

[integrand]
preset = "square"

[theta]
strategy = "constant"
value = 1.0
"#;
    let c1 = write(dir.path(), "n64.toml", base);
    let c2 = write(dir.path(), "n256.toml", &base.replace("n = 64", "n = 256"));
    let out = dir.path().join("sweep");
    let output = run_bin(&[
        "sweep",
        "--axis",
        "n",
        "--config",
        &c1,
        "--config",
        &c2,
        "--out",
        out.to_str().unwrap(),
    ]);
    // individual KS verdicts may fail at coarse n; the trend is the check
    assert!(
        matches!(output.status.code(), Some(0) | Some(1)),
        "{output:?}"
    );
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    let col = header.split(',').position(|c| c == "ks_terminal").unwrap();
    let ks: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    // non-increasing within noise (one KS-statistic standard deviation)
    assert!(ks[1] <= ks[0] + 0.01, "KS trend broken: {ks:?}");
}

#[test]
fn paths_sweep_stderr_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#"
kind = "convergence"
seed = 12
n = 32
paths = 400
mesh_factor = 16

[model]
preset = "brownian"
dimension = 1

[integrand]
preset = "identity"

[theta]
strategy = "constant"
value = 1.0
"#;
    let c1 = write(dir.path(), "p400.toml", base);
    let c2 = write(dir.path(), "p1600.toml", &base.replace("paths = 400", "paths = 1600"));
    let out = dir.path().join("sweep");
    let output = run_bin(&[
        "sweep",
        "--axis",
        "paths",
        "--config",
        &c1,
        "--config",
        &c2,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    let col = header
        .split(',')
        .position(|c| c == "u_terminal_var_stderr")
        .unwrap();
    let stderr: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    // quadrupling paths halves the variance standard error (CLT), up to the
    // variance estimate's own noise
    let ratio = stderr[0] / stderr[1];
    assert!(
        (ratio - 2.0).abs() <= 0.5,
        "stderr scaling off: {stderr:?} ratio {ratio}"
    );
}
