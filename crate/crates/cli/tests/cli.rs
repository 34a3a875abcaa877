use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_obstacle-lab"))
}

fn run_in(dir: &Path, sub: &str, config: &str, out: &str) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    bin()
        .args([sub, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .unwrap()
}

const FORWARD_ZERO: &str = r#"
kind = "forward"
[geometry.obstacle]
mean_radius = 0.3
[coefficients]
b = 1.0
A = 0.5
[data]
[numeric]
h = 0.1
"#;

#[test]
fn forward_with_zero_data_writes_zero_fields() {
    let d = TempDir::new().unwrap();
    let o = run_in(d.path(), "run", FORWARD_ZERO, "out");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.path().join("out/solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("node_id,x,y,value_y,value_z"));
    let mut rows = 0;
    for l in lines {
        let f: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!((f[3], f[4]), (0.0, 0.0));
        rows += 1;
    }
    assert!(rows > 100);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["kind"], "forward");
    assert_eq!(manifest["config"], FORWARD_ZERO);
    assert!(manifest["artifacts"].as_array().unwrap().iter().any(|a| a["name"] == "solution.csv"));
}

#[test]
fn stability_default_grid_gives_nine_rows() {
    let d = TempDir::new().unwrap();
    let cfg = r#"
kind = "stability"
[geometry.obstacle]
mean_radius = 0.3
[coefficients]
[data]
phi = { mean = 1.0 }
[deformation]
kind = "radial"
[numeric]
h = 0.1
"#;
    let o = run_in(d.path(), "run", cfg, "out");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = fs::read_to_string(d.path().join("out/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 10);
    assert!(sweep.starts_with("sigma,distance,valid\n"));
    let fit = fs::read_to_string(d.path().join("out/fit.csv")).unwrap();
    assert!(fit.starts_with("k_raw,k_int,C,residual,floor\n"));
}

#[test]
fn missing_coefficients_exit_two() {
    let d = TempDir::new().unwrap();
    let cfg = "kind = \"forward\"\n[geometry.obstacle]\nmean_radius = 0.3\n[data]\n";
    let o = run_in(d.path(), "run", cfg, "out");
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["path"], "coefficients");
    assert_eq!(err["kind"], "schema");
    let file: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/error.json")).unwrap()).unwrap();
    assert_eq!(file, err);
}

#[test]
fn type_errors_carry_the_key_path() {
    let d = TempDir::new().unwrap();
    let o = run_in(d.path(), "run", "kind = \"forward\"\n[numeric]\nh = \"fine\"\n", "out");
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["path"], "numeric.h");
}

#[test]
fn numerical_failure_exits_three() {
    let d = TempDir::new().unwrap();
    // b = 0 leaves the internal observation blind to the obstacle
    let cfg = r#"
kind = "reconstruct"
[geometry.obstacle]
mean_radius = 0.4
[target]
mean_radius = 0.3
[coefficients]
A = 2.0
[data]
psi = { mean = 1.0 }
[observation]
mode = "internal"
[numeric]
h = 0.1
basis_size = 3
test_count = 6
"#;
    let o = run_in(d.path(), "run", cfg, "out");
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["module"], "reconstruction");
    assert!(d.path().join("out/history.csv").exists());
}

#[test]
fn validate_reports_without_failing() {
    let d = TempDir::new().unwrap();
    let o = run_in(d.path(), "validate", FORWARD_ZERO, "cache");
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("valid: no violations"), "{text}");
    assert!(fs::read_dir(d.path().join("cache")).unwrap().count() == 1);

    let clearance = FORWARD_ZERO.replace("mean_radius = 0.3", "mean_radius = 0.95");
    let o = run_in(d.path(), "validate", &clearance, "cache");
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("violation geometry.obstacle: clearance"), "{text}");
    assert!(text.contains("note mu1 = ") && text.contains("(cached)"), "{text}");

    let inadmissible = FORWARD_ZERO.replace("b = 1.0\nA = 0.5", "a = -10.0\nB = -10.0");
    let o = run_in(d.path(), "validate", &inadmissible, "cache");
    let text = String::from_utf8(o.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("violation coefficients")).expect(&text);
    assert!(line.contains("lambda* = 10.000000") && line.contains("1/mu1 = 5.78"), "{line}");
}

#[test]
fn sigma_beyond_the_lipschitz_bound_is_flagged() {
    let d = TempDir::new().unwrap();
    let cfg = r#"
kind = "pullback-check"
[geometry.obstacle]
mean_radius = 0.3
[coefficients]
[data]
[deformation]
kind = "radial"
amplitude = 5.0
[numeric]
sigma = [0.1, 2.0]
"#;
    let o = run_in(d.path(), "validate", cfg, "cache");
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("violation numeric.sigma[1]"), "{text}");
}

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "txt") && !p.to_string_lossy().contains("mu1-"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical() {
    let configs = [
        "kind = \"carleman\"\nseed = 11\n[carleman]\nsamples = [10, 10]\nfd_points = 20\nh = [0.4, 0.2]\n",
        "kind = \"counterexample-1d\"\n[counterexample]\neta = 1.0\nzeta = 1.0\nb = 0.5\nA = 0.5\nK = 1.0\nL = 0.5\npoints = 501\n",
        r#"
kind = "reconstruct"
seed = 5
[geometry.obstacle]
mean_radius = 0.4
[target]
mean_radius = 0.3
[coefficients]
[data]
phi = { mean = 1.0 }
[numeric]
h = 0.1
noise = 0.01
max_iterations = 3
"#,
    ];
    for cfg in configs {
        let d = TempDir::new().unwrap();
        let a = run_in(d.path(), "run", cfg, "a");
        let b = run_in(d.path(), "run", cfg, "b");
        assert!(a.status.success() && b.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        let (x, y) = (csv_bodies(&d.path().join("a")), csv_bodies(&d.path().join("b")));
        assert!(!x.is_empty());
        assert_eq!(x, y, "{cfg}");
    }
}

#[test]
fn seed_flag_changes_noisy_data() {
    let d = TempDir::new().unwrap();
    let cfg = r#"
kind = "reconstruct"
[geometry.obstacle]
mean_radius = 0.4
[target]
mean_radius = 0.3
[coefficients]
[data]
phi = { mean = 1.0 }
[numeric]
h = 0.1
noise = 0.01
max_iterations = 1
"#;
    let path = d.path().join("c.toml");
    fs::write(&path, cfg).unwrap();
    let go = |seed: &str, out: &str| {
        let o = bin().args(["run", "--jobs", "2", "--seed", seed, "--config"]).arg(&path).arg("--out").arg(d.path().join(out)).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(d.path().join(out).join("target.csv")).unwrap()
    };
    assert_ne!(go("1", "s1"), go("2", "s2"));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("s2/manifest.json")).unwrap()).unwrap();
    assert_eq!((m["seed"].as_u64(), m["jobs"].as_u64()), (Some(2), Some(2)));
}

#[test]
fn plan_expands_the_cartesian_product() {
    let d = TempDir::new().unwrap();
    let cfg = r#"
kind = "discriminate"
[geometry.obstacle]
mean_radius = 0.30
[target]
mean_radius = 0.35
[coefficients]
[data]
[plan]
"target.mean_radius" = [0.31, 0.35, 0.40]
"numeric.h" = [0.1, 0.05]
"#;
    let o = run_in(d.path(), "plan", cfg, "plan");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let index = fs::read_to_string(d.path().join("plan/plan.csv")).unwrap();
    assert_eq!(index.lines().count(), 7);
    assert!(index.starts_with("run,target.mean_radius,numeric.h\nrun-000,0.31,0.1\nrun-001,0.31,0.05\n"));
    let third = fs::read_to_string(d.path().join("plan/run-003.toml")).unwrap();
    assert!(third.contains("mean_radius = 0.35") && third.contains("h = 0.05") && !third.contains("[plan]"));
    assert!(third.contains("output = \"run-003\""));

    let bad = cfg.replace("\"numeric.h\" = [0.1, 0.05]", "\"numeric.h\" = [\"coarse\"]");
    let o = run_in(d.path(), "plan", &bad, "plan2");
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["path"], "run-000: numeric.h");
}
