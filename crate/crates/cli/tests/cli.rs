use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn maslov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maslov")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct Case {
    dir: TempDir,
    config: PathBuf,
}

impl Case {
    fn new(mut config: Value) -> Self {
        let dir = tempfile::tempdir().unwrap();
        config["outputs"] = json!({
            "report": dir.path().join("report.json"),
            "trajectories": dir.path().join("traj.csv"),
        });
        let path = dir.path().join("config.json");
        std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
        Self { dir, config: path }
    }

    fn path(&self) -> &str {
        self.config.to_str().unwrap()
    }

    fn report(&self) -> Value {
        read_json(&self.dir.path().join("report.json"))
    }

    fn trajectories(&self) -> String {
        std::fs::read_to_string(self.dir.path().join("traj.csv")).unwrap()
    }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn interval(bc: &str, n: usize) -> Value {
    json!({
        "domain": { "kind": "interval" },
        "family": { "kind": "star", "t_range": [0.1, 1.0], "t_samples": 64 },
        "potential": "-1 * (3.5*pi)^2",
        "bc": { "kind": bc },
        "mesh": { "n": n }
    })
}

fn disk(bc: &str, lambda: f64, h: f64) -> Value {
    json!({
        "domain": { "kind": "disk", "radius": 1.0 },
        "family": { "kind": "star", "t_range": [0.5, 1.0], "t_samples": 16 },
        "potential": "0",
        "bc": { "kind": bc },
        "lambda_shift": lambda,
        "mesh": { "h": h }
    })
}

#[test]
fn dirichlet_interval_flow() {
    let case = Case::new(interval("dirichlet", 400));
    let out = maslov(&["flow", case.path()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = case.report();
    assert_eq!(r["maslov"], -3);
    assert_eq!(r["morse_a"], 0);
    assert_eq!(r["morse_b"], 3);
    assert_eq!(r["residual"], 0);
    let crossings = r["crossings"].as_array().unwrap();
    assert_eq!(crossings.len(), 3);
    for (c, k) in crossings.iter().zip(1..) {
        assert!((c["t_star"].as_f64().unwrap() - 2.0 * k as f64 / 7.0).abs() < 1e-3);
        assert_eq!(c["signature"], json!({ "p": 0, "q": 1, "z": 0 }));
        assert_eq!(c["position"], "interior");
    }
    let csv = case.trajectories();
    assert!(csv.starts_with("t,lambda_1,"));
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn report_round_trips_and_recomputes() {
    let case = Case::new(interval("neumann", 200));
    let out = maslov(&["verify", case.path()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = case.report();
    let field = |k: &str| r[k].as_i64().unwrap();
    assert_eq!(field("residual"), field("maslov") - (field("morse_a") - field("morse_b")));
    let total: i64 = r["crossings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            let p = c["signature"]["p"].as_i64().unwrap();
            let q = c["signature"]["q"].as_i64().unwrap();
            match c["position"].as_str().unwrap() {
                "initial" => -q,
                "terminal" => p,
                _ => p - q,
            }
        })
        .sum();
    assert_eq!(total, field("maslov"));
    assert_eq!(r["audit"]["neumann_plus_one"], true);
    assert_eq!(r["audit"]["passed"], true);

    // The echoed config is itself a valid config.
    let echo = Case::new(r["provenance"]["config"].clone());
    let again = maslov(&["flow", echo.path()]);
    assert_eq!(code(&again), 0);
    assert_eq!(echo.report()["crossings"], r["crossings"]);
}

#[test]
fn reports_are_deterministic_up_to_timestamp() {
    let case = Case::new(interval("dirichlet", 100));
    assert_eq!(code(&maslov(&["flow", case.path()])), 0);
    let mut first = case.report();
    assert_eq!(code(&maslov(&["flow", case.path()])), 0);
    let mut second = case.report();
    first["timestamp"] = Value::Null;
    second["timestamp"] = Value::Null;
    assert_eq!(first, second);
}

#[test]
fn too_few_samples_is_a_config_error() {
    let mut config = interval("dirichlet", 100);
    config["family"]["t_samples"] = json!(4);
    let case = Case::new(config);
    let out = maslov(&["flow", case.path()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("family.t_samples"), "{}", stderr(&out));
    assert!(!case.dir.path().join("report.json").exists());
}

#[test]
fn malformed_configs_exit_two() {
    let mut config = interval("dirichlet", 100);
    config["family"]["t_range"] = json!([1.0, 0.5]);
    assert_eq!(code(&maslov(&["flow", Case::new(config).path()])), 2);

    let mut config = interval("dirichlet", 100);
    config["bogus"] = json!(1);
    assert_eq!(code(&maslov(&["flow", Case::new(config).path()])), 2);

    let mut config = interval("dirichlet", 100);
    config["potential"] = json!("x +* 2");
    let out = maslov(&["flow", Case::new(config).path()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("potential"));

    assert_eq!(code(&maslov(&["flow", "/nonexistent/config.json"])), 2);
}

#[test]
fn degenerate_neumann_crossing_exits_one() {
    // The constant mode sits at zero for every t, so both endpoints carry a crossing
    // with a vanishing crossing form.
    let case = Case::new(disk("neumann", 0.0, 0.2));
    let out = maslov(&["flow", case.path()]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let r = case.report();
    let degenerate = r["degenerate"].as_array().unwrap();
    assert!(!degenerate.is_empty());
    let warnings: Vec<&str> = r["warnings"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect();
    let t = degenerate[0]["t_star"].as_f64().unwrap();
    assert!(warnings.iter().any(|w| w.contains("degenerate") && w.contains(&format!("{t:.9}"))), "{warnings:?}");
    assert_eq!(r["verified"], false);

    let mut config = disk("neumann", 0.0, 0.2);
    config["allow_degenerate"] = json!(true);
    let case = Case::new(config);
    assert_eq!(code(&maslov(&["flow", case.path()])), 0);
    assert_eq!(case.report()["residual"], 0);
}

#[test]
fn morse_command() {
    let case = Case::new(interval("neumann", 200));
    let out = maslov(&["morse", case.path(), "--t", "1"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["morse_index"], 4);

    let case = Case::new(interval("dirichlet", 200));
    let out = maslov(&["morse", case.path(), "--t", "0.5", "--lambda", "-1000"]);
    let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["morse_index"], 0);
    assert_eq!(code(&maslov(&["morse", case.path(), "--t", "2"])), 2);
}

#[test]
fn crossings_command_prints_table() {
    let case = Case::new(interval("dirichlet", 200));
    let out = maslov(&["crossings", case.path()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().contains("interior"));
}

#[test]
fn oracle_comparisons() {
    let case = Case::new(interval("dirichlet", 400));
    let out = maslov(&["oracle", case.path()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let table = stdout(&out);
    assert!(table.lines().filter(|l| l.starts_with("t_star")).count() == 3);
    assert!(table.lines().skip(1).all(|l| l.ends_with("yes")));

    let case = Case::new(disk("dirichlet", 30.0, 0.05));
    let out = maslov(&["oracle", case.path()]);
    let table = stdout(&out);
    let morse_b = table.lines().find(|l| l.starts_with("morse_b")).unwrap();
    assert!(morse_b.contains("5.00000000     5.00000000") && morse_b.ends_with("yes"), "{table}");

    let mut config = interval("locally_constant", 100);
    config["domain"] = json!({ "kind": "annulus", "inner": 0.5, "outer": 1.0 });
    config["mesh"] = json!({ "h": 0.2 });
    let out = maslov(&["oracle", Case::new(config).path()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no oracle registered"));
}
