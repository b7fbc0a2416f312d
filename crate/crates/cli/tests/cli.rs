use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn plan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plan"))
        .args(args)
        .output()
        .unwrap()
}

fn error_code(out: &Output) -> String {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line on stderr");
    let v: serde_json::Value =
        serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {line}"));
    v["error"]["code"].as_str().unwrap().to_string()
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn gain_writes_the_requested_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sub/gain.csv");
    let o = plan(&[
        "gain",
        "--grid",
        "f=0:1:0.1;agents=2,3,5;disp=0.7;p=0.7;d=2;mu=1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = csv::Reader::from_path(&out)
        .unwrap()
        .headers()
        .unwrap()
        .clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        [
            "f",
            "agents",
            "disp_bar",
            "p_bar",
            "n_joint",
            "n_fact",
            "gain_exact",
            "gain_asymptotic"
        ]
    );
    let rows = rows(&out);
    assert_eq!(rows.len(), 33);
    for r in rows.iter().filter(|r| &r[0] == "0") {
        assert_eq!(&r[6], "0");
        assert_eq!(r[4], r[5]);
    }
}

#[test]
fn gain_rejects_a_bad_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = plan(&[
        "gain",
        "--grid",
        "f=zero",
        "--out",
        dir.path().join("g.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_code(&o), "usage");
    let o = plan(&[
        "gain",
        "--grid",
        "p=1",
        "--out",
        dir.path().join("g.csv").to_str().unwrap(),
    ]);
    assert_eq!(error_code(&o), "domain");
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let o = plan(&[
        "run",
        "--scenario",
        "builtin:cross4",
        "--agents",
        "2",
        "--algo",
        "rrg,factrrg,prmstar",
        "--trials",
        "2",
        "--seed",
        "5",
        "--max-iters",
        "200",
        "--samples",
        "100",
        "--jobs",
        "2",
        "--dump-graph",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = rows(&out.join("summary.csv"));
    assert_eq!(
        summary.iter().map(|r| r[0].to_string()).collect::<Vec<_>>(),
        ["rrg", "factrrg", "prmstar"]
    );
    let trace = rows(&out.join("trace.csv"));
    assert!(trace.iter().all(|r| &r[2] == "5" || &r[2] == "6"));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["params"]["max_iterations"], 200);
    assert_eq!(meta["scenario"]["starts"].as_array().unwrap().len(), 2);
    for id in ["rrg-0", "factrrg-1", "prmstar-0"] {
        assert!(out.join("graphs").join(format!("{id}.txt")).exists());
    }
}

#[test]
fn heuristic_override_lands_in_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = plan(&[
        "run",
        "--scenario",
        "builtin:two_lanes",
        "--algo",
        "factrrg",
        "--trials",
        "1",
        "--heuristic",
        "never",
        "--stop-nodes",
        "0",
        "--max-iters",
        "100",
        "--radius-mode",
        "largest",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["scenario"]["heuristic"]["kind"], "never");
    assert_eq!(
        meta["config"]["params"]["stop_nodes"],
        serde_json::Value::Null
    );
    assert_eq!(meta["config"]["params"]["radius_mode"], "largest");
}

#[test]
fn scenario_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let o = plan(&[
        "run",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_code(&o), "parse");

    let blocked = serde_json::json!({
        "name": "blocked",
        "bounds": {"min": [0.0, 0.0], "max": [1.0, 1.0]},
        "agent_radius": 0.05,
        "obstacles": [{"min": [0.0, 0.0], "max": [0.3, 0.3]}],
        "agents": [{"start": [0.1, 0.1], "goal": {"min": [0.8, 0.8], "max": [0.9, 0.9]}}]
    });
    fs::write(&bad, blocked.to_string()).unwrap();
    let o = plan(&[
        "run",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(error_code(&o), "validation");

    let o = plan(&[
        "run",
        "--scenario",
        "missing.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(error_code(&o), "io");
}

#[test]
fn usage_errors_exit_with_two() {
    let o = plan(&[
        "run",
        "--scenario",
        "builtin:cross4",
        "--algo",
        "rrt",
        "--out",
        "x",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "usage");
    let o = plan(&[
        "run",
        "--scenario",
        "builtin:cross4",
        "--trials",
        "3",
        "--full",
        "--out",
        "x",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let o = plan(&["verify"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}
