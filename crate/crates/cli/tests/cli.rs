use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn platoon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_platoon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gen_network_defaults_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let out = platoon(&["gen-network", "--seed", "11", "--out", s(&a)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("nodes: 100,"));
    assert!(platoon(&["gen-network", "--seed", "11", "--out", s(&b)]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(read_json(&a)["nodes"].as_array().unwrap().len(), 100);
}

#[test]
fn gen_network_rejects_full_dropout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"dropout_rate": 1.0}"#).unwrap();
    let out = platoon(&["gen-network", "--config", s(&cfg), "--out", s(&dir.path().join("n.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dropout_rate"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(platoon(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(platoon(&["sweep"]).status.code(), Some(1));
    assert_eq!(platoon(&["--help"]).status.code(), Some(0));
}

#[test]
fn case_c_fixture_matches_exhaustive_oracle() {
    let out = platoon(&[
        "plan",
        "--network",
        s(&fixture("case_c_network.json")),
        "--vehicles",
        s(&fixture("case_c_vehicles.json")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let expected = read_json(&fixture("case_c_expected.json"));

    assert_eq!(report["master"], expected["master"]);
    let member = report["vehicles"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["vehicle"] == expected["member"])
        .unwrap();
    assert_eq!(member["role"], "member");
    assert_eq!(member["merge_point"], expected["merge_point"]);
    assert_eq!(member["separation_point"], expected["separation_point"]);
    assert_eq!(member["adopted"], expected["adopted"]);
    for (got, want) in [
        (&member["joint_cost"]["combined"], &expected["joint_combined"]),
        (&member["individual_cost"]["combined"], &expected["individual_combined"]),
    ] {
        let (g, w) = (got.as_f64().unwrap(), want.as_f64().unwrap());
        assert!((g - w).abs() <= 1e-9 * w, "{g} vs {w}");
    }
    let walk: Vec<u64> = ["pre", "platoon", "post"]
        .iter()
        .flat_map(|k| member["segments"][k].as_array().unwrap().clone())
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(walk, vec![5, 1, 1, 2, 3, 3, 6]);
}

#[test]
fn single_vehicle_gives_master_only_report() {
    let dir = tempfile::tempdir().unwrap();
    let vehicles = dir.path().join("v.json");
    fs::write(&vehicles, r#"[{"id": 3, "origin": 0, "destination": 4}]"#).unwrap();
    let out_path = dir.path().join("plan.json");
    let out = platoon(&[
        "plan",
        "--network",
        s(&fixture("case_c_network.json")),
        "--vehicles",
        s(&vehicles),
        "--out",
        s(&out_path),
    ]);
    assert!(out.status.success());
    let report = read_json(&out_path);
    let vs = report["vehicles"].as_array().unwrap();
    assert_eq!(vs.len(), 1);
    assert_eq!(vs[0]["role"], "master");
    assert_eq!(vs[0]["adopted"], true);
    assert_eq!(vs[0]["segments"]["pre"], serde_json::json!([0, 1, 2, 3, 4]));
}

#[test]
fn unknown_nodes_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let vehicles = dir.path().join("v.json");
    fs::write(
        &vehicles,
        r#"[{"id": 0, "origin": 0, "destination": 40}, {"id": 1, "origin": 17, "destination": 2}]"#,
    )
    .unwrap();
    let out = platoon(&["plan", "--network", s(&fixture("case_c_network.json")), "--vehicles", s(&vehicles)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("17, 40"));
}

#[test]
fn unreachable_destination_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let network = dir.path().join("net.json");
    let mut doc = read_json(&fixture("case_c_network.json"));
    doc["nodes"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!({"id": 8, "x": 0.0, "y": 500.0}));
    fs::write(&network, doc.to_string()).unwrap();
    let vehicles = dir.path().join("v.json");
    fs::write(
        &vehicles,
        r#"[{"id": 0, "origin": 0, "destination": 4}, {"id": 1, "origin": 5, "destination": 8}]"#,
    )
    .unwrap();
    let out = platoon(&["plan", "--network", s(&network), "--vehicles", s(&vehicles)]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["warnings"], 1);
    assert_eq!(report["vehicles"][1]["status"], "error");
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn tiny_sweep_is_single_cell_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = platoon(&[
            "sweep",
            "--out-dir",
            s(&out_dir),
            "--iterations",
            "1",
            "--grid",
            "1x1",
            "--semantics",
            "literal",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("a");
    let b = run("b");
    let csv = fs::read_to_string(a.join("surface.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "tau,xi,mean_individual_km,mean_joint_km,improvement_pct,mode,semantics");
    assert!(lines[1].starts_with("0.0,0.0,"));
    for f in ["surface.csv", "involvement.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    let report = platoon(&["report", "--summary", s(&a.join("summary.json"))]);
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).contains("1 completed, 0 skipped"));
}

#[test]
fn sweep_with_every_iteration_skipped_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"graph_gen": {"min_route_length": 1e7}, "iterations": 2}"#).unwrap();
    let out = platoon(&["sweep", "--config", s(&cfg), "--out-dir", s(&dir.path().join("o")), "--grid", "1x1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
}
