use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

/// Runs the binary with `--out` into a temp file; returns the exit code and the report if one was written.
fn run(args: &[&str]) -> (i32, Option<Value>) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_margolis"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    let report = std::fs::read_to_string(&out).ok().map(|t| serde_json::from_str(&t).unwrap());
    (status.code().unwrap(), report)
}

fn homology(report: &Value) -> Vec<(i64, u64)> {
    report["result"]["table"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["dim"].as_u64().unwrap() > 0)
        .map(|r| (r["degree"].as_i64().unwrap(), r["dim"].as_u64().unwrap()))
        .collect()
}

#[test]
fn margolis_on_fixtures() {
    let (code, r) = run(&["margolis", "--module", &fixture("free.json")]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["verdict"], "pass");
    assert!(homology(&r).is_empty());

    let (code, r) = run(&["margolis", "--module", &fixture("k.json")]);
    assert_eq!(code, 0);
    assert_eq!(homology(&r.unwrap()), vec![(0, 1)]);

    let (code, r) = run(&["margolis", "--module", &fixture("hz3.json")]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    assert_eq!(r["result"]["zero"], true);
    assert!(homology(&r).is_empty());
}

#[test]
fn decompose_free_fixture() {
    let (code, r) = run(&["decompose", "--module", &fixture("free.json")]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    assert_eq!(r["result"]["free"], serde_json::json!([-1, 4]));
    assert_eq!(r["result"]["trivial"], serde_json::json!([]));
}

#[test]
fn trivial_space_is_all_primitive() {
    let (code, r) = run(&["primitives", "--module", &fixture("space.json")]);
    assert_eq!(code, 0);
    let dims = r.unwrap()["result"]["primitives"]["dims"].clone();
    assert_eq!(dims, serde_json::json!([[0, 1], [5, 2], [9, 1]]));
}

#[test]
fn sphere_primitives_report_both_rules() {
    let (code, r) = run(&["primitives", "--prime", "3", "--k", "4", "--window", "-18:20"]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    for key in ["t_powers", "rule_2j_gt_k", "rule_2j_gt_k_plus_1"] {
        assert!(r["result"][key].is_array(), "{key}");
    }
    assert!(r["result"]["t_powers"].as_array().unwrap().contains(&serde_json::json!(0)));
}

#[test]
fn exit_codes() {
    for cmd in ["margolis", "decompose"] {
        assert_eq!(run(&[cmd, "--module", &fixture("corrupted.json")]).0, 2, "{cmd}");
    }
    assert_eq!(run(&["verify-appendix", "--count", "2", "--module", &fixture("corrupted.json")]).0, 2);
    assert_eq!(run(&["margolis", "--module", &fixture("malformed.json")]).0, 1);
    assert_eq!(run(&["margolis", "--module", &fixture("no-such-file.json")]).0, 1);
    assert_eq!(run(&["primitives", "--prime", "3", "--k", "3", "--window", "3:1"]).0, 3);
    assert_eq!(run(&["primitives", "--prime", "4", "--k", "3"]).0, 1);
    assert_eq!(run(&["condition-h", "--window", "10:20"]).0, 3);
}

#[test]
fn small_vanishing_run_passes() {
    let (code, r) = run(&["verify-vanishing", "--qm", "2", "--filtrations", "2:3", "--window", "-4:40"]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["command"], "verify-vanishing");
}
