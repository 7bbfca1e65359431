//! End-to-end runs of the `qentry40` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qentry40"))
        .args(args)
        .env_remove("QENTRY40_PRECISION")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

#[test]
fn fixed_seed_gives_byte_identical_json() {
    let args = [
        "--suite",
        "corollary7",
        "--trials",
        "3",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = run(&[
        "--suite",
        "corollary7",
        "--trials",
        "3",
        "--seed",
        "12",
        "--format",
        "json",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn watson_suite_passes_with_defaults() {
    let out = run(&["--suite", "watson", "--format", "json"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    assert_eq!(doc["summary"]["failures"], "0");
    assert_eq!(doc["meta"]["seed"], "1");
    assert_eq!(doc["meta"]["precision"], "256");
    assert_eq!(doc["results"].as_array().unwrap().len(), 20);
    for r in doc["results"].as_array().unwrap() {
        for key in ["id", "params", "lhs", "rhs", "residual", "tol", "pass"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert!(r["residual"].is_string() && r["lhs"]["re"].is_string());
    }
}

#[test]
fn injected_fault_fails_with_a_failing_record() {
    let out = run(&[
        "--suite",
        "theorem4",
        "--trials",
        "2",
        "--inject-fault",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    let failing: Vec<&serde_json::Value> = doc["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|r| r["id"] == "theorem4_cf"));
}

#[test]
fn invalid_arguments_are_rejected_before_running() {
    for args in [
        &["--precision", "16"][..],
        &["--suite", "theorem5"],
        &["--trials", "zero"],
        &["--frobnicate"],
    ] {
        let out = run(args);
        assert!(!out.status.success(), "{args:?} accepted");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn environment_sets_default_precision() {
    let out = Command::new(env!("CARGO_BIN_EXE_qentry40"))
        .args(["--suite", "watson", "--trials", "1", "--format", "json"])
        .env("QENTRY40_PRECISION", "128")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["meta"]["precision"], "128");
    let flag = Command::new(env!("CARGO_BIN_EXE_qentry40"))
        .args([
            "--suite",
            "watson",
            "--trials",
            "1",
            "--format",
            "json",
            "--precision",
            "96",
        ])
        .env("QENTRY40_PRECISION", "128")
        .output()
        .unwrap();
    assert_eq!(json(&flag)["meta"]["precision"], "96");
}

#[test]
fn text_and_json_carry_the_same_numbers() {
    let j = run(&["--suite", "remark3", "--trials", "2", "--format", "json"]);
    let t = run(&["--suite", "remark3", "--trials", "2"]);
    let text = String::from_utf8(t.stdout).unwrap();
    let doc = json(&j);
    for r in doc["results"].as_array().unwrap() {
        for s in [
            &r["residual"],
            &r["tol"],
            &r["lhs"]["re"],
            &r["lhs"]["im"],
            &r["rhs"]["re"],
            &r["rhs"]["im"],
        ] {
            assert!(
                text.contains(s.as_str().unwrap()),
                "{s} missing from text report"
            );
        }
        for v in r["params"].as_object().unwrap().values() {
            assert!(text.contains(v["re"].as_str().unwrap()));
        }
    }
    assert!(text.contains(&format!(
        "max residual {}",
        doc["summary"]["max_residual"].as_str().unwrap()
    )));
}

#[test]
fn report_file_and_io_failure() {
    let dir = std::env::temp_dir().join(format!("qentry40-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&[
        "--suite",
        "watson",
        "--trials",
        "1",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["summary"]["failures"], "0");
    let bad = dir.join("missing").join("report.json");
    let out = run(&[
        "--suite",
        "watson",
        "--trials",
        "1",
        "--output",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn explain_describes_without_running() {
    let out = run(&["--explain", "corollary8_display"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("q^4"));
    assert!(!run(&["--explain", "no_such_check"]).status.success());
}
