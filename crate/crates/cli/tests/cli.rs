use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qualgebra-lab"))
        .args(args)
        .env_remove("QUALGEBRA_LAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = lab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn builtins() -> (Vec<String>, Vec<String>) {
    let v = ok_json(&["--list-builtins"]);
    let names = |k: &str| v[k].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
    (names("structures"), names("diagrams"))
}

#[test]
fn documented_examples() {
    let v = ok_json(&["classify", "--kind", "qualgebra", "--size", "4", "--nontrivial"]);
    assert_eq!(v["representatives"].as_array().unwrap().len(), 9);
    let v = ok_json(&["classify", "--kind", "squandle", "--size", "4", "--nontrivial"]);
    assert_eq!(v["representatives"].as_array().unwrap().len(), 4);

    let v = ok_json(&["color", "--structure", "builtin:P_qs-q_qq-s", "--diagram", "builtin:cuff_st"]);
    assert_eq!(v, serde_json::json!({ "count": 18 }));

    for name in builtins().0.iter().filter(|n| n.starts_with("P_")) {
        let v = ok_json(&["cohomology", "--structure", &format!("builtin:{name}")]);
        assert_eq!(v["z2_rank"], 8);
        assert_eq!(v["b2_rank"], 4);
        assert_eq!(v["h2"], serde_json::json!({ "free_rank": 4, "torsion": [2] }));
    }
}

#[test]
fn builtins_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let (structures, diagrams) = builtins();
    for name in &structures {
        let shown = lab(&["show", "--structure", &format!("builtin:{name}")]);
        assert!(shown.status.success());
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, &shown.stdout).unwrap();
        let again = lab(&["show", "--structure", path.to_str().unwrap()]);
        assert_eq!(shown.stdout, again.stdout, "{name}");
    }
    for name in &diagrams {
        let shown = lab(&["diagram", "builtin", name, "--json"]);
        assert!(shown.status.success());
        let path = dir.path().join(format!("{name}.diagram.json"));
        std::fs::write(&path, &shown.stdout).unwrap();
        let p = path.to_str().unwrap();
        ok_json(&["diagram", "validate", p]);
        let from_file = ok_json(&["color", "--structure", "builtin:SQ4_s3sq", "--diagram", p]);
        let builtin = ok_json(&["color", "--structure", "builtin:SQ4_s3sq", "--diagram", &format!("builtin:{name}")]);
        assert_eq!(from_file, builtin, "{name}");
    }
}

#[test]
fn invariants_from_cocycle_files() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["cohomology", "--structure", "builtin:P_qs-s_qq-q", "--representatives"]);
    let reps = v["representatives"].as_array().unwrap();
    assert_eq!(reps.len(), 5);
    for (k, rep) in reps.iter().enumerate() {
        let path = dir.path().join(format!("rep{k}.json"));
        std::fs::write(&path, rep.to_string()).unwrap();
        let from_file = ok_json(&[
            "invariant", "--structure", "builtin:P_qs-s_qq-q", "--diagram", "builtin:theta_kt",
            "--cocycle", path.to_str().unwrap(), "--polynomial",
        ]);
        let named = ok_json(&[
            "invariant", "--structure", "builtin:P_qs-s_qq-q", "--diagram", "builtin:theta_kt",
            "--cocycle", &format!("rep:{k}"), "--polynomial",
        ]);
        assert_eq!(from_file, named);
        let total: u64 = from_file["weights"].as_array().unwrap().iter().map(|w| w["count"].as_u64().unwrap()).sum();
        assert_eq!(from_file["total"].as_u64(), Some(total));
    }
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // x⊲x must be x
    std::fs::write(&bad, r#"{"kind":"quandle","n":2,"lhd":[[1,0],[1,1]]}"#).unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["show".into(), "--structure".into(), bad.to_str().unwrap().into()],
        vec!["show".into(), "--structure".into(), "builtin:nope".into()],
        vec!["color".into(), "--structure".into(), "builtin:Z3".into(), "--diagram".into(), "builtin:theta_kt".into(), "--mode".into(), "squandle".into()],
        vec!["freeqa".into(), "reduce".into(), "a<*b".into()],
        vec!["invariant".into(), "--structure".into(), "builtin:Z2".into(), "--diagram".into(), "builtin:unknot".into(), "--cocycle".into(), "basis:99".into()],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = lab(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(v["error"]["code"].is_string() && v["error"]["message"].is_string(), "{args:?}");
    }
    assert_eq!(lab(&["color", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn budget_flag_beats_environment() {
    let run = |env: &str, args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_qualgebra-lab"))
            .args(args)
            .env("QUALGEBRA_LAB_BUDGET", env)
            .output()
            .unwrap()
    };
    let out = run("0", &["classify", "--kind", "qualgebra", "--size", "6"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["code"], "SizeTooLarge");
    let out = run("0", &["classify", "--kind", "qualgebra", "--size", "3", "--budget-seconds", "60"]);
    assert!(out.status.success());
}

#[test]
fn output_is_deterministic() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["classify", "--kind", "squandle", "--size", "4"],
        vec!["color", "--structure", "builtin:S3", "--diagram", "builtin:theta_kt", "--list"],
        vec!["fuzz-moves", "--structure", "builtin:P_qs-p_qq-s", "--diagram", "builtin:cuff_hopf", "--seed", "11"],
        vec!["cohomology", "--structure", "builtin:SQ4_q2-s", "--coeff", "z2", "--representatives"],
        vec!["freeqa", "check-relation", "--depth", "4"],
    ];
    for args in runs {
        let a = lab(&args);
        let b = lab(&args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn fuzzing_reports_the_moves() {
    let v = ok_json(&["fuzz-moves", "--structure", "builtin:SQ4_q2-q", "--diagram", "builtin:theta_st", "--seed", "5", "--steps", "4"]);
    assert_eq!(v["ok"], true);
    assert!(v["moves"].as_array().unwrap().len() <= 4);
    for c in v["checks"].as_array().unwrap() {
        assert_eq!(c["count_before"], c["count_after"]);
        assert_eq!(c["weights_before"], c["weights_after"]);
    }
}
