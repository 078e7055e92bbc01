use std::path::PathBuf;
use std::process::{Command, Output};

fn regret(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regret"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    regret(args).status.code().expect("exited normally")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn analyze_hinge() {
    let out = regret(&["analyze", "zoo://hinge_zero_one"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let cert = &v["certificate"];
    assert_eq!(cert["exact_alpha"], "1");
    assert_eq!(cert["paper_alpha"], "2");
    assert_eq!(cert["h_l"], "2");
    assert_eq!(cert["eps_min"], "1");
    assert_eq!(v["atlas"]["vertex_count"], 3);
    assert_eq!(v["schema_version"], 1);
    assert!(v["problem_digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn analyze_flipped_link_is_inconsistent() {
    let out = regret(&["analyze", "zoo://hinge_zero_one", "--flip-link"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["certificate"]["consistent"], false);
    assert!(v["certificate"]["witness"]["p"].is_array());
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(code(&["analyze", "missing.json"]), 2);
    assert_eq!(code(&["analyze", "zoo://no_such_entry"]), 2);
    assert_eq!(code(&["verify", "zoo://hinge_zero_one", "--samples", "0"]), 2);
    assert_eq!(code(&["verify", "zoo://hinge_zero_one", "--alpha", "-1"]), 2);
    assert_eq!(code(&["verify", "zoo://hinge_zero_one", "--alpha", "0.9"]), 2);
    assert_eq!(code(&["lowerbound", "exp_binary", "--grid", "1"]), 2);
    assert_eq!(code(&["lowerbound", "bep_abstain_4"]), 2);
    assert_eq!(code(&["analyze", "zoo://exp_binary"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn verify_violation_exits_4_with_witness() {
    let csv = scratch("hinge_violations.csv");
    let out = regret(&[
        "verify",
        "zoo://hinge_zero_one",
        "--alpha",
        "9/10",
        "--samples",
        "20000",
        "--seed",
        "7",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let v = json(&out);
    assert!(v["conditional"]["violation_count"].as_u64().unwrap() >= 1);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("check,index,p,u,lhs,rhs"));
    assert!(rows.lines().count() > 1);
}

#[test]
fn verify_auto_passes_and_auto_on_inconsistent_exits_3() {
    assert_eq!(code(&["verify", "zoo://hinge_zero_one", "--samples", "5000", "--seed", "8"]), 0);
    assert_eq!(code(&["verify", "zoo://hinge_zero_one", "--flip-link", "--samples", "10"]), 3);
}

#[test]
fn verify_with_data_file() {
    let data = scratch("data.json");
    std::fs::write(
        &data,
        r#"{"schema_version": 1,
            "points": [{"feature": "a", "weight": "1/2", "conditional": ["1/4", "3/4"]},
                       {"feature": "b", "weight": "1/2", "conditional": ["3/4", "1/4"]}],
            "hypothesis": {"a": ["0"], "b": ["0"]}}"#,
    )
    .unwrap();
    let out = regret(&["verify", "zoo://hinge_zero_one", "--samples", "10", "--data", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["data"]["target_regret"], "1/4");
    assert_eq!(v["data"]["surrogate_regret"], "1/2");
}

#[test]
fn outputs_are_byte_deterministic() {
    let args = ["verify", "zoo://hinge_zero_one", "--alpha", "3/4", "--samples", "3000", "--seed", "5"];
    let a = regret(&args);
    let b = regret(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    assert_eq!(regret(&threaded).stdout, a.stdout);
    assert_eq!(
        regret(&["analyze", "zoo://hinge_zero_one"]).stdout,
        regret(&["analyze", "zoo://hinge_zero_one"]).stdout
    );
}

#[test]
fn lowerbound_commands() {
    let csv = scratch("exp_sweep.csv");
    let out = regret(&["lowerbound", "exp_binary", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let s = v["fit"]["slope_surrogate"].as_f64().unwrap();
    assert!((1.9..=2.1).contains(&s));
    let rows = std::fs::read_to_string(&csv).unwrap();
    let mut lines = rows.lines();
    assert_eq!(lines.next(), Some("lambda,target_regret,surrogate_regret,u_lambda_0"));
    assert_eq!(lines.count(), 21);

    let out = regret(&["lowerbound", "zoo://hinge_control_sweep", "--grid", "1e-1:1e-3:15"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["mode"], "control");
    assert_eq!(v["regime"], "linear regime");
}

#[test]
fn zoo_list_and_export() {
    let out = regret(&["zoo", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in regret_core::zoo::CATALOG {
        assert!(text.contains(name));
    }
    let path = scratch("bep.json");
    assert_eq!(code(&["zoo", "export", "bep_abstain_4", "--out", path.to_str().unwrap()]), 0);
    let out = regret(&["analyze", path.to_str().unwrap(), "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["certificate"]["exact_alpha"], "1");
}
