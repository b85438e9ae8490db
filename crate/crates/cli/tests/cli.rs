use std::process::{Command, Output};

fn realclone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_realclone"))
        .args(args)
        .env_remove("REALCLONE_MAX_DIM")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = realclone(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn bound_text_output() {
    let out = realclone(&["bound", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0.8535533906"));
    let uni = realclone(&["bound", "--d", "3", "--family", "universal"]);
    assert!(stdout(&uni).contains("0.7500000000"));
}

#[test]
fn bound_json_shape() {
    let doc = json(&["bound", "--d", "2..4"]);
    assert_eq!(doc["command"], "bound");
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    let f2 = results[0]["f_max"].as_f64().unwrap();
    assert!((f2 - (1.0 + 0.5f64.sqrt()) / 2.0).abs() < 1e-15);
    assert!(doc["config"].is_object() && doc["residuals"].is_object() && doc["version"].is_string());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["bound", "--d", "1"],
        vec!["bound", "--d", "2", "--family", "quantum"],
        vec!["clone", "--state", "1,1"],
        vec!["clone", "--state", "1,0", "--d", "3"],
        vec!["optimize", "--d", "2", "--basis", "nope"],
        vec!["figure", "--d", "3", "--dmin", "2"],
        vec!["frobnicate"],
    ] {
        assert_eq!(realclone(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn clone_reports_fidelity_and_constraints() {
    let doc = json(&["clone", "--state", "0.6,0.8", "--trials", "10"]);
    let r = &doc["results"][0];
    assert_eq!(r["d"], 2);
    assert!((r["fidelity"].as_f64().unwrap() - 0.8535533905932737).abs() < 1e-12);
    assert!((r["fidelity_from_state"].as_f64().unwrap() - 0.8535533905932737).abs() < 1e-12);
    assert_eq!(r["marginal"].as_array().unwrap().len(), 2);
    for key in ["positive", "unit_trace", "no_signaling", "covariant", "swap_symmetric"] {
        assert_eq!(r[key], true, "{key}");
    }
}

#[test]
fn clone_accepts_negative_amplitudes() {
    let out = realclone(&["clone", "--state", "-0.6,0.8", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn optimize_matches_bound() {
    let doc = json(&["optimize", "--d", "3", "--restarts", "8", "--trials", "10"]);
    let r = &doc["results"][0];
    assert!(r["gap_to_analytic"].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(r["constraints"], true);
    assert_eq!(r["case"], "a");
}

#[test]
fn verify_passes_and_detects_fault() {
    let ok = realclone(&["verify", "--d", "2..3", "--trials", "10"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("checks passed"));
    let bad = realclone(&["verify", "--d", "2", "--trials", "10", "--inject-fault", "negative-lambda"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn runs_are_deterministic() {
    let args = ["verify", "--d", "3", "--trials", "10", "--seed", "9", "--format", "json"];
    assert_eq!(realclone(&args).stdout, realclone(&args).stdout);
    let args = ["optimize", "--d", "2", "--restarts", "4", "--trials", "5", "--format", "json"];
    assert_eq!(realclone(&args).stdout, realclone(&args).stdout);
}

#[test]
fn figure_defaults_to_csv() {
    let text = stdout(&realclone(&["figure", "--dmin", "2", "--dmax", "4"]));
    assert_eq!(
        text,
        "d,F_real,F_universal\n2,0.8535533906,0.8333333333\n3,0.7701562119,0.7500000000\n4,0.7171292730,0.7000000000\n"
    );
}

#[test]
fn max_dim_from_environment() {
    let run = |limit: &str| {
        Command::new(env!("CARGO_BIN_EXE_realclone"))
            .args(["bound", "--d", "40"])
            .env("REALCLONE_MAX_DIM", limit)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(realclone(&["bound", "--d", "40"]).status.code(), Some(2));
    assert_eq!(run("64"), Some(0));
    assert_eq!(run("8"), Some(2));
}

#[test]
fn writes_to_out_file() {
    let path = std::env::temp_dir().join(format!("realclone-out-{}.csv", std::process::id()));
    let out = realclone(&["figure", "--d", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written, "d,F_real,F_universal\n2,0.8535533906,0.8333333333\n");
}
