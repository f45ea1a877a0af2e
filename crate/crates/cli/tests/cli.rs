use std::process::{Command, Output};

fn tsvsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsvsim")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn run_report_schema() {
    let out = tsvsim(&["run", "sharp-shanks", "--trials", "20000", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in [
        "scenario",
        "params",
        "seed",
        "trials",
        "analytic",
        "empirical",
        "chi_square",
        "verdict",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["analytic"][1]["probability"], 0.9);
    assert!(v["chi_square"]["p"].as_f64().unwrap() > 0.001);
    let e = &v["empirical"][1];
    for key in ["eigenvalue", "count", "estimate", "ci_low", "ci_high"] {
        assert!(e.get(key).is_some(), "missing empirical {key}");
    }
}

#[test]
fn identical_ensembles_note() {
    let out = tsvsim(&[
        "run",
        "spin-counterexample",
        "--no-intermediate",
        "--trials",
        "1000",
        "--format",
        "json",
    ]);
    let v = json(&out);
    assert_eq!(v["postselection"]["fraction"], 1.0);
    assert!(v["notes"][0].as_str().unwrap().contains("identical ensembles"));
}

#[test]
fn two_time_prints_both_scenarios() {
    let out = tsvsim(&["run", "singlet", "two-time", "--trials", "1000", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out).as_array().unwrap().len(), 2);
}

#[test]
fn too_few_trials_fails_the_statistical_check() {
    // Expected count below 5 makes the chi-square inapplicable.
    let out = tsvsim(&["run", "sharp-shanks", "--trials", "30", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "fail");
    assert!(v["chi_square"].is_null());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(tsvsim(&["run", "three-box", "--search", "D"]).status.code(), Some(2));
    assert_eq!(tsvsim(&["run", "singlet", "nope"]).status.code(), Some(2));
    assert_eq!(
        tsvsim(&["--trials", "0", "run", "double-sigma-x"]).status.code(),
        Some(2)
    );
    assert_eq!(
        tsvsim(&["abl", "/nonexistent/a", "/nonexistent/b", "/nonexistent/c"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(tsvsim(&["weak", "--g-over-sigma", "0"]).status.code(), Some(2));
}

#[test]
fn abl_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let up = write("up.json", r#"{"dim": 2, "amplitudes": [[1, 0], [0, 0]]}"#);
    let down = write("down.json", r#"{"dim": 2, "amplitudes": [[0, 0], [1, 0]]}"#);
    let plus = write("plus.json", r#"{"dim": 2, "amplitudes": [[1, 0], [1, 0]]}"#);
    let sx = write(
        "sx.json",
        r#"{"dim": 2, "matrix": [[0,0],[1,0],[1,0],[0,0]], "label": "σx"}"#,
    );

    let out = tsvsim(&["abl", &up, &plus, &sx, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["element_of_reality"], 1.0);
    assert_eq!(v["outcomes"][1]["abl"], 1.0);

    // σx in between makes ↑ -> ↓ possible, but weak values are undefined.
    let v = json(&tsvsim(&["abl", &up, &down, &sx, "--format", "json"]));
    assert_eq!(v["outcomes"][0]["abl"], 0.5);
    assert!(v["outcomes"][0]["weak_value"].is_null());

    // σz in between cannot connect ↑ to ↓: a domain error.
    let sz = write("sz.json", r#"{"dim": 2, "matrix": [[1,0],[0,0],[0,0],[-1,0]]}"#);
    let out = tsvsim(&["abl", &up, &down, &sz]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let qutrit = write("q.json", r#"{"dim": 3, "amplitudes": [[1, 0], [0, 0], [0, 0]]}"#);
    assert_eq!(tsvsim(&["abl", &up, &qutrit, &sx]).status.code(), Some(2));
}

#[test]
fn decomposition_modes() {
    let out = tsvsim(&["decomposition", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "consistent");
    let out = tsvsim(&["decomposition", "--mode", "ss-erroneous", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "inconsistent");
    assert_eq!(v["lhs"], 0.6);
}

#[test]
fn weak_writes_pointer_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let pointer = dir.path().join("pointer.csv");
    let report = dir.path().join("weak.json");
    let out = tsvsim(&[
        "weak",
        "--op",
        "PC",
        "--grid-points",
        "512",
        "--pointer-csv",
        pointer.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["weak_value"]["re"], -1.0);
    assert!(v["deviation"].as_f64().unwrap() < 0.02);
    let csv = std::fs::read_to_string(&pointer).unwrap();
    assert!(csv.starts_with("x,density\n"));
    assert_eq!(csv.lines().count(), 513);
}

#[test]
fn ensemble_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ens.csv");
    let out = tsvsim(&[
        "run",
        "three-box",
        "--search",
        "A",
        "--trials",
        "50",
        "--format",
        "csv",
        "--ensemble-csv",
        path.to_str().unwrap(),
    ]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("trial_id,t1_outcome,t_observable,t_outcome,t2_outcome,trial_seed")
    );
    assert_eq!(lines.count(), 50);
}

#[test]
fn list_scenarios_names_every_scenario() {
    let out = tsvsim(&["list-scenarios", "--format", "json"]);
    let names: Vec<String> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        names,
        [
            "sharp-shanks",
            "spin-counterexample",
            "three-box",
            "singlet",
            "single-particle-y",
            "double-sigma-x"
        ]
    );
}
