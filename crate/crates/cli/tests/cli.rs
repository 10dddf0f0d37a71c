use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supergauss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn plane_verifies_with_zero_residual() {
    let out = run(&["verify", "--case", "euc-f0", "--u", "plane", "--grid", "21"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["overall_max"], 0.0);
    assert_eq!(r["pass"], true);
}

#[test]
fn hyperbolic_first_case_passes_structural_list() {
    let out = run(&[
        "verify",
        "--case",
        "hyp-f3-c1",
        "--alpha",
        "0",
        "--beta",
        "1,0",
        "--gamma",
        "0",
        "--k",
        "1",
        "--c",
        "-1",
        "--eps",
        "1",
        "--f",
        "identity",
        "--grid",
        "41",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    let labels: Vec<&str> = r["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["label"].as_str().unwrap())
        .collect();
    assert!(labels.iter().any(|l| l.starts_with("appendix-b:")));
}

#[test]
fn constraint_violation_exits_one_and_names_constraint() {
    let out = run(&[
        "verify",
        "--case",
        "hyp-f3-c2",
        "--psi",
        "linear:3,0",
        "--phi",
        "liouville",
        "--c",
        "-0.5",
        "--grid",
        "21",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("∂1ψ∂2ψ < −e^φ/c"), "{}", stderr(&out));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["verify", "--case", "euc-f0", "--grid", "5"][..],
        &["verify", "--case", "euc-f0", "--tol", "-1"],
        &["verify", "--case", "euc-f9"],
        &["verify", "--case", "euc-f0", "--alpha", "1"],
        &["verify", "--case", "euc-f0", "--u", "no-such-file.csv"],
        &["verify"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn family_constraint_boundary_is_rejected() {
    let out = run(&[
        "family",
        "--case",
        "hyp-f3-c1",
        "--alpha",
        "1",
        "--beta",
        "0",
        "--gamma",
        "1",
        "--k",
        "1",
        "--c",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("αγ"), "{}", stderr(&out));
}

#[test]
fn family_round_trip_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("euc-f2");
    let out = run(&[
        "family",
        "--case",
        "euc-f2",
        "--a",
        "1",
        "--b",
        "1",
        "--k",
        "1",
        "--h",
        "const:0",
        "--q",
        "const:0",
        "--grid",
        "41",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out_dir.join("manifest.json").exists());
    let v = run(&["verify", "--bundle", out_dir.to_str().unwrap()]);
    assert_eq!(
        v.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&v.stdout)
    );
}

#[test]
fn plane_integration_writes_planar_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "integrate",
        "--case",
        "euc-f0",
        "--u",
        "plane",
        "--grid",
        "11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(r["relation_drift"], 0.0);
    assert_eq!(r["holonomy_max"], 0.0);
    let csv = std::fs::read_to_string(dir.path().join("F2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,t,c00_re,c00_im"));
    // normal component constant
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cols[2], 0.0);
    }
}

#[test]
fn curved_integration_keeps_quadric() {
    let out = run(&["integrate", "--case", "cur-f0", "--c", "-1", "--grid", "41"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    let h = r["grid"]["h"].as_f64().unwrap();
    assert!(r["quadric_drift"].as_f64().unwrap() <= 100.0 * h * h);
    assert!(r["holonomy_order"].as_f64().unwrap() >= 2.0);
    assert!(r["gauge_covariance"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn perturbed_connection_warns_and_fails() {
    let out = run(&[
        "integrate",
        "--case",
        "euc-f0",
        "--grid",
        "41",
        "--perturb",
        "1,3,0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("warning") && err.contains("holonomy"), "{err}");
    assert!(json(&out)["holonomy_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn csv_inputs_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("b");
    let out = run(&[
        "family",
        "--case",
        "euc-f0",
        "--grid",
        "21",
        "--out",
        fam.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fam.join("manifest.json")).unwrap()).unwrap();
    let file = |name: &str| fam.join(manifest["fields"][name]["file"].as_str().unwrap());
    let u = file("u");
    let out = run(&[
        "verify",
        "--case",
        "euc-f0",
        "--grid",
        "21",
        "--u",
        u.to_str().unwrap(),
        "--q",
        "const:0",
        "--h",
        "const:1.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn report_summarizes_and_propagates_failure() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    let p = |x: &Path| x.to_str().unwrap().to_string();
    run(&[
        "verify",
        "--case",
        "euc-f0",
        "--u",
        "plane",
        "--grid",
        "21",
        "--out",
        &p(&good),
    ]);
    run(&[
        "verify",
        "--case",
        "euc-f0",
        "--u",
        "const:1",
        "--h",
        "const:1",
        "--grid",
        "21",
        "--out",
        &p(&bad),
    ]);
    let ok = run(&["report", &p(&good)]);
    assert_eq!(ok.status.code(), Some(0));
    let mixed = run(&["report", &p(&good), &p(&bad)]);
    assert_eq!(mixed.status.code(), Some(1));
    let text = String::from_utf8_lossy(&mixed.stdout);
    assert!(text.contains("gc:gauss"), "{text}");
}
