//! End-to-end checks of the command-line interface: schemas, exit codes,
//! error JSON, and round-trips of emitted documents.

use std::process::{Command, Output};

fn freelevy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freelevy"))
        .args(args)
        .output()
        .expect("failed to run freelevy")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is not JSON")
}

const SEMICIRCLE: &str = r#"{"schema":1,"a":0.0,"b":1.0,"r":{},"flavor":"free"}"#;
const POISSON: &str =
    r#"{"schema":1,"a":1.0,"b":0.0,"r":{"atoms":[{"t":1.0,"mass":1.0}]},"flavor":"free"}"#;

#[test]
fn convolve_adds_triplets() {
    let out = stdout_json(&freelevy(&["convolve", SEMICIRCLE, SEMICIRCLE]));
    assert_eq!(out["schema"], 1);
    assert_eq!(out["a"], 0.0);
    assert_eq!(out["b"], 2.0);
    assert_eq!(out["flavor"], "free");
}

#[test]
fn emitted_json_reparses_to_equal_value() {
    let out = freelevy(&["convolve", SEMICIRCLE, POISSON]);
    let text = String::from_utf8(out.stdout).unwrap();
    let reparsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let again = freelevy(&["convolve", &text, SEMICIRCLE]);
    assert!(again.status.success());
    let v = stdout_json(&again);
    assert_eq!(v["a"], reparsed["a"]);
}

#[test]
fn bp_maps_classical_poisson_to_free_poisson() {
    let classical = r#"{"a":1.0,"b":0.0,"r":{"atoms":[{"t":1.0,"mass":1.0}]},"flavor":"classical"}"#;
    let out = stdout_json(&freelevy(&["bp", classical]));
    assert_eq!(out["flavor"], "free");
    assert_eq!(out["a"], 1.0);
    assert_eq!(out["r"]["atoms"][0]["mass"], 1.0);
}

#[test]
fn density_emits_csv_and_sidecar() {
    let dir = std::env::temp_dir().join("freelevy-cli-test-density");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("semi.csv");
    let out = freelevy(&[
        "density",
        SEMICIRCLE,
        "--grid",
        "-3:3:601",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let content = std::fs::read_to_string(&csv).unwrap();
    let mut lines = content.lines();
    assert_eq!(lines.next().unwrap(), "x,density,cdf");
    // the x = 0 row carries the semicircle midpoint density 1/π
    let mid = content.lines().nth(301).unwrap();
    let density: f64 = mid.split(',').nth(1).unwrap().parse().unwrap();
    assert!((density - 1.0 / std::f64::consts::PI).abs() < 1e-3);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("semi.json")).unwrap()).unwrap();
    assert_eq!(sidecar["schema"], 1);
    assert!(sidecar["atoms"].as_array().unwrap().is_empty());
}

#[test]
fn validation_errors_exit_2_with_error_json() {
    let out = freelevy(&["convolve", "{not json", SEMICIRCLE]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");

    // flavor mismatch is a validation failure
    let classical = r#"{"a":0.0,"b":1.0,"r":{},"flavor":"classical"}"#;
    let out = freelevy(&["convolve", SEMICIRCLE, classical]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "flavor_mismatch");
}

#[test]
fn cumulants_round_trip_via_csv() {
    let dir = std::env::temp_dir().join("freelevy-cli-test-cumulants");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k.csv");
    std::fs::write(&path, "value\n1.0\n1.0\n1.0\n1.0\n1.0\n1.0\n").unwrap();
    let out = freelevy(&["cumulants", path.to_str().unwrap(), "--mode", "k2m"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> =
        text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(values, vec![1.0, 2.0, 5.0, 14.0, 42.0, 132.0]);

    // and back through m2k: all-ones cumulants
    let m = dir.join("m.csv");
    std::fs::write(&m, &text).unwrap();
    let out = freelevy(&["cumulants", m.to_str().unwrap(), "--mode", "m2k"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let v: f64 = line.parse().unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }
}

#[test]
fn basis_triplet_parses_set_expressions() {
    let field = r#"{"schema":1,"cells":[{"lo":0.0,"hi":5.0,"theta":0.0,"sigma2":1.0,"rho":{},"kappa_density":1.0}],"kappa_atoms":[]}"#;
    let out = stdout_json(&freelevy(&["basis-triplet", field, "--set", "[0,1)∪[2,3)"]));
    assert_eq!(out["b"], 2.0);
    // plus-joined unions
    let out = stdout_json(&freelevy(&["basis-triplet", field, "--set", "[0,1)+[4,4.5)"]));
    assert_eq!(out["b"], 1.5);
    // outside the carrier
    let out = freelevy(&["basis-triplet", field, "--set", "[4,6)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn integrate_reports_ct_check() {
    let field = r#"{"schema":1,"cells":[{"lo":0.0,"hi":2.0,"theta":0.5,"sigma2":0.25,"rho":{"atoms":[{"t":1.0,"mass":0.5}]},"kappa_density":1.0}],"kappa_atoms":[]}"#;
    let integrand = r#"{"schema":1,"pieces":[[0.0,1.0,[2.0]],[1.0,2.0,[-0.5]]]}"#;
    let out = stdout_json(&freelevy(&["integrate", field, integrand, "--check"]));
    let check = out["ct_check"].as_f64().unwrap();
    assert!(check < 1e-8, "ct_check {check}");
    assert_eq!(out["flavor"], "free");
}

#[test]
fn truncate_then_levy_ito_consistency() {
    let field = r#"{"schema":1,"cells":[{"lo":0.0,"hi":1.0,"theta":0.5,"sigma2":0.0,"rho":{"atoms":[{"t":1.0,"mass":0.5}]},"kappa_density":2.0}],"kappa_atoms":[]}"#;
    let parts = stdout_json(&freelevy(&["levy-ito", field]));
    assert_eq!(parts["drift"]["pieces"][0][2], 1.0);
    for cell in parts["gaussian"]["cells"].as_array().unwrap() {
        assert_eq!(cell["sigma2"], 0.0);
    }
    // free Poisson basis compensates exactly
    assert!(parts["compensated_drift"]["pieces"].as_array().unwrap().is_empty());

    let truncated = stdout_json(&freelevy(&["truncate", field, "--eps", "2.0"]));
    assert!(truncated["cells"][0]["rho"]["atoms"].as_array().unwrap().is_empty());
}

#[test]
fn integrate_emits_density_of_the_integral_law() {
    let dir = std::env::temp_dir().join("freelevy-cli-test-intdens");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("int.csv");
    let field = r#"{"schema":1,"cells":[{"lo":0.0,"hi":1.0,"theta":0.0,"sigma2":1.0,"rho":{},"kappa_density":1.0}],"kappa_atoms":[]}"#;
    let integrand = r#"{"schema":1,"pieces":[[0.0,1.0,[1.0]]]}"#;
    let out = freelevy(&[
        "integrate",
        field,
        integrand,
        "--density-out",
        csv.to_str().unwrap(),
        "--grid",
        "-3:3:121",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // integral over the unit cell of a semicircular basis is the standard
    // semicircle: midpoint density 1/π
    let content = std::fs::read_to_string(&csv).unwrap();
    let mid = content.lines().nth(61).unwrap();
    let density: f64 = mid.split(',').nth(1).unwrap().parse().unwrap();
    assert!((density - 1.0 / std::f64::consts::PI).abs() < 1e-3);
    let triplet: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(triplet["b"], 1.0);
}

#[test]
fn simulate_writes_eigenvalues_and_ks_report() {
    let dir = std::env::temp_dir().join("freelevy-cli-test-simulate");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("eig.csv");
    let ens = r#"{"schema":1,"kind":"gue","variance":1.0,"n":64,"seed":9}"#;
    let out = freelevy(&["simulate", ens, "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let content = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(content.lines().next().unwrap(), "eigenvalue");
    assert_eq!(content.lines().count(), 65);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("eig.json")).unwrap()).unwrap();
    assert_eq!(report["kind"], "gue");
    assert!(report["ks"].as_f64().unwrap() < 0.15);
}

#[test]
fn check_convergence_reports_pass() {
    let doc = r#"{"schema":1,"sequence":[{"a":0.0,"b":1.1,"r":{},"flavor":"free"},{"a":0.0,"b":1.0000005,"r":{},"flavor":"free"}],"target":{"a":0.0,"b":1.0,"r":{},"flavor":"free"}}"#;
    let out = stdout_json(&freelevy(&["check-convergence", doc]));
    assert_eq!(out["pass"], true);
    let strict = freelevy(&["check-convergence", doc, "--tol", "1e-9"]);
    let v = stdout_json(&strict);
    assert_eq!(v["pass"], false);
}

#[test]
fn decompose_positive_model() {
    let model = r#"{"schema":1,"diffuse":{"cells":[{"lo":0.0,"hi":2.0,"theta":0.5,"sigma2":0.0,"rho":{"atoms":[{"t":1.0,"mass":0.5}]},"kappa_density":2.0}],"kappa_atoms":[]},"atoms":[{"x":0.5,"law":{"triplet":{"a":1.0,"b":0.0,"r":{"atoms":[{"t":1.0,"mass":1.0}]},"flavor":"free"}},"positive":true}]}"#;
    let out = stdout_json(&freelevy(&["decompose", model, "--mode", "positive"]));
    assert_eq!(out["atoms"].as_array().unwrap().len(), 1);
    assert_eq!(out["atoms"][0]["mu_mass"], 1.0);
    let bounds = out["null_array"]["max_bounds"].as_array().unwrap();
    assert_eq!(bounds.len(), 3);
}
