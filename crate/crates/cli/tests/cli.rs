use std::path::PathBuf;
use std::process::{Command, Output};

use reductive_lab::report::Report;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_reductive-lab"));
    c.env_remove("REDUCTIVE_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn identical_seeds_give_identical_reports() {
    for args in [
        &["minpoly", "nk:flag", "--json", "--seed", "42"][..],
        &["appendix", "--s-grid", "0.25:2.0:8", "--json", "--seed", "42"][..],
        &["custom", &data("su2.json"), "--json", "--seed", "42"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn reports_round_trip_through_serde() {
    let out = run(&["minpoly", "np:v3", "--json", "--seed", "42"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(report.to_json(), text);
    assert_eq!(report.schema, "reductive-lab/1");
}

#[test]
fn flags_are_echoed() {
    let v = json(&run(&["verify", "nk:cp3", "--poly", "5/4,1/4", "--json", "--seed", "42", "--tol", "1e-9", "--samples", "20"]));
    assert_eq!(v["seed"], 42);
    assert_eq!(v["samples"], 20);
    assert_eq!(v["tolerances"]["residual"], 1e-9);
    assert_eq!(v["pass"], true);
    assert!(v["wall_time_ms"].is_null());
    let v = json(&run(&["gvcp", "np:v3", "--json", "--timing"]));
    assert!(v["wall_time_ms"].as_f64().is_some());
}

#[test]
fn seed_falls_back_to_environment() {
    let out = bin().args(["gvcp", "nk:s6", "--json"]).env("REDUCTIVE_LAB_SEED", "7").output().unwrap();
    assert_eq!(json(&out)["seed"], 7);
    let out = bin().args(["gvcp", "nk:s6", "--json", "--seed", "9"]).env("REDUCTIVE_LAB_SEED", "7").output().unwrap();
    assert_eq!(json(&out)["seed"], 9);
    let out = bin().args(["gvcp", "nk:s6"]).env("REDUCTIVE_LAB_SEED", "seven").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn minpoly_on_the_flag_manifold() {
    let out = run(&["minpoly", "nk:flag", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"]["coefficients"], serde_json::json!(["1", "0", "1.25", "0", "0.25", "0"]));
    assert_eq!(v["torsion_class"], "SU3Type6");
    assert_eq!(v["dimension"], 6);
    let text = String::from_utf8(run(&["minpoly", "nk:flag,b=-1/6"]).stdout).unwrap();
    assert!(text.contains("relation: λ^5 + 0.625 λ^3 + 0.0625 λ"), "{text}");
    assert!(text.contains("| a2 | 0.625 |"), "{text}");
}

#[test]
fn gvcp_on_v3() {
    let out = run(&["gvcp", "np:v3"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("torsion: G2Type7"));
}

#[test]
fn appendix_fits_only_at_three_halves() {
    let v = json(&run(&["appendix", "--s-grid", "0.25:2.0:8", "--json"]));
    let rows = v["details"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for r in rows {
        let s = r["s"].as_f64().unwrap();
        match r["vcp_multiple_c2"].as_f64() {
            Some(c2) => {
                assert_eq!(s, 1.5);
                assert!((c2 - 2.5).abs() < 1e-8);
            }
            None => assert_ne!(s, 1.5),
        }
    }
}

#[test]
fn negative_case_reports_no_relation() {
    let out = run(&["minpoly", "neg:sp2-sp1", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"]["exists"], false);
    assert!(!v["verdict"]["failed_conditions"].as_array().unwrap().is_empty());
    assert!(v["residuals"]["relation_residual"].is_null());
}

#[test]
fn numeric_failures_exit_with_one() {
    let out = run(&["verify", "nk:cp3", "--poly", "1,1", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn input_errors_exit_with_two() {
    for args in [
        &["minpoly", "bogus:x"][..],
        &["minpoly", "berger:n=2,s=-1"][..],
        &["verify", "nk:cp3", "--poly", "x"][..],
        &["appendix", "--s-grid", "1:2"][..],
        &["appendix", "--s-grid", "-1:0:3"][..],
        &["twistor", "nk:flag", "--d", "6"][..],
        &["custom", "/nonexistent.json"][..],
        &["gvcp", "nk:s6", "--samples", "0"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap_or_else(|_| {
            panic!("{args:?}: stderr {}", String::from_utf8_lossy(&out.stderr))
        });
        assert!(err["error"]["kind"].is_string());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn custom_spaces_run_the_full_pipeline() {
    let v = json(&run(&["custom", &data("su2.json"), "--json"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["torsion_class"], "VolumeType3");
    assert_eq!(v["verdict"]["coefficients"], serde_json::json!(["1", "0"]));
    let v = json(&run(&["custom", &data("s2.json"), "--json"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["dimension"], 2);
    assert_eq!(v["details"]["scalar_curvature"], 2.0);
}

#[test]
fn custom_rejects_non_lie_brackets() {
    let dir = std::env::temp_dir().join(format!("reductive-lab-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.json");
    // [e0,e1] = e1, [e1,e2] = e0 fails the Jacobi identity.
    std::fs::write(&f, r#"{"dim":3,"brackets":[[0,1,1,1],[1,2,0,1]],"metric":{"killing":1}}"#).unwrap();
    let out = run(&["custom", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Jacobi"));
}

#[test]
fn catalog_matches_golden() {
    let out = run(&["catalog", "--json", "--seed", "42"]);
    assert!(out.status.success());
    let golden: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", "catalog.json"].iter().collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, &out.stdout).unwrap();
    }
    let want = std::fs::read_to_string(&golden).expect("golden exists; rerun with UPDATE_GOLDEN=1");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), want);
}
