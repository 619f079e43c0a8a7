use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_gtorsion");

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("GTORSION_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn spec(name: &str) -> String {
    specs().join(name).to_string_lossy().into_owned()
}

/// Writes a throwaway spec file and returns its path.
fn temp_spec(tag: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gtorsion-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(format!("{tag}.json"));
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn bianchi_torsion_invariant_text() {
    let o = run(&[
        "derive",
        &spec("bianchi.json"),
        "--quantity",
        "torsion-invariant",
        "--format",
        "text",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "6*c'(t)^2/(s1(t)*s2(t))");
}

#[test]
fn bianchi_omega_case_matches() {
    let o = run(&["check-paper", "--case", "bianchi_I", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let omega = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == "omega")
        .expect("omega entry");
    assert_eq!(omega["paper_value"], "13/75");
    assert_eq!(omega["verdict"], "match");
    assert_eq!(v["summary"]["mismatch"], 0);
}

#[test]
fn flat_stress_energy_is_zero() {
    let o = run(&[
        "derive",
        &spec("flat.json"),
        "--quantity",
        "stress-energy",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dim"], 4);
    assert_eq!(v["components"], Value::Array(vec![]));
    assert_eq!(v["valence"], serde_json::json!(["down", "down"]));
}

#[test]
fn json_output_is_byte_deterministic() {
    let args = [
        "derive",
        "preset:ansatz_general",
        "--quantity",
        "christoffel",
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    let ix: Vec<Vec<u64>> = v["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            c["index"]
                .as_array()
                .unwrap()
                .iter()
                .map(|i| i.as_u64().unwrap())
                .collect()
        })
        .collect();
    let mut sorted = ix.clone();
    sorted.sort();
    assert_eq!(ix, sorted);
    assert!(!ix.is_empty());
}

#[test]
fn check_paper_json_is_deterministic() {
    let a = run(&["check-paper", "--json"]);
    let b = run(&["check-paper", "--json"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["summary"]["mismatch"], 0);
    assert!(v["summary"]["match"].as_u64().unwrap() > 0);
}

#[test]
fn derive_does_not_touch_the_spec() {
    let path = spec("bianchi.json");
    let before = fs::read(&path).unwrap();
    let o = run(&["derive", &path, "--quantity", "fluid", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(&path).unwrap(), before);
}

#[test]
fn fluid_json_has_expected_keys() {
    let o = run(&[
        "derive",
        "preset:bianchi_I",
        "--quantity",
        "fluid",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for k in ["eps", "rho", "p", "omega", "q", "pi", "anisotropic"] {
        assert!(v.get(k).is_some(), "missing {k} in {v}");
    }
}

#[test]
fn split_reports_both_parts() {
    let o = run(&[
        "derive",
        "preset:ansatz_general",
        "--quantity",
        "split",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["symmetric"]["components"].as_array().is_some());
    assert!(!v["antisymmetric"]["components"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn coeffs_select_a_family_member() {
    let fam = |c: &str| {
        run(&[
            "derive",
            "preset:bianchi_I",
            "--quantity",
            "curvature",
            "--coeffs",
            c,
            "--format",
            "json",
        ])
    };
    let kind = run(&[
        "derive",
        "preset:bianchi_I",
        "--quantity",
        "curvature",
        "--kind",
        "0",
        "--format",
        "json",
    ]);
    let by_coeffs = fam("1/2,-1/2,1/4,-1/4,0");
    assert_eq!(by_coeffs.status.code(), Some(0), "{}", stderr(&by_coeffs));
    assert_eq!(kind.status.code(), Some(0), "{}", stderr(&kind));
    assert_eq!(by_coeffs.stdout, kind.stdout);
    // All-zero coefficients leave the Riemann tensor of the full connection.
    let riemann = run(&[
        "derive",
        "preset:bianchi_I",
        "--quantity",
        "riemann",
        "--format",
        "json",
    ]);
    assert_eq!(fam("0,0,0,0,0").stdout, riemann.stdout);
}

#[test]
fn bad_coeffs_are_usage_errors() {
    let o = run(&[
        "derive",
        "preset:bianchi_I",
        "--quantity",
        "curvature",
        "--coeffs",
        "1,0,0",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_binds_functions_and_symbols() {
    let o = run(&[
        "eval",
        "preset:bianchi_I",
        "--quantity",
        "torsion-invariant",
        "--bind",
        "s1=1,s2=2,c=t^2,t=1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // 6 (2t)^2 / (1 * 2) at t = 1
    assert!((v["value"].as_f64().unwrap() - 12.0).abs() < 1e-9, "{v}");
}

#[test]
fn eval_reports_binding_gaps() {
    let o = run(&[
        "eval",
        "preset:bianchi_I",
        "--quantity",
        "torsion-invariant",
        "--bind",
        "t=1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unbound"), "{}", stderr(&o));
}

#[test]
fn fd_check_agrees_on_the_ansatz() {
    let o = run(&[
        "fd-check",
        "preset:ansatz_general",
        "--alpha",
        "1",
        "--beta",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["rel_err"].as_f64().unwrap() < 1e-6, "{v}");
    assert_eq!(v["h"].as_f64(), Some(1e-4));
}

#[test]
fn fd_check_rejects_out_of_range_index() {
    let o = run(&[
        "fd-check",
        "preset:ansatz_general",
        "--alpha",
        "9",
        "--beta",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_inputs_are_usage_errors() {
    for args in [
        vec!["derive", "preset:nowhere", "--quantity", "scalar"],
        vec!["derive", "preset:bianchi_I", "--quantity", "nope"],
        vec![
            "derive",
            "preset:bianchi_I",
            "--quantity",
            "scalar",
            "--kind",
            "7",
        ],
        vec!["check-paper", "--case", "no_such_case"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn malformed_specs_name_the_field() {
    let shape = temp_spec(
        "shape",
        r#"{"dimension":3,"coordinates":["t","x"],"entries":[["1","0"],["0","1"]]}"#,
    );
    let o = run(&["derive", shape.to_str().unwrap(), "--quantity", "split"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("coordinates"), "{}", stderr(&o));

    let syntax = temp_spec(
        "syntax",
        r#"{"dimension":2,"coordinates":["t","x"],"entries":[["1","0"],["0","1+"]]}"#,
    );
    let o = run(&["derive", syntax.to_str().unwrap(), "--quantity", "split"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("entries[1][1]"), "{}", stderr(&o));

    let dup = temp_spec(
        "dup",
        r#"{"dimension":2,"coordinates":["t","t"],"entries":[["1","0"],["0","1"]]}"#,
    );
    let o = run(&["derive", dup.to_str().unwrap(), "--quantity", "split"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let o = run(&["derive", "/nonexistent/spec.json", "--quantity", "split"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn singular_metric_is_a_math_error() {
    let p = temp_spec(
        "singular",
        r#"{"dimension":2,"coordinates":["t","x"],"entries":[["0","0"],["0","0"]]}"#,
    );
    let o = run(&["derive", p.to_str().unwrap(), "--quantity", "christoffel"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn seed_override_keeps_verdicts() {
    let o = Command::new(BIN)
        .args(["check-paper", "--case", "flrw", "--json"])
        .env("GTORSION_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["probe"]["seed"] == 7));
}
