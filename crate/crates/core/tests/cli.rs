mod common;

use std::path::Path;
use std::process::Command;

use serde_json::Value;
use susyfactor::cli::gallery::{gallery_case, spec_text};
use susyfactor::cli::{parse_spec, Overrides, NAMES};
use susyfactor::error::Error;

const BIN: &str = env!("CARGO_BIN_EXE_susyfactor");

const MORSE_SPEC: &str = r#"name = "double-well-transport"
dimension = 2

[phases]
phi = "(x1^2 - 1)^2 + x2^2"
psi = "(x1^2 - 1)^2 + x2^2"

[operator]
A = [[0, 0], [0, 0]]
U = ["2*x2", "-4*x1*(x1^2 - 1)"]
v = 0

[morse2d]
box = [[-2, 2], [-1.5, 1.5]]
grid_points = 121
"#;

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(BIN).args(args).env("SUSYFACTOR_THREADS", "2").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json, String::from_utf8_lossy(&out.stderr).to_string())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().to_string()
}

#[test]
fn every_gallery_spec_parses() {
    for name in NAMES {
        assert!(spec_text(name).is_ok());
        if name != "perturbation-two-wells" {
            parse_spec(spec_text(name).unwrap()).unwrap();
        }
        assert!(gallery_case(name, &Overrides::default()).is_ok(), "{name}");
    }
    assert!(matches!(gallery_case("nope", &Overrides::default()), Err(Error::Spec(_))));
}

#[test]
fn spec_errors_are_reported() {
    let bad_field = spec_text("witten").unwrap().replace("[verify]", "[verify]\ncolour = 3");
    assert!(matches!(parse_spec(&bad_field), Err(Error::Spec(_))));
    let bad_expr = spec_text("witten").unwrap().replace("x1^2 + x2^2 - 2*h", "x1^2 + * 2");
    let spec = parse_spec(&bad_expr);
    let err = spec.and_then(|s| s.resolve(&Overrides::default()).map(|_| ())).unwrap_err();
    assert!(matches!(err, Error::Spec(_)), "{err}");
    let wrong_dim = spec_text("witten").unwrap().replace("dimension = 2", "dimension = 3");
    assert!(parse_spec(&wrong_dim).unwrap().resolve(&Overrides::default()).is_err());
}

#[test]
fn integer_literals_are_accepted() {
    let case = parse_spec(MORSE_SPEC).unwrap().resolve(&Overrides::default()).unwrap();
    let m = case.morse2d.unwrap();
    assert_eq!(m.bounds, [[-2.0, 2.0], [-1.5, 1.5]]);
    assert_eq!(m.grid_points, 121);
}

#[test]
fn verify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "w.toml", spec_text("witten").unwrap());
    let out = dir.path().join("r.json");
    let (code, _, _) = run(&["verify", &spec, "--out", out.to_str().unwrap(), "--h", "0.1,0.2", "--seed", "4", "--grid", "9"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["verdict"], "PASS");
    assert_eq!(r["schema"], 1);
    assert_eq!(r["environment"]["h"], serde_json::json!([0.1, 0.2]));
    assert_eq!(r["environment"]["seed"], 4);
    assert_eq!(r["environment"]["grid_points"], 9);
    let checks = r["checks"].as_array().unwrap();
    for name in ["assumption", "eikonal_phi", "eikonal_psi", "factorization", "temperateness"] {
        let c = checks.iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("{name}"));
        assert_eq!(c["pass"], true);
        assert!(c["max_residual"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn exit_codes() {
    let (code, _, err) = run(&["gallery", "no-such-example"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run(&["verify", "/nonexistent/spec.toml"]);
    assert_eq!(code, 2);
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "b.toml", "dimension = [");
    assert_eq!(run(&["verify", &broken]).0, 2);
    // a decomposition that does not match U fails the run
    let wrong = spec_text("alpha-linear").unwrap().replace("\"0.5\"], [\"-0.5\"", "\"0.25\"], [\"-0.25\"");
    let wrong = write(dir.path(), "wrong.toml", &wrong);
    let (code, r, _) = run(&["verify", &wrong, "--grid", "7"]);
    assert_eq!(code, 1);
    assert_eq!(r["verdict"], "FAIL");
}

#[test]
fn print_spec_round_trips() {
    let out = Command::new(BIN).args(["gallery", "kfp", "--print-spec"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, spec_text("kfp").unwrap());
}

#[test]
fn kfp_gallery_reports_constant_structure() {
    let (code, r, _) = run(&["gallery", "kfp", "--grid", "9"]);
    assert_eq!(code, 0);
    let g: Vec<f64> = r["structure"]["g_at_center"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (a, b) in g.iter().zip([0.0, 0.5, -0.5, 1.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((r["invertibility"]["max_inverse_norm"].as_f64().unwrap() - (8.0f64.sqrt() + 2.0)).abs() < 1e-9);
}

#[test]
fn morse2d_command() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "m.toml", MORSE_SPEC);
    let (code, r, err) = run(&["morse2d", &spec]);
    assert_eq!(code, 0, "{err}");
    let m = &r["morse2d"];
    assert_eq!(m["chart"]["count"], 3);
    assert_eq!(m["global_pass"], true);
    assert!(!m["fits"].as_array().unwrap().is_empty());
    // a 3D spec is rejected
    let spec3 = write(dir.path(), "r3.toml", spec_text("r3-example").unwrap());
    assert_eq!(run(&["morse2d", &spec3]).0, 2);
}

#[test]
fn tensor_of_gallery_entries() {
    let (code, r, err) = run(&["tensor", "gallery:witten", "gallery:alpha-linear", "--grid", "5", "--h", "0.1"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(r["environment"]["dimension"], 4);
    assert_eq!(r["factors"].as_array().unwrap().len(), 2);
    assert!(r["checks"][0]["max_residual"].as_f64().unwrap() <= 1e-8);
}

// U = δ(exp(φ̂)·θ) with φ̂ = |x|²: factors exactly, but the profile is not temperate
const EXP_PROFILE: &str = r#"name = "exp-profile"
dimension = 2

[phases]
phi = "(x1^2 + x2^2)/2"
psi = "(x1^2 + x2^2)/2"

[operator]
A = [[0, 0], [0, 0]]
U = ["2*x2*exp(x1^2 + x2^2)", "-2*x1*exp(x1^2 + x2^2)"]
v = 0

[theta]
N = 1
terms = [{ alpha = "exp(t)", theta = [[0, 0.5], [-0.5, 0]] }]

[verify]
box = [[-1.5, 1.5], [-1.5, 1.5]]
grid_points = 11
"#;

#[test]
fn exponential_profile_fails_growth() {
    let case = parse_spec(EXP_PROFILE).unwrap().resolve(&Overrides::default()).unwrap();
    let r = susyfactor::cli::verify_case(&case, "verify");
    let a = r.check("assumption").unwrap();
    assert!(a.pass, "{}", a.max_residual);
    let g = r.check("growth").unwrap();
    assert!(!g.pass && !g.informational && g.max_residual > 1.5, "{g:?}");
    assert_eq!(r.verdict, susyfactor::cli::Verdict::Fail);
}
