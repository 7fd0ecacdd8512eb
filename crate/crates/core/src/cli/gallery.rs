//! Built-in example problems.

use crate::error::{Error, Result};
use crate::expr::{parse, Context, Expr, FieldBundle};
use crate::morse2d::{run_morse2d, Field2, Morse2dConfig};
use crate::operator::OperatorSpec;
use crate::quadrature::QuadratureConfig;
use crate::susy::{build_perturbation_gallery, tensorize, PerturbationConfig, SusyStructure, Term, ThetaDecomposition};

use super::pipeline::{factorization_check, test_functions, verify_case};
use super::report::{Check, Report};
use super::spec_file::{parse_spec, Case, Overrides, VerifySettings, DEFAULT_H, DEFAULT_TEST_FUNCTIONS};

pub const NAMES: [&str; 5] = ["witten", "kfp", "r3-example", "alpha-linear", "perturbation-two-wells"];

const WITTEN: &str = r#"name = "witten"
dimension = 2

[phases]
phi = "(x1^2 + x2^2)/2"
psi = "(x1^2 + x2^2)/2"

[operator]
A = [["1", "0"], ["0", "1"]]
U = ["0", "0"]
v = "x1^2 + x2^2 - 2*h"

[verify]
box = [[-2.0, 2.0], [-2.0, 2.0]]
"#;

const KFP: &str = r#"name = "kfp"
dimension = 2

[phases]
phi = "x2^2/2 + x1^2/2"
psi = "x2^2/2 + x1^2/2"

[operator]
A = [["0", "0"], ["0", "1"]]
U = ["x2", "-x1"]
v = "x2^2 - h"

[theta]
N = 1
terms = [{ alpha = "t", theta = "fit" }]

[verify]
box = [[-2.0, 2.0], [-2.0, 2.0]]
"#;

const ALPHA_LINEAR: &str = r#"name = "alpha-linear"
dimension = 2

[phases]
phi = "(x1^2 + x2^2)/2"
psi = "(x1^2 + x2^2)/2"

[operator]
A = [["1 + x2^2", "0"], ["0", "1 + x1^2"]]
U = ["2*x2", "-2*x1"]
v = "x1^2 + x2^2 + 2*x1^2*x2^2 - h*(2 + x1^2 + x2^2)"

[theta]
N = 1
terms = [{ alpha = "t", theta = [["0", "0.5"], ["-0.5", "0"]] }]

[verify]
box = [[-2.0, 2.0], [-2.0, 2.0]]
"#;

const R3_EXAMPLE: &str = r#"name = "r3-example"
dimension = 3

[phases]
phi = "x1^2 + x2^2 + x3^2"
psi = "x1^2 + x2^2 + x3^2"

[operator]
A = [["0", "0", "0"], ["0", "0", "0"], ["0", "0", "0"]]
U = ["-x2*cos(x1^2 + x2^2)", "x1*cos(x1^2 + x2^2)", "0"]
v = "0"

[theta]
N = 0
terms = [{ alpha = "0.5*sin(t/2)", theta = [["0", "-0.5", "0"], ["0.5", "0", "0"], ["0", "0", "0"]] }]

[verify]
box = [[-1.5, 1.5], [-1.5, 1.5], [-1.5, 1.5]]
"#;

/// The perturbation example has no spec file: its `U` is synthesized.
pub const PERTURBATION_DESCRIPTION: &str = r#"# perturbation-two-wells (synthesized, not a spec file)
# phi   = 8*((x1^2 - 1)^2 + x2^2), sigma = 8, eps = 1.6, seed point (1, 0)
# alpha = bump(t, -4, 6), theta = [[0, 0.5], [-0.5, 0]]
# U     = codiff(chi * alpha(phi) * theta), A = 0, v = 0, psi = phi
# chi   = bump(phi, 6.4, 7.2) * bump(|x - c|^2, r1^2, r2^2) around the right well
"#;

pub const PERTURBATION_PHI: &str = "8*((x1^2 - 1)^2 + x2^2)";
pub const PERTURBATION_ALPHA: &str = "bump(t, -4, 6)";

/// Spec text of a gallery entry, or the description of the synthesized one.
pub fn spec_text(name: &str) -> Result<&'static str> {
    match name {
        "witten" => Ok(WITTEN),
        "kfp" => Ok(KFP),
        "alpha-linear" => Ok(ALPHA_LINEAR),
        "r3-example" => Ok(R3_EXAMPLE),
        "perturbation-two-wells" => Ok(PERTURBATION_DESCRIPTION),
        _ => Err(unknown(name)),
    }
}

fn unknown(name: &str) -> Error {
    Error::Spec(format!("unknown gallery '{name}'; known: {}", NAMES.join(", ")))
}

fn x(s: &str, n: usize) -> Expr {
    parse(s, Context::X { n }).expect("gallery expression parses")
}

pub fn perturbation_config() -> PerturbationConfig {
    let t = |s: &str| parse(s, Context::T).expect("gallery expression parses");
    PerturbationConfig {
        phi: x(PERTURBATION_PHI, 2),
        sigma: 8.0,
        eps: 1.6,
        alpha: t(PERTURBATION_ALPHA),
        theta: vec![vec![Expr::num(0.0), Expr::num(0.5)], vec![Expr::num(-0.5), Expr::num(0.0)]],
        seed: [1.0, 0.0],
        bounds: [[-2.0, 2.0], [-1.5, 1.5]],
        grid_points: 201,
        qc: QuadratureConfig::default(),
    }
}

fn perturbation_case(ov: &Overrides) -> Result<(Case, Morse2dConfig)> {
    let cfg = perturbation_config();
    let g = build_perturbation_gallery(&cfg)?;
    let hs = ov.h.clone().unwrap_or_else(|| DEFAULT_H.to_vec());
    let case = Case {
        name: "perturbation-two-wells".into(),
        n: 2,
        hs,
        op: g.op,
        dec: g.dec,
        verify: VerifySettings {
            bounds: cfg.bounds.to_vec(),
            grid_points: ov.grid.unwrap_or(21),
            test_functions: DEFAULT_TEST_FUNCTIONS,
            seed: ov.seed.unwrap_or(0),
            tolerances: Default::default(),
        },
        morse2d: None,
    };
    let morse = Morse2dConfig {
        bounds: cfg.bounds,
        grid_points: 201,
        seed: case.verify.seed,
        ..Morse2dConfig::default()
    };
    Ok((case, morse))
}

/// The structure `G = diag(G₂, 0)` for the three-dimensional example, built from the
/// planar potential `−½ sin(x1² + x2²) dx1∧dx2` and the trivial structure in `x3`.
pub fn r3_direct_structure() -> Result<SusyStructure> {
    let zero = || Expr::num(0.0);
    let op2 = OperatorSpec::new(
        "r3-plane",
        FieldBundle::new(
            vec![vec![zero(), zero()], vec![zero(), zero()]],
            vec![x("-x2*cos(x1^2 + x2^2)", 2), x("x1*cos(x1^2 + x2^2)", 2)],
            zero(),
            x("x1^2 + x2^2", 2),
            x("x1^2 + x2^2", 2),
        )?,
    );
    let alpha = parse("0.5*sin(t/2)", Context::T).expect("gallery expression parses");
    let dec = ThetaDecomposition::new(2, vec![Term::constant(alpha, &[0.0, -0.5, 0.5, 0.0], 2)?], 0, f64::INFINITY)?;
    let s2 = SusyStructure::assemble(&op2, &dec, QuadratureConfig::default())?;
    let s1 = SusyStructure {
        phi: x("x1^2", 1),
        psi: x("x1^2", 1),
        ..SusyStructure::zero(1)
    };
    Ok(tensorize(&s2, &s1))
}

/// Resolves a gallery entry into a case.
pub fn gallery_case(name: &str, ov: &Overrides) -> Result<Case> {
    match name {
        "perturbation-two-wells" => Ok(perturbation_case(ov)?.0),
        _ => parse_spec(spec_text(name)?)?.resolve(ov),
    }
}

/// Runs the verification pipeline on a gallery entry, plus the entry's extras.
pub fn run_gallery(name: &str, ov: &Overrides) -> Result<Report> {
    if !NAMES.contains(&name) {
        return Err(unknown(name));
    }
    match name {
        "perturbation-two-wells" => {
            let (case, morse) = perturbation_case(ov)?;
            let mut report = verify_case(&case, "gallery");
            let b = &case.op.bundle;
            let field = Field2 {
                u: [b.u[0].clone(), b.u[1].clone()],
                h: case.hs[0],
            };
            match run_morse2d(&b.phi, &field, &morse) {
                Ok(m) => {
                    report.checks.push(
                        Check::new("glue", m.glue.max_mismatch, m.glue.tolerance)
                            .with_pass(m.glue.pass)
                            .info(),
                    );
                    report.checks.push(
                        Check::new(
                            "per_component_profiles",
                            m.fits.iter().map(|f| f.deviation).fold(0.0, f64::max),
                            morse.fit_tol * (1.0 + m.stream.alpha_range),
                        )
                            .with_pass(m.per_component_pass)
                            .info(),
                    );
                    report.morse2d = Some(m);
                }
                Err(e) => report.notes.push(format!("morse2d sub-report failed: {e}")),
            }
            report.finish();
            Ok(report)
        }
        "r3-example" => {
            let case = gallery_case(name, ov)?;
            let mut report = verify_case(&case, "gallery");
            let direct = r3_direct_structure()?;
            let us = test_functions(case.n, &case.verify.bounds, case.verify.test_functions, case.verify.seed);
            match factorization_check(&direct, &case.op, &us, &case.verify.points(), &case.hs) {
                Ok(r) => report.checks.push(Check::new("direct_factorization", r, 1e-7).info()),
                Err(e) => report.notes.push(format!("direct structure failed: {e}")),
            }
            report
                .notes
                .push("direct_factorization uses G = diag(G2, 0) built from the planar potential".into());
            report.finish();
            Ok(report)
        }
        _ => {
            let case = gallery_case(name, ov)?;
            Ok(verify_case(&case, "gallery"))
        }
    }
}
