mod common;

use common::{cube, x};
use proptest::prelude::*;
use susyfactor::expr::FieldBundle;
use susyfactor::operator::OperatorSpec;
use susyfactor::quadrature::gauss_legendre;

fn witten() -> OperatorSpec {
    let b = FieldBundle::parse(
        &[vec!["1", "0"], vec!["0", "1"]],
        &["0", "0"],
        "x1^2 + x2^2 - 2*h",
        "(x1^2 + x2^2)/2",
        "(x1^2 + x2^2)/2",
    )
    .unwrap();
    OperatorSpec::new("witten", b)
}

fn general() -> OperatorSpec {
    let b = FieldBundle::parse(
        &[vec!["2 + sin(x1)", "x1*x2/4"], vec!["x1*x2/4", "1 + x2^2"]],
        &["x2^3", "cos(x1) - h*x2"],
        "x1^2 - x2 + h",
        "x1^2/2",
        "x2^2/2",
    )
    .unwrap();
    OperatorSpec::new("general", b)
}

#[test]
fn witten_kernel_is_exact() {
    // P e^{-φ/h} = 0 because v = |∇φ|² − hΔφ
    let op = witten();
    let phi = x("(x1^2 + x2^2)/2", 2);
    for p in cube(2, 7, 2.0) {
        for h in [0.05, 0.1, 0.4] {
            let r = op.conjugated_kernel_residual(&phi, &p, h).unwrap();
            assert!(r.abs() < 1e-12, "{r}");
            let e = op.eikonal_residuals(&p, h).unwrap();
            assert!(e.r1.abs() < 1e-12 && e.r2.abs() < 1e-12);
        }
    }
}

#[test]
fn witten_matches_laplacian_form() {
    // −h²Δu + (|x|² − 2h) u for u = x1 x2² e^{−x1}
    let op = witten();
    let u = x("x1*x2^2*exp(-x1)", 2);
    for p in cube(2, 5, 1.5) {
        let h = 0.2;
        let (a, b) = (p[0], p[1]);
        let e = (-a).exp();
        let lap = b * b * (a - 2.0) * e + 2.0 * a * e;
        let want = -h * h * lap + (a * a + b * b - 2.0 * h) * a * b * b * e;
        let got = op.apply(&u, &p, h).unwrap();
        assert!((got - want).abs() < 1e-12 * (1.0 + want.abs()), "{got} {want}");
    }
}

#[test]
fn transport_term() {
    // A = 0, v = 0: P u = h U·∇u
    let b = FieldBundle::parse(&[vec!["0", "0"], vec!["0", "0"]], &["x2", "-x1"], "0", "0", "0").unwrap();
    let op = OperatorSpec::new("transport", b);
    let u = x("x1^2 + 3*x2", 2);
    let p = [0.7, -1.3];
    let got = op.apply(&u, &p, 0.3).unwrap();
    let want = 0.3 * (p[1] * 2.0 * p[0] - p[0] * 3.0);
    assert!((got - want).abs() < 1e-14);
}

#[test]
fn symbol_of_witten() {
    let op = witten();
    let (even, odd) = op.symbol_split(&[0.5, -1.0], &[0.3, 2.0], 0.1).unwrap();
    assert!((even - (0.09 + 4.0 + 1.25 - 0.2)).abs() < 1e-14);
    assert_eq!(odd, 0.0);
}

/// Composite Gauss–Legendre quadrature of `f` over `[-r, r]²`.
fn integrate2(r: f64, panels: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre(8);
    let w = 2.0 * r / panels as f64;
    let mut pts = Vec::new();
    for k in 0..panels {
        let c = -r + (k as f64 + 0.5) * w;
        for (s, ws) in nodes.iter().zip(&weights) {
            pts.push((c + 0.5 * w * s, 0.5 * w * ws));
        }
    }
    let mut total = 0.0;
    for (a, wa) in &pts {
        for (b, wb) in &pts {
            total += wa * wb * f(&[*a, *b]);
        }
    }
    total
}

#[test]
fn adjoint_pairing() {
    let op = general();
    let adj = op.adjoint();
    let u = x("(1 + x1 - x2^2)*exp(-(x1^2 + x2^2))", 2);
    let w = x("(x1*x2 + 2)*exp(-(x1 - 0.5)^2 - x2^2)", 2);
    let h = 0.3;
    let lhs = integrate2(7.0, 56, |p| op.apply(&u, p, h).unwrap() * w.eval_f64(p, h, None).unwrap());
    let rhs = integrate2(7.0, 56, |p| u.eval_f64(p, h, None).unwrap() * adj.apply(&w, p, h).unwrap());
    assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()), "{lhs} {rhs}");
}

#[test]
fn first_order_part_is_antisymmetric() {
    let p1 = general().first_order_part();
    let u = x("(x1 - x2)*exp(-(x1^2 + x2^2))", 2);
    let w = x("exp(-(x1 + 0.3)^2 - 2*x2^2)", 2);
    let h = 0.25;
    let a = integrate2(7.0, 56, |p| p1.apply(&u, p, h).unwrap() * w.eval_f64(p, h, None).unwrap());
    let b = integrate2(7.0, 56, |p| u.eval_f64(p, h, None).unwrap() * p1.apply(&w, p, h).unwrap());
    assert!((a + b).abs() < 1e-10, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expanded_and_divergence_forms_agree(a in -2.0..2.0f64, b in -2.0..2.0f64, h in 0.01..1.0f64) {
        let op = general();
        let u = x("sin(x1 + 2*x2)*exp(-x1^2)", 2);
        let uj = u.eval_jet(&[a, b], h, 2).unwrap();
        let p = op.apply_jet(&uj, &[a, b], h).unwrap();
        let q = op.apply_via_codiff(&uj, &[a, b], h).unwrap();
        prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
    }

    #[test]
    fn operator_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64, s in -3.0..3.0f64) {
        let op = general();
        let u = x("x1^3 - x2", 2);
        let w = x("cos(x1*x2)", 2);
        let sum = susyfactor::Expr::add(susyfactor::Expr::mul(susyfactor::Expr::num(s), u.clone()), w.clone());
        let h = 0.2;
        let lhs = op.apply(&sum, &[a, b], h).unwrap();
        let rhs = s * op.apply(&u, &[a, b], h).unwrap() + op.apply(&w, &[a, b], h).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
    }
}
