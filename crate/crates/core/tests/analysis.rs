mod common;

use common::instances::{rng, sigma_min, split_instance};
use common::{cube, x};
use nalgebra::DMatrix;
use susyfactor::analysis::{invertibility_definite, invertibility_split, sample_invertibility, temperateness, UNIFORMITY_LIMIT};
use susyfactor::cli::gallery::gallery_case;
use susyfactor::cli::Overrides;
use susyfactor::quadrature::QuadratureConfig;
use susyfactor::susy::SusyStructure;
use susyfactor::Expr;

#[test]
fn split_verdict_matches_singular_values() {
    let mut r = rng(11);
    let mut disagreements = 0;
    for _ in 0..200 {
        let (inst, _) = split_instance(&mut r, false);
        let rep = invertibility_split(&inst.a, &inst.b, 1e-8).unwrap();
        assert!(rep.applicable);
        assert_eq!(rep.kernel_dim, inst.kernel_dim);
        let g = &inst.a + &inst.b;
        let invertible = sigma_min(&g) > 1e-8;
        if invertible != rep.injective {
            disagreements += 1;
        }
        if let (Some(bound), Some(norm)) = (rep.bound, rep.inverse_norm) {
            assert!(norm <= bound * (1.0 + 1e-12), "{norm} > {bound}");
        }
    }
    assert_eq!(disagreements, 0);
}

#[test]
fn definite_bound_holds() {
    let mut r = rng(5);
    for _ in 0..200 {
        let (inst, _) = split_instance(&mut r, true);
        let rep = invertibility_definite(&inst.a, &inst.b).unwrap();
        assert!(rep.inverse_norm <= rep.bound + 1e-12);
        assert!(rep.pass);
    }
}

#[test]
fn kfp_block_oracle() {
    // G = [[0, 1/2], [−1/2, 1]]: A = diag(0, 1), antisymmetric part ±1/2
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
    let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
    let rep = invertibility_split(&a, &b, 1e-10).unwrap();
    assert!(rep.injective);
    assert_eq!(rep.kernel_dim, 1);
    assert!((rep.sigma_restricted - 0.5).abs() < 1e-14);
    let inv = (&a + &b).try_inverse().unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[4.0, -2.0, 2.0, 0.0]);
    assert!((inv - want).amax() < 1e-12);
}

#[test]
fn degenerate_inputs() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let b = DMatrix::zeros(2, 2);
    assert!(!invertibility_split(&a, &b, 1e-10).unwrap().injective);
    assert!(invertibility_definite(&a, &b).is_err());
    let not_sym = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
    assert!(invertibility_split(&not_sym, &b, 1e-10).is_err());
    let neg = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
    assert!(invertibility_split(&neg, &b, 1e-10).is_err());
}

#[test]
fn kfp_is_injective_everywhere() {
    let case = gallery_case("kfp", &Overrides::default()).unwrap();
    let s = SusyStructure::assemble(&case.op, &case.dec, QuadratureConfig::default()).unwrap();
    let samples = sample_invertibility(&s, &cube(2, 5, 2.0), 0.1).unwrap();
    assert!(samples.iter().all(|p| p.report.injective));
}

fn diagonal_structure(entry: &str) -> SusyStructure {
    let e = x(entry, 2);
    SusyStructure {
        a: vec![e.clone(), Expr::num(0.0), Expr::num(0.0), e],
        ..SusyStructure::zero(2)
    }
}

#[test]
fn polynomial_growth_is_uniform() {
    let s = diagonal_structure("1 + x1^2 + x2^2");
    let rep = temperateness(&s, &cube(2, 21, 5.0), &[0.05, 0.1, 0.2, 0.4]).unwrap();
    assert!(rep.pass);
    assert!((rep.per_nu[0].slope - 2.0).abs() < 0.3, "{}", rep.per_nu[0].slope);
    assert!(rep.max_ratio < 1.0 + 1e-12);
}

#[test]
fn blow_up_in_h_is_detected() {
    let s = diagonal_structure("1/h + x1^2");
    let rep = temperateness(&s, &cube(2, 11, 2.0), &[0.05, 0.1, 0.2, 0.4]).unwrap();
    assert!(!rep.pass);
    assert!(rep.max_ratio > UNIFORMITY_LIMIT);
}

#[test]
fn localized_structure_has_order_zero() {
    let s = diagonal_structure("exp(-4*((x1 - 1)^2 + x2^2))");
    let rep = temperateness(&s, &cube(2, 31, 3.0), &[0.1, 0.2]).unwrap();
    assert!(rep.per_nu[0].slope.abs() < 1e-6, "{}", rep.per_nu[0].slope);
    assert!(rep.pass);
}
