//! The verification pipeline shared by `verify`, `gallery` and `tensor`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{kernel_angle, sample_invertibility, temperateness, UNIFORMITY_LIMIT};
use crate::error::Result;
use crate::expr::Expr;
use crate::grid::Bounds;
use crate::jets::Jet;
use crate::operator::OperatorSpec;
use crate::quadrature::QuadratureConfig;
use crate::susy::{check_assumption, check_growth, SusyStructure};

use super::report::{Check, Environment, InvertibilitySummary, Report, StructureSummary};
use super::spec_file::Case;

/// Seeded test functions `q(x)·exp(−|x − c|²)` with `q` a random cubic polynomial.
pub fn test_functions(n: usize, bounds: &Bounds, count: usize, seed: u64) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exponents: Vec<Vec<u32>> = vec![vec![0; n]];
    for _ in 0..3 {
        let mut next = exponents.clone();
        for e in &exponents {
            for i in 0..n {
                let mut f = e.clone();
                f[i] += 1;
                if f.iter().sum::<u32>() <= 3 && !next.contains(&f) {
                    next.push(f);
                }
            }
        }
        exponents = next;
    }
    (0..count)
        .map(|_| {
            let q = Expr::sum(exponents.iter().map(|e| {
                let c: f64 = rng.random_range(-1.0..1.0);
                e.iter().enumerate().filter(|(_, p)| **p > 0).fold(Expr::num(c), |acc, (i, p)| {
                    Expr::mul(acc, Expr::pow(Expr::x(i), *p as f64))
                })
            }));
            let center: Vec<f64> = bounds.iter().map(|[lo, hi]| rng.random_range(*lo..*hi)).collect();
            let r2 = Expr::sum(
                center
                    .iter()
                    .enumerate()
                    .map(|(i, c)| Expr::pow(Expr::sub(Expr::x(i), Expr::num(*c)), 2.0)),
            );
            Expr::mul(q, Expr::call(crate::expr::Func::Exp, Expr::neg(r2)))
        })
        .collect()
}

fn c2_norm(j: &Jet) -> f64 {
    j.grad()
        .iter()
        .chain(j.hess())
        .fold(j.value().abs(), |m, v| m.max(v.abs()))
}

fn subsample(points: &[Vec<f64>], max: usize) -> Vec<Vec<f64>> {
    let stride = points.len().div_ceil(max).max(1);
    points.iter().step_by(stride).cloned().collect()
}

fn fold_max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

/// `max |P u − d^{G,*}_ψ d_φ u| / (1 + ‖u‖_{C²})` over points, h values and test functions.
pub fn factorization_check(
    s: &SusyStructure,
    op: &OperatorSpec,
    us: &[Expr],
    points: &[Vec<f64>],
    hs: &[f64],
) -> Result<f64> {
    let norms: Vec<f64> = us
        .iter()
        .map(|u| {
            points
                .par_iter()
                .map(|x| Ok(c2_norm(&u.eval_jet(x, 0.0, 2)?)))
                .collect::<Result<Vec<f64>>>()
                .map(fold_max)
        })
        .collect::<Result<_>>()?;
    let per_point: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let jets = us
                .iter()
                .map(|u| u.eval_jet(x, 0.0, 2))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let mut worst = 0.0f64;
            for &h in hs {
                let r = s.factorization_residuals(op, &jets, x, h)?;
                for (ri, ni) in r.iter().zip(&norms) {
                    worst = fold_max([worst, ri.abs() / (1.0 + ni)]);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(fold_max(per_point))
}

fn environment(case: &Case) -> Environment {
    Environment {
        dimension: case.n,
        seed: case.verify.seed,
        grid_points: case.verify.grid_points,
        h: case.hs.clone(),
        bounds: case.verify.bounds.clone(),
        test_functions: case.verify.test_functions,
    }
}

/// Runs every stage and returns the finished report; evaluation failures are
/// recorded in the report rather than returned.
pub fn verify_case(case: &Case, command: &str) -> Report {
    let mut report = Report::new(command, &case.name);
    report.environment = Some(environment(case));
    if let Err(e) = run_stages(case, &mut report) {
        report.error = Some(e.to_string());
    }
    report.finish();
    report
}

fn run_stages(case: &Case, report: &mut Report) -> Result<()> {
    let tol = &case.verify.tolerances;
    let points = case.verify.points();
    let hs = &case.hs;
    let op = &case.op;
    let parts = case.parts();

    let assumption = check_assumption(op, &parts, &points, hs)?;
    report.checks.push(Check::new("assumption", assumption.residual, tol.assumption));

    let active: Vec<_> = case.dec.terms.iter().filter(|t| !t.alpha.is_zero()).cloned().collect();
    if !active.is_empty() {
        let phi_hat: Vec<f64> = points
            .iter()
            .map(|x| parts[0].phi_hat.eval_f64(x, hs[0], None))
            .collect::<std::result::Result<_, _>>()?;
        let lo = phi_hat.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let hi = phi_hat.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)).min(case.dec.m_inf);
        if hi > lo {
            let g = check_growth(&active, lo, hi, case.dec.growth_order, hs[0])?;
            report
                .checks
                .push(Check::new("growth", g.ratio_growth, 1.5).with_pass(g.pass));
        }
    }

    let s = SusyStructure::assemble(op, &case.dec, QuadratureConfig::default())?;

    let eik: Vec<(f64, f64)> = points
        .par_iter()
        .map(|x| {
            let mut m = (0.0f64, 0.0f64);
            for &h in hs {
                let r = op.eikonal_residuals(x, h)?;
                m = (fold_max([m.0, r.r1.abs()]), fold_max([m.1, r.r2.abs()]));
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let r1 = fold_max(eik.iter().map(|e| e.0));
    let r2 = fold_max(eik.iter().map(|e| e.1));
    report.checks.push(Check::new("eikonal_phi", r1, tol.eikonal));
    report.checks.push(Check::new("eikonal_psi", r2, tol.eikonal));
    let implied = 10.0 * (r1 + assumption.residual) + 1e-9;
    let mut imp = Check::new("eikonal_implication", r2, implied);
    if !(assumption.residual <= tol.assumption && r1 <= tol.eikonal) {
        imp = imp.info();
    }
    report.checks.push(imp);

    let pde: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let mut m = 0.0f64;
            for &h in hs {
                m = fold_max([m, s.pde_certificate(x, h)?]);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    report.checks.push(Check::new("pde_certificate", fold_max(pde), tol.pde));

    let few = subsample(&points, 200);
    let mut split = 0.0f64;
    let mut gmax = 0.0f64;
    for x in &few {
        let (ds, da) = s.split_defect(x, hs[0])?;
        split = fold_max([split, ds, da]);
        gmax = fold_max(std::iter::once(gmax).chain(s.g_matrix(x, hs[0])?.iter().map(|v| v.abs())));
    }
    report.checks.push(Check::new("symmetric_split", split, 1e-13 * (1.0 + gmax)));

    let us = test_functions(case.n, &case.verify.bounds, case.verify.test_functions, case.verify.seed);
    let fact = factorization_check(&s, op, &us, &points, hs)?;
    report.checks.push(Check::new("factorization", fact, tol.factorization));

    let temp_points = subsample(&points, 400);
    let t = temperateness(&s, &temp_points, hs)?;
    report.checks.push(Check::new("temperateness", t.max_ratio, UNIFORMITY_LIMIT));
    report.temperateness = Some(t);

    let inv = sample_invertibility(&s, &few, hs[0])?;
    let injective = inv.iter().filter(|r| r.report.injective).count();
    let kernel_drift = match inv.first() {
        Some(first) => fold_max(inv.iter().map(|r| kernel_angle(&first.report, &r.report).unwrap_or(1.0))),
        None => 0.0,
    };
    let summary = InvertibilitySummary {
        h: hs[0],
        points: inv.len(),
        injective_points: injective,
        min_sigma_restricted: inv.iter().map(|r| r.report.sigma_restricted).fold(f64::INFINITY, f64::min),
        max_inverse_norm: inv.iter().filter_map(|r| r.report.inverse_norm).reduce(f64::max),
        max_bound: inv.iter().filter_map(|r| r.report.bound).reduce(f64::max),
        kernel_drift,
    };
    report.checks.push(
        Check::new("invertibility", (inv.len() - injective) as f64, 0.0)
            .with_pass(injective == inv.len())
            .info(),
    );
    // the split criterion presumes one kernel for every x
    report.checks.push(Check::new("kernel_constancy", kernel_drift, 1e-8).info());
    report.invertibility = Some(summary);

    let center: Vec<f64> = case.verify.bounds.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect();
    report.structure = Some(StructureSummary {
        g_at_center: s.g_matrix(&center, hs[0])?,
        center,
        terms: case.dec.terms.len(),
        m_infinity: case.dec.m_inf.is_finite().then_some(case.dec.m_inf),
    });
    Ok(())
}
