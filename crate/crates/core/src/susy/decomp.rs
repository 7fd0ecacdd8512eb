use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::Jet;
use crate::operator::{codiff_bivec, OperatorSpec};

use super::{CorrectorPart, Term};

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// `max |U + d(φ−ψ)⌟A − δ(Σ χ (α_k∘φ̂) θ_k)|` over points and h.
    pub residual: f64,
    /// `max |δθ_k|`.
    pub max_codiff_theta: f64,
    pub worst_point: Vec<f64>,
}

/// `U + A∇(φ−ψ)` at `x`.
fn lhs(op: &OperatorSpec, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let b = &op.bundle;
    let n = b.n;
    let dphi = b.phi.eval_jet(x, h, 1)?;
    let dpsi = b.psi.eval_jet(x, h, 1)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = b.u[i].eval_f64(x, h, None)?;
        for j in 0..n {
            s += b.a[i][j].eval_f64(x, h, None)? * (dphi.d1(j) - dpsi.d1(j));
        }
        out.push(s);
    }
    Ok(out)
}

/// `δ(Σ χ (α_k∘φ̂) θ_k)` and `max |δθ_k|` at `x`.
fn codiff_of_decomposition(parts: &[CorrectorPart], x: &[f64], h: f64) -> Result<(Vec<f64>, f64)> {
    let n = x.len();
    let mut w = vec![Jet::constant(n, 1, 0.0); n * n];
    let mut max_dtheta = 0.0f64;
    for part in parts {
        let phi = part.phi_hat.eval_jet(x, h, 1)?;
        let chi = match &part.cutoff {
            Some(c) => Some(c.eval_jet(x, h, 1)?),
            None => None,
        };
        for term in &part.terms {
            let theta: Vec<Jet> = term
                .theta
                .iter()
                .map(|e| e.eval_jet(x, h, 1))
                .collect::<std::result::Result<_, _>>()?;
            let dt = codiff_bivec(&theta, n);
            max_dtheta = max_dtheta.max(dt.iter().map(|v| v * v).sum::<f64>().sqrt());
            if term.alpha.is_zero() {
                continue;
            }
            let mut f = term.alpha.eval_on_jet(&phi, h)?;
            if let Some(c) = &chi {
                f = f.mul(c);
            }
            for (acc, th) in w.iter_mut().zip(&theta) {
                *acc = acc.add(&f.mul(th));
            }
        }
    }
    Ok((codiff_bivec(&w, n), max_dtheta))
}

/// Residual of `U + d(φ−ψ)⌟A ∈ δ(E)` for the given decomposition parts.
pub fn check_assumption(
    op: &OperatorSpec,
    parts: &[CorrectorPart],
    points: &[Vec<f64>],
    hs: &[f64],
) -> Result<AssumptionReport> {
    let per_point: Vec<(f64, f64, usize)> = points
        .par_iter()
        .enumerate()
        .map(|(k, x)| {
            let mut worst = (0.0f64, 0.0f64, k);
            for &h in hs {
                let l = lhs(op, x, h)?;
                let (dw, dt) = codiff_of_decomposition(parts, x, h)?;
                let r = l.iter().zip(&dw).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                worst.0 = worst.0.max(r);
                worst.1 = worst.1.max(dt);
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let mut rep = AssumptionReport {
        residual: 0.0,
        max_codiff_theta: 0.0,
        worst_point: points.first().cloned().unwrap_or_default(),
    };
    for (r, dt, k) in per_point {
        if r > rep.residual {
            rep.residual = r;
            rep.worst_point = points[k].clone();
        }
        rep.max_codiff_theta = rep.max_codiff_theta.max(dt);
    }
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub pass: bool,
    /// Largest `|α^{(j)}(t)| / ⟨t⟩^N` on the outer half of the `⟨t⟩` range divided
    /// by the largest value on the inner half.
    pub ratio_growth: f64,
    pub t_range: [f64; 2],
}

/// Checks that `α_k^{(j)}`, `j ≤ 3`, grow no faster than `⟨t⟩^N` on `[t_lo, t_hi]`.
///
/// The weighted envelope on the outer half (in `⟨t⟩`) must not exceed 1.5 times its
/// value on the inner half; any growth faster than `⟨t⟩^N` fails this on a long range.
pub fn check_growth(terms: &[Term], t_lo: f64, t_hi: f64, growth_order: u32, h: f64) -> Result<GrowthReport> {
    let samples = 401;
    let jb = |t: f64| (1.0 + t * t).sqrt();
    let mut pts = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = t_lo + (t_hi - t_lo) * k as f64 / (samples - 1) as f64;
        let mut env = 0.0f64;
        for term in terms {
            if term.alpha.is_zero() {
                continue;
            }
            let d = term.alpha.eval_taylor(t, h, 3)?.derivatives();
            env = env.max(d.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        pts.push((jb(t), env / jb(t).powi(growth_order as i32)));
    }
    let r_max = pts.iter().fold(0.0f64, |m, p| m.max(p.0));
    let r_min = pts.iter().fold(f64::INFINITY, |m, p| m.min(p.0));
    let (mut inner, mut outer) = (0.0f64, 0.0f64);
    for (r, w) in &pts {
        if *r > 0.5 * (r_min + r_max) {
            outer = outer.max(*w);
        } else {
            inner = inner.max(*w);
        }
    }
    let ratio = match (inner > 0.0, outer > 0.0) {
        (_, false) => 0.0,
        (true, true) => outer / inner,
        (false, true) => f64::INFINITY,
    };
    let pass = r_max < 4.0 || ratio <= 1.5;
    Ok(GrowthReport {
        pass: pass && ratio.is_finite(),
        ratio_growth: ratio,
        t_range: [t_lo, t_hi],
    })
}

/// Least-squares constant θ such that adding the term `(α, θ)` to `fixed` best
/// satisfies the assumption at the sample points.
pub fn fit_constant_theta(
    op: &OperatorSpec,
    fixed: &[CorrectorPart],
    alpha: &Expr,
    points: &[Vec<f64>],
    h: f64,
) -> Result<Vec<f64>> {
    let b = &op.bundle;
    let n = b.n;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| ((p + 1)..n).map(move |q| (p, q))).collect();
    if pairs.is_empty() {
        return Ok(vec![0.0; n * n]);
    }
    let phi_hat = Expr::add(b.phi.clone(), b.psi.clone());
    let rows = points.len() * n;
    let mut m = DMatrix::<f64>::zeros(rows, pairs.len());
    let mut rhs = DVector::<f64>::zeros(rows);
    for (k, x) in points.iter().enumerate() {
        let l = lhs(op, x, h)?;
        let (dw, _) = codiff_of_decomposition(fixed, x, h)?;
        let g = phi_hat.eval_jet(x, h, 1)?;
        let da = alpha.eval_taylor(g.value(), h, 1)?.derivative(1);
        for i in 0..n {
            rhs[k * n + i] = -(l[i] - dw[i]);
        }
        for (c, &(p, q)) in pairs.iter().enumerate() {
            m[(k * n + q, c)] += 2.0 * da * g.d1(p);
            m[(k * n + p, c)] -= 2.0 * da * g.d1(q);
        }
    }
    let svd = m.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Numerical(format!("theta fit failed: {e}")))?;
    let mut theta = vec![0.0; n * n];
    for (c, &(p, q)) in pairs.iter().enumerate() {
        theta[p * n + q] = sol[c];
        theta[q * n + p] = -sol[c];
    }
    Ok(theta)
}
