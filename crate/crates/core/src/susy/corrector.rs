use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::quadrature::{integrate_exp_weighted, QuadratureConfig};

use super::{CorrectorPart, Outside, Term};

/// Derivatives `J_k^{(m)}(t)`, `m = 0..=order`, of
/// `J_k(t) = ∫₀^{(m∞−t)/h} α_k'(hs + t) e^{−s} ds` for every term.
///
/// `J` solves `−h J' + J = α'`, which is what makes `B = Σ J_k(φ̂) θ_k` solve
/// `hδB + dφ̂⌟B = Σ (α_k'∘φ̂) dφ̂⌟θ_k`.
pub fn profile_integrals(
    terms: &[Term],
    t: f64,
    h: f64,
    m_inf: f64,
    order: usize,
    qc: &QuadratureConfig,
) -> Result<Vec<Vec<f64>>> {
    if h <= 0.0 {
        return Err(Error::Invalid(format!("h must be positive, got {h}")));
    }
    let width = order + 1;
    let active: Vec<usize> = (0..terms.len()).filter(|&k| !terms[k].alpha.is_zero()).collect();
    let mut out = vec![vec![0.0; width]; terms.len()];
    if active.is_empty() {
        return Ok(out);
    }
    let upper = if m_inf.is_finite() { (m_inf - t) / h } else { f64::INFINITY };
    let (vals, _) = integrate_exp_weighted(upper, active.len() * width, qc, |s, buf| {
        for (slot, &k) in active.iter().enumerate() {
            let d = terms[k].alpha.eval_taylor(h * s + t, h, order + 1)?.derivatives();
            buf[slot * width..(slot + 1) * width].copy_from_slice(&d[1..=order + 1]);
        }
        Ok(())
    })?;
    for (slot, &k) in active.iter().enumerate() {
        out[k].copy_from_slice(&vals[slot * width..(slot + 1) * width]);
    }
    if m_inf.is_finite() && order > 0 && upper < 745.0 {
        // boundary terms from the moving upper limit
        let decay = (-upper.max(0.0)).exp();
        for &k in &active {
            let a = terms[k].alpha.eval_taylor(m_inf, h, order)?.derivatives();
            for m in 1..=order {
                let mut corr = 0.0;
                for j in 1..=m {
                    corr += a[j] / h.powi((m - j + 1) as i32);
                }
                out[k][m] -= decay * corr;
            }
        }
    }
    Ok(out)
}

fn is_zero_jet(j: &Jet) -> bool {
    j.value() == 0.0 && j.grad().iter().chain(j.hess()).chain(j.third()).all(|v| *v == 0.0)
}

/// Jets (of the given order) of the entries of `B` for one corrector part at `x`.
pub fn construct_b(part: &CorrectorPart, x: &[f64], h: f64, order: usize, qc: &QuadratureConfig) -> Result<Vec<Jet>> {
    let n = x.len();
    let zero = Jet::constant(n, order, 0.0);
    let mut b = vec![zero.clone(); n * n];
    if part.is_trivial() {
        return Ok(b);
    }
    let cutoff = match &part.cutoff {
        Some(c) => {
            let cj = c.eval_jet(x, h, order)?;
            if is_zero_jet(&cj) {
                return Ok(b);
            }
            Some(cj)
        }
        None => None,
    };
    let phi = part.phi_hat.eval_jet(x, h, order)?;
    let t = phi.value();
    if t > part.m_inf {
        return match part.outside {
            Outside::Error => Err(Error::OutsideValidity {
                value: t,
                limit: part.m_inf,
            }),
            Outside::Zero => Ok(b),
        };
    }
    let j = profile_integrals(&part.terms, t, h, part.m_inf, order, qc)?;
    for (term, jd) in part.terms.iter().zip(&j) {
        if term.alpha.is_zero() {
            continue;
        }
        let jk = phi.compose(&jd[..]);
        for r in 0..n {
            for c in (r + 1)..n {
                let th = &term.theta[r * n + c];
                if th.is_zero() {
                    continue;
                }
                let e = jk.mul(&th.eval_jet(x, h, order)?);
                b[r * n + c] = b[r * n + c].add(&e);
            }
        }
    }
    for r in 0..n {
        for c in (r + 1)..n {
            let mut e = b[r * n + c].clone();
            if let Some(cj) = &cutoff {
                e = e.mul(cj);
            }
            b[c * n + r] = e.neg();
            b[r * n + c] = e;
        }
    }
    Ok(b)
}

/// Coefficients `B_j = χ Σ_k α_k^{(j+1)}(φ̂) θ_k`, `j = 0..=k_max`, of the expansion
/// `B ~ Σ h^j B_j` (exact up to `O(e^{−c/h})` when `m∞` is finite).
pub fn classical_expansion(part: &CorrectorPart, x: &[f64], k_max: usize) -> Result<Vec<Vec<f64>>> {
    if k_max > 6 {
        return Err(Error::Unsupported(format!("classical expansion order {k_max} exceeds 6")));
    }
    let n = x.len();
    if part.terms.iter().any(|t| t.alpha.uses_h()) {
        return Err(Error::Unsupported("classical expansion needs h-independent profiles".into()));
    }
    let mut out = vec![vec![0.0; n * n]; k_max + 1];
    let chi = match &part.cutoff {
        Some(c) => c.eval_f64(x, 0.0, None)?,
        None => 1.0,
    };
    let t = part.phi_hat.eval_f64(x, 0.0, None)?;
    if t > part.m_inf && part.outside == Outside::Error {
        return Err(Error::OutsideValidity {
            value: t,
            limit: part.m_inf,
        });
    }
    if chi == 0.0 || t > part.m_inf {
        return Ok(out);
    }
    for term in &part.terms {
        let d = term.alpha.eval_taylor(t, 0.0, k_max + 1)?.derivatives();
        let theta: Vec<f64> = term
            .theta
            .iter()
            .map(|e| e.eval_f64(x, 0.0, None))
            .collect::<std::result::Result<_, _>>()?;
        for (j, bj) in out.iter_mut().enumerate() {
            for (o, th) in bj.iter_mut().zip(&theta) {
                *o += chi * d[j + 1] * th;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context, Expr};

    fn part(alpha: &str, m_inf: f64) -> CorrectorPart {
        let term = Term::constant(parse(alpha, Context::T).unwrap(), &[0.0, 0.25, -0.25, 0.0], 2).unwrap();
        CorrectorPart {
            terms: vec![term],
            phi_hat: parse("x1^2 + x2^2", Context::X { n: 2 }).unwrap(),
            m_inf,
            outside: Outside::Error,
            cutoff: None,
        }
    }

    #[test]
    fn linear_profile_gives_constant_corrector() {
        let p = part("t", f64::INFINITY);
        let b = construct_b(&p, &[0.7, -0.3], 0.2, 2, &QuadratureConfig::default()).unwrap();
        assert!((b[1].value() - 0.25).abs() < 1e-13);
        assert!(b[1].grad().iter().all(|g| g.abs() < 1e-13));
    }

    #[test]
    fn ode_residual_with_finite_upper_limit() {
        // -h J' + J = α' for finite m∞
        let terms = vec![Term::constant(parse("sin(t) + t^3", Context::T).unwrap(), &[0.0, 1.0, -1.0, 0.0], 2).unwrap()];
        let (h, m_inf) = (0.3, 2.0);
        for t in [-0.5, 0.4, 1.5, 1.95] {
            let j = profile_integrals(&terms, t, h, m_inf, 3, &QuadratureConfig::default()).unwrap();
            let a = terms[0].alpha.eval_taylor(t, h, 4).unwrap().derivatives();
            for m in 0..3 {
                let res = -h * j[0][m + 1] + j[0][m] - a[m + 1];
                assert!(res.abs() < 1e-10, "t = {t}, m = {m}: {res}");
            }
        }
    }

    #[test]
    fn outside_validity_region() {
        let p = part("t", 0.5);
        let r = construct_b(&p, &[1.0, 0.0], 0.1, 1, &QuadratureConfig::default());
        assert!(matches!(r, Err(Error::OutsideValidity { .. })));
        let mut z = p.clone();
        z.outside = Outside::Zero;
        let b = construct_b(&z, &[1.0, 0.0], 0.1, 1, &QuadratureConfig::default()).unwrap();
        assert_eq!(b[1].value(), 0.0);
    }

    #[test]
    fn expansion_order_ceiling() {
        let p = part("t", f64::INFINITY);
        assert!(matches!(classical_expansion(&p, &[0.0, 0.0], 7), Err(Error::Unsupported(_))));
        let zero = CorrectorPart {
            terms: vec![Term::constant(Expr::num(0.0), &[0.0; 4], 2).unwrap()],
            ..p
        };
        let c = classical_expansion(&zero, &[0.3, 0.1], 3).unwrap();
        assert!(c.iter().flatten().all(|v| *v == 0.0));
    }
}
