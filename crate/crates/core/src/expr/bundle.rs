use crate::error::{check_dim, Error, Result};

use super::{parse, Context, Expr};

/// Coefficients of a second order operator together with its two phases.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBundle {
    pub n: usize,
    /// Symmetric matrix `A`, row major.
    pub a: Vec<Vec<Expr>>,
    pub u: Vec<Expr>,
    pub v: Expr,
    pub phi: Expr,
    pub psi: Expr,
}

/// Returns `A` with `A_ij` and `A_ji` replaced by their average where they differ.
pub fn symmetrize(a: Vec<Vec<Expr>>) -> Vec<Vec<Expr>> {
    let n = a.len();
    let mut out = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            if a[i][j] != a[j][i] {
                let avg = Expr::mul(Expr::num(0.5), Expr::add(a[i][j].clone(), a[j][i].clone()));
                out[i][j] = avg.clone();
                out[j][i] = avg;
            }
        }
    }
    out
}

impl FieldBundle {
    pub fn new(a: Vec<Vec<Expr>>, u: Vec<Expr>, v: Expr, phi: Expr, psi: Expr) -> Result<Self> {
        let n = u.len();
        check_dim(n, a.len())?;
        for row in &a {
            check_dim(n, row.len())?;
        }
        for (name, e) in [("phi", &phi), ("psi", &psi)] {
            if e.uses_h() {
                return Err(Error::Invalid(format!("phase {name} must not depend on h")));
            }
        }
        let all = a.iter().flatten().chain(u.iter()).chain([&v, &phi, &psi]);
        for e in all {
            if e.var_count() > n || e.uses_t() {
                return Err(Error::Invalid(format!("expression '{e}' is not valid in dimension {n}")));
            }
        }
        Ok(FieldBundle {
            n,
            a: symmetrize(a),
            u,
            v,
            phi,
            psi,
        })
    }

    /// Parses all entries in the x-context of dimension `u.len()`.
    pub fn parse<S: AsRef<str>>(a: &[Vec<S>], u: &[S], v: &str, phi: &str, psi: &str) -> Result<Self> {
        let ctx = Context::X { n: u.len() };
        let p = |s: &str| parse(s, ctx).map_err(Error::from);
        let a = a
            .iter()
            .map(|row| row.iter().map(|s| p(s.as_ref())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let u = u.iter().map(|s| p(s.as_ref())).collect::<Result<Vec<_>>>()?;
        FieldBundle::new(a, u, p(v)?, p(phi)?, p(psi)?)
    }
}
