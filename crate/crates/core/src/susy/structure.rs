use crate::error::{check_dim, Result};
use crate::expr::{Expr, FieldBundle};
use crate::jets::Jet;
use crate::operator::{codiff_bivec, codiff_vec, OperatorSpec};
use crate::quadrature::QuadratureConfig;

use super::corrector::construct_b;
use super::{CorrectorPart, ThetaDecomposition};

/// `G = A + B`: symmetric part `A` from the operator, antisymmetric corrector `B`.
///
/// As a map on covectors `G` has matrix `A + 2B` (see the crate conventions).
#[derive(Debug, Clone, PartialEq)]
pub struct SusyStructure {
    pub n: usize,
    /// Row-major symmetric `A`.
    pub a: Vec<Expr>,
    pub parts: Vec<CorrectorPart>,
    pub phi: Expr,
    pub psi: Expr,
    pub qc: QuadratureConfig,
}

impl SusyStructure {
    /// Builds the structure from an operator and a decomposition for `φ̂ = φ + ψ`.
    ///
    /// The decomposition is not checked here; see [`super::check_assumption`].
    pub fn assemble(op: &OperatorSpec, dec: &ThetaDecomposition, qc: QuadratureConfig) -> Result<Self> {
        let b = &op.bundle;
        check_dim(b.n, dec.n)?;
        qc.validate()?;
        let phi_hat = Expr::add(b.phi.clone(), b.psi.clone());
        Ok(SusyStructure {
            n: b.n,
            a: b.a.iter().flatten().cloned().collect(),
            parts: vec![CorrectorPart::from_decomposition(dec, phi_hat)],
            phi: b.phi.clone(),
            psi: b.psi.clone(),
            qc,
        })
    }

    /// The structure of dimension `n` with `A = 0`, `B = 0` and zero phases.
    pub fn zero(n: usize) -> Self {
        SusyStructure {
            n,
            a: vec![Expr::num(0.0); n * n],
            parts: Vec::new(),
            phi: Expr::num(0.0),
            psi: Expr::num(0.0),
            qc: QuadratureConfig::default(),
        }
    }

    pub fn a_jets(&self, x: &[f64], h: f64, order: usize) -> Result<Vec<Jet>> {
        check_dim(self.n, x.len())?;
        Ok(self
            .a
            .iter()
            .map(|e| e.eval_jet(x, h, order))
            .collect::<std::result::Result<_, _>>()?)
    }

    /// Entries of the bivector `B`.
    pub fn b_jets(&self, x: &[f64], h: f64, order: usize) -> Result<Vec<Jet>> {
        check_dim(self.n, x.len())?;
        let mut b = vec![Jet::constant(self.n, order, 0.0); self.n * self.n];
        for part in &self.parts {
            let p = construct_b(part, x, h, order, &self.qc)?;
            for (acc, v) in b.iter_mut().zip(&p) {
                *acc = acc.add(v);
            }
        }
        Ok(b)
    }

    /// Entries of the matrix `A + 2B` of `G`.
    pub fn g_jets(&self, x: &[f64], h: f64, order: usize) -> Result<Vec<Jet>> {
        let a = self.a_jets(x, h, order)?;
        let b = self.b_jets(x, h, order)?;
        Ok(a.iter().zip(&b).map(|(a, b)| a.add(&b.scale(2.0))).collect())
    }

    pub fn g_matrix(&self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        Ok(self.g_jets(x, h, 0)?.iter().map(Jet::value).collect())
    }

    /// `max |Gˢ − A|` and `max |Gᵃ − 2B|` (matrix entries) at `x`.
    pub fn split_defect(&self, x: &[f64], h: f64) -> Result<(f64, f64)> {
        let n = self.n;
        let g = self.g_matrix(x, h)?;
        let a = self.a_jets(x, h, 0)?;
        let b = self.b_jets(x, h, 0)?;
        let (mut ds, mut da) = (0.0f64, 0.0f64);
        for i in 0..n {
            for j in 0..n {
                let s = 0.5 * (g[i * n + j] + g[j * n + i]);
                let w = 0.5 * (g[i * n + j] - g[j * n + i]);
                ds = ds.max((s - a[i * n + j].value()).abs());
                da = da.max((w - 2.0 * b[i * n + j].value()).abs());
            }
        }
        Ok((ds, da))
    }

    /// `d^{G,*}_{ψ,h} ω = h δ(Gᵗω) + ⟨dψ, Gᵗω⟩` for a covector field given by order 1 jets.
    pub fn twisted_dstar_g(&self, omega: &[Jet], x: &[f64], h: f64) -> Result<f64> {
        check_dim(self.n, omega.len())?;
        if self.n == 0 {
            return Ok(0.0);
        }
        let g = self.g_jets(x, h, 1)?;
        let psi = self.psi.eval_jet(x, h, 1)?;
        Ok(dstar_with(&g, &psi, omega, h))
    }

    /// `P u − d^{G,*}_{ψ,h} d_{φ,h} u` at `x`, from the order 2 jet of `u`.
    pub fn factorization_residual(&self, op: &OperatorSpec, u: &Jet, x: &[f64], h: f64) -> Result<f64> {
        Ok(self.factorization_residuals(op, std::slice::from_ref(u), x, h)?[0])
    }

    /// Residuals for several functions at one point, sharing the evaluation of `G`.
    pub fn factorization_residuals(&self, op: &OperatorSpec, us: &[Jet], x: &[f64], h: f64) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        let phi = self.phi.eval_jet(x, h, 2)?;
        let psi = self.psi.eval_jet(x, h, 1)?;
        let g = if self.n == 0 { Vec::new() } else { self.g_jets(x, h, 1)? };
        us.iter()
            .map(|u| {
                let pu = op.apply_jet(u, x, h)?;
                if self.n == 0 {
                    return Ok(pu);
                }
                let omega = twisted_d(&phi, u, h);
                Ok(pu - dstar_with(&g, &psi, &omega, h))
            })
            .collect()
    }

    /// Euclidean norm of `hδB + dφ̂⌟B − χ Σ (α_k'∘φ̂) dφ̂⌟θ_k`, maximized over parts.
    pub fn pde_certificate(&self, x: &[f64], h: f64) -> Result<f64> {
        let n = self.n;
        let mut worst = 0.0f64;
        for part in &self.parts {
            let b = construct_b(part, x, h, 1, &self.qc)?;
            let phi = part.phi_hat.eval_jet(x, h, 1)?;
            let chi = match &part.cutoff {
                Some(c) => c.eval_f64(x, h, None)?,
                None => 1.0,
            };
            let db = codiff_bivec(&b, n);
            let mut res: Vec<f64> = (0..n)
                .map(|i| {
                    let contr: f64 = (0..n).map(|j| 2.0 * phi.d1(j) * b[j * n + i].value()).sum();
                    h * db[i] + contr
                })
                .collect();
            let t = phi.value();
            if chi != 0.0 && t <= part.m_inf {
                for term in &part.terms {
                    if term.alpha.is_zero() {
                        continue;
                    }
                    let da = term.alpha.eval_taylor(t, h, 1)?.derivative(1);
                    for (i, r) in res.iter_mut().enumerate() {
                        let mut c = 0.0;
                        for j in 0..n {
                            c += 2.0 * phi.d1(j) * term.theta[j * n + i].eval_f64(x, h, None)?;
                        }
                        *r -= chi * da * c;
                    }
                }
            }
            worst = worst.max(res.iter().map(|r| r * r).sum::<f64>().sqrt());
        }
        Ok(worst)
    }
}

fn dstar_with(g: &[Jet], psi: &Jet, omega: &[Jet], h: f64) -> f64 {
    let n = omega.len();
    let gt_omega: Vec<Jet> = (0..n)
        .map(|i| {
            let mut acc = g[i].mul(&omega[0]);
            for j in 1..n {
                acc = acc.add(&g[j * n + i].mul(&omega[j]));
            }
            acc
        })
        .collect();
    let pair: f64 = (0..n).map(|i| psi.d1(i) * gt_omega[i].value()).sum();
    h * codiff_vec(&gt_omega) + pair
}

/// `d_{φ,h} u = h du + u dφ` as order 1 jets, from order 2 jets of `φ` and `u`.
pub fn twisted_d(phi: &Jet, u: &Jet, h: f64) -> Vec<Jet> {
    let u1 = u.truncate(1);
    (0..u.dim())
        .map(|j| u.partial(j).truncate(1).scale(h).add(&u1.mul(&phi.partial(j).truncate(1))))
        .collect()
}

fn block_diag(a: &[Expr], n1: usize, b: &[Expr], n2: usize) -> Vec<Expr> {
    let n = n1 + n2;
    let mut out = vec![Expr::num(0.0); n * n];
    for i in 0..n1 {
        for j in 0..n1 {
            out[i * n + j] = a[i * n1 + j].clone();
        }
    }
    for i in 0..n2 {
        for j in 0..n2 {
            out[(i + n1) * n + j + n1] = b[i * n2 + j].shift_vars(n1);
        }
    }
    out
}

/// Product structure on `ℝ^{n1+n2}`: block diagonal `G`, summed phases.
pub fn tensorize(s1: &SusyStructure, s2: &SusyStructure) -> SusyStructure {
    let n = s1.n + s2.n;
    let parts = s1
        .parts
        .iter()
        .map(|p| p.embed(n, 0))
        .chain(s2.parts.iter().map(|p| p.embed(n, s1.n)))
        .collect();
    SusyStructure {
        n,
        a: block_diag(&s1.a, s1.n, &s2.a, s2.n),
        parts,
        phi: Expr::add(s1.phi.clone(), s2.phi.shift_vars(s1.n)),
        psi: Expr::add(s1.psi.clone(), s2.psi.shift_vars(s1.n)),
        qc: s1.qc,
    }
}

/// The sum `P1 ⊗ 1 + 1 ⊗ P2` as an operator on the product.
pub fn tensorize_operators(p1: &OperatorSpec, p2: &OperatorSpec) -> OperatorSpec {
    let (b1, b2) = (&p1.bundle, &p2.bundle);
    let (n1, n2) = (b1.n, b2.n);
    let a1: Vec<Expr> = b1.a.iter().flatten().cloned().collect();
    let a2: Vec<Expr> = b2.a.iter().flatten().cloned().collect();
    let flat = block_diag(&a1, n1, &a2, n2);
    let n = n1 + n2;
    let a = (0..n).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect();
    let u = b1.u.iter().cloned().chain(b2.u.iter().map(|e| e.shift_vars(n1))).collect();
    OperatorSpec {
        name: format!("{} x {}", p1.name, p2.name),
        bundle: FieldBundle {
            n,
            a,
            u,
            v: Expr::add(b1.v.clone(), b2.v.shift_vars(n1)),
            phi: Expr::add(b1.phi.clone(), b2.phi.shift_vars(n1)),
            psi: Expr::add(b1.psi.clone(), b2.psi.shift_vars(n1)),
        },
    }
}
