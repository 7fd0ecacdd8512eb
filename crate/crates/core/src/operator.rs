//! The scalar operator `P = hδ∘A∘hd + U∘hd + v`.
//!
//! In coordinates `P = −Σ h∂_i a_ij h∂_j + Σ U_k h∂_k + v`, which fixes `δ = −div`.

use crate::error::{check_dim, Error, Result};
use crate::expr::{Expr, FieldBundle};
use crate::jets::Jet;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub name: String,
    pub bundle: FieldBundle,
}

/// Jets of the coefficients at one point.
#[derive(Debug, Clone)]
pub struct CoeffJets {
    /// `a[i * n + j]`.
    pub a: Vec<Jet>,
    pub u: Vec<Jet>,
    pub v: Jet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EikonalResiduals {
    pub r1: f64,
    pub r2: f64,
}

/// `δV = −Σ ∂_i V_i`.
pub fn codiff_vec(v: &[Jet]) -> f64 {
    -v.iter().enumerate().map(|(i, vi)| vi.d1(i)).sum::<f64>()
}

/// `δV` as a jet one order lower than the inputs.
pub fn codiff_vec_jet(v: &[Jet]) -> Jet {
    let mut acc = v[0].partial(0).neg();
    for (i, vi) in v.iter().enumerate().skip(1) {
        acc = acc.sub(&vi.partial(i));
    }
    acc
}

/// `(δW)_i = −2 Σ_j ∂_j W_ji` for a bivector field given by its entries `w[i * n + j]`.
pub fn codiff_bivec(w: &[Jet], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -2.0 * (0..n).map(|j| w[j * n + i].d1(j)).sum::<f64>())
        .collect()
}

/// `δW` as jets one order lower than the inputs.
pub fn codiff_bivec_jet(w: &[Jet], n: usize) -> Vec<Jet> {
    (0..n)
        .map(|i| {
            let mut acc = w[i].partial(0);
            for j in 1..n {
                acc = acc.add(&w[j * n + i].partial(j));
            }
            acc.scale(-2.0)
        })
        .collect()
}

fn gradient_jets(u: &Jet) -> Vec<Jet> {
    (0..u.dim()).map(|i| u.partial(i)).collect()
}

impl OperatorSpec {
    pub fn new(name: impl Into<String>, bundle: FieldBundle) -> Self {
        OperatorSpec {
            name: name.into(),
            bundle,
        }
    }

    pub fn dim(&self) -> usize {
        self.bundle.n
    }

    pub fn coeffs(&self, x: &[f64], h: f64, order: usize) -> Result<CoeffJets> {
        check_dim(self.dim(), x.len())?;
        let b = &self.bundle;
        let a = b
            .a
            .iter()
            .flatten()
            .map(|e| e.eval_jet(x, h, order))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let u = b
            .u
            .iter()
            .map(|e| e.eval_jet(x, h, order))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let v = b.v.eval_jet(x, h, order)?;
        Ok(CoeffJets { a, u, v })
    }

    /// `P u (x)` from the order 2 jet of `u`, Leibniz-expanded.
    pub fn apply_jet(&self, u: &Jet, x: &[f64], h: f64) -> Result<f64> {
        let n = self.dim();
        check_dim(n, u.dim())?;
        if u.order() < 2 {
            return Err(Error::Precondition("P needs an order 2 jet of u".into()));
        }
        let c = self.coeffs(x, h, 1)?;
        let mut second = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = &c.a[i * n + j];
                second += a.d1(i) * u.d1(j) + a.value() * u.d2(i, j);
            }
        }
        let first: f64 = (0..n).map(|k| c.u[k].value() * u.d1(k)).sum();
        Ok(-h * h * second + h * first + c.v.value() * u.value())
    }

    pub fn apply(&self, u: &Expr, x: &[f64], h: f64) -> Result<f64> {
        let uj = u.eval_jet(x, h, 2)?;
        self.apply_jet(&uj, x, h)
    }

    /// `hδ(A h du) + U·h du + v u`, going through [`codiff_vec`] instead of the expanded form.
    pub fn apply_via_codiff(&self, u: &Jet, x: &[f64], h: f64) -> Result<f64> {
        let n = self.dim();
        let c = self.coeffs(x, h, 1)?;
        let du = gradient_jets(u);
        let flux: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = c.a[i * n].mul(&du[0]);
                for j in 1..n {
                    acc = acc.add(&c.a[i * n + j].mul(&du[j]));
                }
                acc.scale(h)
            })
            .collect();
        let first: f64 = (0..n).map(|k| c.u[k].value() * h * du[k].value()).sum();
        Ok(h * codiff_vec(&flux) + first + c.v.value() * u.value())
    }

    /// `e^{φ/h} P(e^{−φ/h})` at `x`, computed without forming the exponential.
    pub fn conjugated_kernel_residual(&self, phi: &Expr, x: &[f64], h: f64) -> Result<f64> {
        let g = phi.eval_jet(x, h, 2)?.scale(-1.0 / h);
        // e^{g - g(x)}: the constant factor e^{g(x)} is divided out
        let w = g.compose(&[1.0, 1.0, 1.0]);
        self.apply_jet(&w, x, h)
    }

    /// Formal adjoint `(A, −U, v + hδU)`, with the roles of the phases exchanged.
    pub fn adjoint(&self) -> OperatorSpec {
        let b = &self.bundle;
        let div_u = Expr::sum(b.u.iter().enumerate().map(|(i, e)| e.diff_x(i)));
        let v = Expr::sub(b.v.clone(), Expr::mul(Expr::h(), div_u));
        OperatorSpec {
            name: format!("{}*", self.name),
            bundle: FieldBundle {
                n: b.n,
                a: b.a.clone(),
                u: b.u.iter().map(|e| Expr::neg(e.clone())).collect(),
                v,
                phi: b.psi.clone(),
                psi: b.phi.clone(),
            },
        }
    }

    /// The first order part `U∘hd − (h/2)δU`, formally anti-self-adjoint.
    pub fn first_order_part(&self) -> OperatorSpec {
        let b = &self.bundle;
        let n = b.n;
        let div_u = Expr::sum(b.u.iter().enumerate().map(|(i, e)| e.diff_x(i)));
        OperatorSpec {
            name: format!("{}[1]", self.name),
            bundle: FieldBundle {
                n,
                a: vec![vec![Expr::num(0.0); n]; n],
                u: b.u.clone(),
                v: Expr::mul(Expr::mul(Expr::num(0.5), Expr::h()), div_u),
                phi: b.phi.clone(),
                psi: b.psi.clone(),
            },
        }
    }

    /// `hδ(A ∇f)` for a phase `f`, from an order 2 jet of `f`.
    fn h_codiff_flux(&self, c: &CoeffJets, f: &Jet, h: f64) -> f64 {
        let n = self.dim();
        let mut div = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = &c.a[i * n + j];
                div += a.d1(i) * f.d1(j) + a.value() * f.d2(i, j);
            }
        }
        -h * div
    }

    fn quad(&self, c: &CoeffJets, f: &Jet) -> f64 {
        let n = self.dim();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += f.d1(i) * c.a[i * n + j].value() * f.d1(j);
            }
        }
        q
    }

    /// Left-hand sides of the two eikonal equations for the bundle phases.
    pub fn eikonal_residuals(&self, x: &[f64], h: f64) -> Result<EikonalResiduals> {
        let n = self.dim();
        let c = self.coeffs(x, h, 1)?;
        let phi = self.bundle.phi.eval_jet(x, h, 2)?;
        let psi = self.bundle.psi.eval_jet(x, h, 2)?;
        let u_dphi: f64 = (0..n).map(|k| c.u[k].value() * phi.d1(k)).sum();
        let u_dpsi: f64 = (0..n).map(|k| c.u[k].value() * psi.d1(k)).sum();
        let delta_u = codiff_vec(&c.u);
        let v = c.v.value();
        let r1 = self.quad(&c, &phi) + u_dphi - v + self.h_codiff_flux(&c, &phi, h);
        let r2 = self.quad(&c, &psi) - u_dpsi - v - h * delta_u + self.h_codiff_flux(&c, &psi, h);
        Ok(EikonalResiduals { r1, r2 })
    }

    /// Even part and imaginary coefficient of the odd part of the Weyl symbol.
    pub fn symbol_split(&self, x: &[f64], xi: &[f64], h: f64) -> Result<(f64, f64)> {
        let n = self.dim();
        check_dim(n, xi.len())?;
        let c = self.coeffs(x, h, 2)?;
        let mut p_even = c.v.value();
        let mut div_u = 0.0;
        let mut p_odd = 0.0;
        for i in 0..n {
            div_u += c.u[i].d1(i);
            p_odd -= c.u[i].value() * xi[i];
            for j in 0..n {
                let a = &c.a[i * n + j];
                p_even += xi[i] * a.value() * xi[j] + 0.25 * h * h * a.d2(i, j);
            }
        }
        p_even += 0.5 * h * div_u;
        Ok((p_even, p_odd))
    }
}
