//! Forward-mode derivative arithmetic.
//!
//! [`Jet`] carries the value, gradient, Hessian and (optionally) the symmetric
//! third derivative tensor of a scalar in the base variables `x`. Order 2 jets are
//! enough to apply a second order operator; order 3 is used where a derivative of
//! a once-differentiated quantity is needed. [`Taylor1`] is the univariate
//! counterpart of arbitrary order used for profiles `α(t)`.
//!
//! The semiclassical parameter `h` is never a jet variable.

mod prim;
mod taylor;

pub use prim::Prim;
pub use taylor::Taylor1;

use crate::error::JetError;

pub const MAX_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    n: usize,
    order: usize,
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    third: Vec<f64>,
}

fn sizes(n: usize, order: usize) -> (usize, usize, usize) {
    (
        if order >= 1 { n } else { 0 },
        if order >= 2 { n * n } else { 0 },
        if order >= 3 { n * n * n } else { 0 },
    )
}

impl Jet {
    pub fn constant(n: usize, order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER);
        let (g, h, t) = sizes(n, order);
        Jet {
            n,
            order,
            value,
            grad: vec![0.0; g],
            hess: vec![0.0; h],
            third: vec![0.0; t],
        }
    }

    /// The coordinate function `x_i` at the point `x`.
    pub fn variable(x: &[f64], i: usize, order: usize) -> Self {
        let mut j = Jet::constant(x.len(), order, x[i]);
        if order >= 1 {
            j.grad[i] = 1.0;
        }
        j
    }

    /// Builds a jet from raw parts; `hess` and `third` are symmetrized.
    pub fn from_parts(value: f64, grad: Vec<f64>, hess: Option<Vec<f64>>, third: Option<Vec<f64>>) -> Self {
        let n = grad.len();
        let order = match (&hess, &third) {
            (Some(_), Some(_)) => 3,
            (Some(_), None) => 2,
            _ => 1,
        };
        let mut j = Jet::constant(n, order, value);
        j.grad = grad;
        if let Some(h) = hess {
            assert_eq!(h.len(), n * n);
            for a in 0..n {
                for b in a..n {
                    let s = 0.5 * (h[a * n + b] + h[b * n + a]);
                    j.hess[a * n + b] = s;
                    j.hess[b * n + a] = s;
                }
            }
        }
        if let Some(t) = third {
            assert_eq!(t.len(), n * n * n);
            j.fill_third(|a, b, c| {
                let perms = [
                    (a, b, c),
                    (a, c, b),
                    (b, a, c),
                    (b, c, a),
                    (c, a, b),
                    (c, b, a),
                ];
                perms.iter().map(|&(p, q, r)| t[(p * n + q) * n + r]).sum::<f64>() / 6.0
            });
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self) -> &[f64] {
        &self.hess
    }

    pub fn third(&self) -> &[f64] {
        &self.third
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.n + j]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[(i * self.n + j) * self.n + k]
    }

    pub fn lift(&self, c: f64) -> Self {
        Jet::constant(self.n, self.order, c)
    }

    /// Drops derivatives above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        let (g, h, t) = sizes(self.n, order);
        Jet {
            n: self.n,
            order,
            value: self.value,
            grad: self.grad[..g].to_vec(),
            hess: self.hess[..h].to_vec(),
            third: self.third[..t].to_vec(),
        }
    }

    /// The jet of `∂_i f`, one order lower.
    pub fn partial(&self, i: usize) -> Self {
        assert!(self.order >= 1, "partial derivative of an order 0 jet");
        let n = self.n;
        let mut j = Jet::constant(n, self.order - 1, self.grad[i]);
        if self.order >= 2 {
            j.grad.copy_from_slice(&self.hess[i * n..(i + 1) * n]);
        }
        if self.order >= 3 {
            j.hess.copy_from_slice(&self.third[i * n * n..(i + 1) * n * n]);
        }
        j
    }

    fn fill_third(&mut self, f: impl Fn(usize, usize, usize) -> f64) {
        let n = self.n;
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let v = f(a, b, c);
                    for (p, q, r) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                        self.third[(p * n + q) * n + r] = v;
                    }
                }
            }
        }
    }

    fn zip_linear(&self, o: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.n, o.n, "jet dimension mismatch");
        let order = self.order.min(o.order);
        let (g, h, t) = sizes(self.n, order);
        Jet {
            n: self.n,
            order,
            value: f(self.value, o.value),
            grad: (0..g).map(|i| f(self.grad[i], o.grad[i])).collect(),
            hess: (0..h).map(|i| f(self.hess[i], o.hess[i])).collect(),
            third: (0..t).map(|i| f(self.third[i], o.third[i])).collect(),
        }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        self.zip_linear(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.zip_linear(o, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            n: self.n,
            order: self.order,
            value: s * self.value,
            grad: self.grad.iter().map(|x| s * x).collect(),
            hess: self.hess.iter().map(|x| s * x).collect(),
            third: self.third.iter().map(|x| s * x).collect(),
        }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut j = self.clone();
        j.value += c;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        assert_eq!(self.n, o.n, "jet dimension mismatch");
        let n = self.n;
        let order = self.order.min(o.order);
        let (a, b) = (self, o);
        let mut r = Jet::constant(n, order, a.value * b.value);
        if order >= 1 {
            for i in 0..n {
                r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
            }
        }
        if order >= 2 {
            for i in 0..n {
                for j in i..n {
                    let v = a.value * b.d2(i, j)
                        + b.value * a.d2(i, j)
                        + a.grad[i] * b.grad[j]
                        + a.grad[j] * b.grad[i];
                    r.hess[i * n + j] = v;
                    r.hess[j * n + i] = v;
                }
            }
        }
        if order >= 3 {
            r.fill_third(|i, j, k| {
                a.value * b.d3(i, j, k)
                    + b.value * a.d3(i, j, k)
                    + a.grad[i] * b.d2(j, k)
                    + a.grad[j] * b.d2(i, k)
                    + a.grad[k] * b.d2(i, j)
                    + b.grad[i] * a.d2(j, k)
                    + b.grad[j] * a.d2(i, k)
                    + b.grad[k] * a.d2(i, j)
            });
        }
        r
    }

    /// Composes a univariate function with this jet; `d[k]` is `f^{(k)}` at `self.value()`.
    pub fn compose(&self, d: &[f64]) -> Jet {
        let n = self.n;
        let u = self;
        let mut r = Jet::constant(n, self.order, d[0]);
        if self.order >= 1 {
            for i in 0..n {
                r.grad[i] = d[1] * u.grad[i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in i..n {
                    let v = d[2] * u.grad[i] * u.grad[j] + d[1] * u.d2(i, j);
                    r.hess[i * n + j] = v;
                    r.hess[j * n + i] = v;
                }
            }
        }
        if self.order >= 3 {
            r.fill_third(|i, j, k| {
                d[3] * u.grad[i] * u.grad[j] * u.grad[k]
                    + d[2] * (u.d2(i, j) * u.grad[k] + u.d2(i, k) * u.grad[j] + u.d2(j, k) * u.grad[i])
                    + d[1] * u.d3(i, j, k)
            });
        }
        r
    }

    pub fn apply(&self, p: &Prim) -> Result<Jet, JetError> {
        let d = p.derivatives(self.value, self.order)?;
        Ok(self.compose(&d))
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        if self.value == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        self.apply(&Prim::Recip)
    }

    pub fn div(&self, o: &Jet) -> Result<Jet, JetError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|x| x.is_finite())
            && self.hess.iter().all(|x| x.is_finite())
            && self.third.iter().all(|x| x.is_finite())
    }
}

/// Arithmetic shared by plain values, multivariate jets and univariate series,
/// so that one interpreter serves all three.
pub trait Scalar: Clone {
    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, JetError>;
    fn apply(&self, p: &Prim) -> Result<Self, JetError>;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        if *o == 0.0 {
            Err(JetError::DivisionByZero)
        } else {
            Ok(self / o)
        }
    }
    fn apply(&self, p: &Prim) -> Result<Self, JetError> {
        p.eval(*self)
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Self {
        Jet::lift(self, c)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, o: &Self) -> Self {
        Jet::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Jet::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Jet::mul(self, o)
    }
    fn neg(&self) -> Self {
        Jet::neg(self)
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        Jet::div(self, o)
    }
    fn apply(&self, p: &Prim) -> Result<Self, JetError> {
        Jet::apply(self, p)
    }
}

impl Scalar for Taylor1 {
    fn lift(&self, c: f64) -> Self {
        Taylor1::lift(self, c)
    }
    fn value(&self) -> f64 {
        Taylor1::value(self)
    }
    fn add(&self, o: &Self) -> Self {
        Taylor1::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Taylor1::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Taylor1::mul(self, o)
    }
    fn neg(&self) -> Self {
        Taylor1::neg(self)
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        Taylor1::div(self, o)
    }
    fn apply(&self, p: &Prim) -> Result<Self, JetError> {
        Taylor1::apply(self, p)
    }
}
