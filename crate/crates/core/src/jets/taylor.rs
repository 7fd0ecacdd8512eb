use crate::error::JetError;

use super::Prim;

/// Truncated univariate Taylor series `Σ c_k s^k` around a base point.
///
/// Used for profiles `α(t)` where derivatives of high order are needed
/// (classical expansion coefficients, differentiation under the integral sign).
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor1 {
    c: Vec<f64>,
}

impl Taylor1 {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Taylor1 { c }
    }

    /// The series of the identity map at `t0`.
    pub fn identity(t0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = t0;
        if order > 0 {
            c[1] = 1.0;
        }
        Taylor1 { c }
    }

    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Taylor1 { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// `k`-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c.get(k).copied().unwrap_or(0.0) * fact
    }

    /// All derivatives `f^{(k)}`, `k = 0..=order`.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..self.c.len()).map(|k| self.derivative(k)).collect()
    }

    pub fn lift(&self, value: f64) -> Self {
        Taylor1::constant(value, self.order())
    }

    pub fn scale(&self, s: f64) -> Self {
        Taylor1 {
            c: self.c.iter().map(|x| s * x).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        Taylor1 {
            c: (0..=k).map(|i| self.c[i] + o.c[i]).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        Taylor1 {
            c: (0..=k).map(|i| self.c[i] - o.c[i]).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        let c = (0..=k)
            .map(|m| (0..=m).map(|j| self.c[j] * o.c[m - j]).sum())
            .collect();
        Taylor1 { c }
    }

    pub fn div(&self, o: &Self) -> Result<Self, JetError> {
        if o.c[0] == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let k = self.order().min(o.order());
        let mut q = vec![0.0; k + 1];
        for m in 0..=k {
            let s: f64 = (1..=m).map(|j| o.c[j] * q[m - j]).sum();
            q[m] = (self.c[m] - s) / o.c[0];
        }
        Ok(Taylor1 { c: q })
    }

    /// Composes a univariate function, given by its normalized Taylor coefficients at
    /// `self.value()`, with this series.
    pub fn apply_coeffs(&self, f: &[f64]) -> Self {
        let k = self.order();
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut r = Taylor1::constant(f.get(k).copied().unwrap_or(0.0), k);
        for j in (0..k).rev() {
            r = r.mul(&delta);
            r.c[0] += f[j];
        }
        r
    }

    pub fn apply(&self, p: &Prim) -> Result<Self, JetError> {
        let f = p.taylor(self.value(), self.order())?;
        Ok(self.apply_coeffs(&f))
    }
}
