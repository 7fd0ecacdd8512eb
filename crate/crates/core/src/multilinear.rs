//! Pointwise exterior algebra on ℝⁿ with the Euclidean metric.
//!
//! Conventions used by the whole crate:
//!
//! * `wedge(u, v)` is stored as the antisymmetric matrix `W_ij = (u_i v_j - u_j v_i) / 2`.
//! * `contract(ξ, W)_i = 2 Σ_j ξ_j W_ji`, which gives the interior product identity
//!   `ξ ⌟ (u ∧ v) = (ξ·u) v - (ξ·v) u`.
//! * A bivector `W` acts on covectors as the antisymmetric map with matrix `2W`
//!   (see [`Bivector::as_map`]); this is the matrix that enters `G = A + B`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Tangent vector in canonical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector(pub Vec<f64>);

/// Cotangent vector in the basis `dx_1, …, dx_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covector(pub Vec<f64>);

/// Element of Λ²ℝⁿ stored as a full antisymmetric matrix (row major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bivector {
    n: usize,
    w: Vec<f64>,
}

/// Symmetric n×n matrix (row major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMap {
    n: usize,
    m: Vec<f64>,
}

impl Vector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Vector(v)
    }
}

impl Covector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Covector(v)
    }

    /// Evaluation `ξ(u)`.
    pub fn eval(&self, u: &Vector) -> Result<f64> {
        check_dim(self.dim(), u.dim())?;
        Ok(dot(&self.0, &u.0))
    }
}

impl Bivector {
    pub fn zero(n: usize) -> Self {
        Bivector {
            n,
            w: vec![0.0; n * n],
        }
    }

    /// Builds a bivector from its strict upper triangle; the lower triangle is
    /// filled with the negated entries so that `W + Wᵗ = 0` holds exactly.
    pub fn from_upper(n: usize, upper: impl Fn(usize, usize) -> f64) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let x = upper(i, j);
                w[i * n + j] = x;
                w[j * n + i] = -x;
            }
        }
        Bivector { n, w }
    }

    /// Antisymmetrizes an arbitrary row-major matrix, `(M - Mᵗ)/2`.
    pub fn from_matrix(n: usize, m: &[f64]) -> Result<Self> {
        check_dim(n * n, m.len())?;
        Ok(Self::from_upper(n, |i, j| 0.5 * (m[i * n + j] - m[j * n + i])))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.w
    }

    pub fn scale(&self, s: f64) -> Self {
        Bivector {
            n: self.n,
            w: self.w.iter().map(|x| s * x).collect(),
        }
    }

    pub fn add(&self, other: &Bivector) -> Result<Self> {
        check_dim(self.n, other.n)?;
        Ok(Bivector {
            n: self.n,
            w: self.w.iter().zip(&other.w).map(|(a, b)| a + b).collect(),
        })
    }

    /// Matrix of the antisymmetric map T*ℝⁿ → Tℝⁿ induced by this bivector.
    pub fn as_map(&self) -> Vec<f64> {
        self.w.iter().map(|x| 2.0 * x).collect()
    }
}

impl SymMap {
    pub fn identity(n: usize) -> Self {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        SymMap { n, m }
    }

    /// Symmetrizes a row-major matrix, `(M + Mᵗ)/2`; entries that already agree are kept bit for bit.
    pub fn from_matrix(n: usize, m: &[f64]) -> Result<Self> {
        check_dim(n * n, m.len())?;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (m[i * n + j], m[j * n + i]);
                out[i * n + j] = if a == b { a } else { 0.5 * (a + b) };
            }
        }
        Ok(SymMap { n, m: out })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.m
    }

    pub fn apply(&self, xi: &Covector) -> Result<Vector> {
        check_dim(self.n, xi.dim())?;
        Ok(Vector(mat_vec(self.n, &self.m, &xi.0)))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mat_vec(n: usize, m: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], x)).collect()
}

pub fn wedge(u: &Vector, v: &Vector) -> Result<Bivector> {
    check_dim(u.dim(), v.dim())?;
    let n = u.dim();
    Ok(Bivector::from_upper(n, |i, j| {
        0.5 * (u.0[i] * v.0[j] - u.0[j] * v.0[i])
    }))
}

/// Interior product `ξ ⌟ W`.
pub fn contract(xi: &Covector, w: &Bivector) -> Result<Vector> {
    check_dim(w.dim(), xi.dim())?;
    Ok(Vector(contract_raw(w.n, &xi.0, &w.w)))
}

pub(crate) fn contract_raw(n: usize, xi: &[f64], w: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| 2.0 * (0..n).map(|j| xi[j] * w[j * n + i]).sum::<f64>())
        .collect()
}

/// Determinant pairing `⟨u_1 ∧ … ∧ u_k, v_1 ∧ … ∧ v_k⟩ = det(v_i(u_j))` for `k ∈ {1, 2}`.
pub fn pairing_det(u: &[Vector], v: &[Covector]) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    let ev = |i: usize, j: usize| v[i].eval(&u[j]);
    match u.len() {
        1 => ev(0, 0),
        2 => Ok(ev(0, 0)? * ev(1, 1)? - ev(0, 1)? * ev(1, 0)?),
        k => Err(Error::Unsupported(format!(
            "determinant pairing of degree {k} (supported: 1, 2)"
        ))),
    }
}

/// Hodge star on 1-forms of the oriented Euclidean plane: `⋆(u1 dx1 + u2 dx2) = -u2 dx1 + u1 dx2`.
pub fn hodge_star_2d(u: &Covector) -> Result<Covector> {
    check_dim(2, u.dim())?;
    Ok(Covector(vec![-u.0[1], u.0[0]]))
}
