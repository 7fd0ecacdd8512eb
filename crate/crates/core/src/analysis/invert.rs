use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::susy::SusyStructure;

fn sigma_min(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return f64::INFINITY;
    }
    m.singular_values().iter().fold(f64::INFINITY, |a, s| a.min(*s))
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0f64, |a, s| a.max(*s))
}

fn check_parts(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.nrows(),
        });
    }
    let scale = 1.0 + op_norm(a) + op_norm(b);
    if (a - a.transpose()).amax() > 1e-12 * scale || (b + b.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Invalid("need symmetric A and antisymmetric B".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct DefiniteReport {
    /// `C = λ_min(A)`.
    pub c: f64,
    /// Measured `‖G⁻¹‖`.
    pub inverse_norm: f64,
    /// `1/C`.
    pub bound: f64,
    pub pass: bool,
}

/// `G = A + B` with `A ≥ C > 0`: `⟨Gξ, ξ⟩ = ⟨Aξ, ξ⟩` forces `‖G⁻¹‖ ≤ 1/C`.
///
/// `B` is the antisymmetric matrix of `G`, i.e. already doubled from the bivector.
pub fn invertibility_definite(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DefiniteReport> {
    check_parts(a, b)?;
    let c = a.clone().symmetric_eigen().eigenvalues.min();
    if !(c > 0.0) {
        return Err(Error::Precondition(format!("A is not positive definite (lambda_min = {c:.3e})")));
    }
    let inverse_norm = 1.0 / sigma_min(&(a + b));
    let bound = 1.0 / c;
    Ok(DefiniteReport {
        c,
        inverse_norm,
        bound,
        pass: inverse_norm <= bound * (1.0 + 1e-12),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    /// `dim ker A`.
    pub kernel_dim: usize,
    /// `λ_min` of `A` on `(ker A)^⊥`.
    pub c0: f64,
    /// `max |Π_E B Π_E|`; the criterion needs this to vanish.
    pub kernel_block: f64,
    pub applicable: bool,
    /// `σ_min` of `Π_F B` restricted to `E`.
    pub sigma_restricted: f64,
    /// `dim E ≤ dim F`, necessary for `Π_F B|_E` to be injective.
    pub dim_check: bool,
    pub injective: bool,
    /// `‖G⁻¹‖` bound when injective.
    pub bound: Option<f64>,
    pub inverse_norm: Option<f64>,
    /// Orthonormal basis of `E = ker A`, one column per kernel direction.
    #[serde(skip)]
    pub kernel_basis: DMatrix<f64>,
}

/// Kernel splitting: with `E = ker A`, `F = E^⊥` and `Π_E B Π_E = 0`, `G` is injective
/// exactly when `B` restricted to `E` (landing in `F`) is.
///
/// With `K = ‖A‖ + ‖B‖`, `σ = σ_min(B|_E)` and `A ≥ C0` on `F`, solving `Gξ = η` gives
/// `C0|f|² ≤ |e| + |f|` and `σ|e| ≤ 1 + K|f|` for `|η| = 1`, hence
/// `|f| ≤ c_a = [(1 + K/σ) + √((1 + K/σ)² + 4C0/σ)]/(2C0)` and
/// `‖G⁻¹‖ ≤ c_a + (1 + K c_a)/σ`.
pub fn invertibility_split(a: &DMatrix<f64>, b: &DMatrix<f64>, threshold: f64) -> Result<SplitReport> {
    check_parts(a, b)?;
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let smax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = 1e-10 * smax.max(1e-300);
    let kernel: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i].abs() <= cut).collect();
    let range: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i].abs() > cut).collect();
    if range.iter().any(|&i| eig.eigenvalues[i] < 0.0) {
        return Err(Error::Precondition("A must be positive semi-definite".into()));
    }
    let e_basis = DMatrix::from_fn(n, kernel.len(), |r, c| eig.eigenvectors[(r, kernel[c])]);
    let f_basis = DMatrix::from_fn(n, range.len(), |r, c| eig.eigenvectors[(r, range[c])]);
    let c0 = range.iter().map(|&i| eig.eigenvalues[i]).fold(f64::INFINITY, f64::min);
    let kernel_block = if kernel.is_empty() {
        0.0
    } else {
        (e_basis.transpose() * b * &e_basis).amax()
    };
    let scale = 1.0 + op_norm(a) + op_norm(b);
    let applicable = kernel_block <= 1e-10 * scale;
    let dim_check = kernel.len() <= range.len();
    let restricted = f_basis.transpose() * b * &e_basis;
    let sigma_restricted = if kernel.is_empty() {
        f64::INFINITY
    } else if range.is_empty() {
        0.0
    } else {
        sigma_min(&restricted)
    };
    let injective = applicable && dim_check && sigma_restricted > threshold;
    let (bound, inverse_norm) = if injective {
        let inv = 1.0 / sigma_min(&(a + b));
        let bound = if kernel.is_empty() {
            1.0 / c0
        } else {
            let k = op_norm(a) + op_norm(b);
            let s = sigma_restricted;
            let p = 1.0 + k / s;
            let ca = (p + (p * p + 4.0 * c0 / s).sqrt()) / (2.0 * c0);
            ca + (1.0 + k * ca) / s
        };
        (Some(bound), Some(inv))
    } else {
        (None, None)
    };
    Ok(SplitReport {
        kernel_dim: kernel.len(),
        c0,
        kernel_block,
        applicable,
        sigma_restricted,
        dim_check,
        injective,
        bound,
        inverse_norm,
        kernel_basis: e_basis,
    })
}

/// Sine of the largest principal angle between the kernels of two samples, or
/// `None` when their dimensions differ.
pub fn kernel_angle(a: &SplitReport, b: &SplitReport) -> Option<f64> {
    let (ea, eb) = (&a.kernel_basis, &b.kernel_basis);
    if ea.ncols() != eb.ncols() {
        return None;
    }
    if ea.ncols() == 0 {
        return Some(0.0);
    }
    // ‖(I − P_a) E_b‖ is the sine of the largest principal angle
    let resid = eb - ea * (ea.transpose() * eb);
    Some(op_norm(&resid).min(1.0))
}

/// Invertibility of `G(x; h)` at one point, by the split criterion.
#[derive(Debug, Clone, Serialize)]
pub struct InvertibilitySample {
    pub point: Vec<f64>,
    pub h: f64,
    pub report: SplitReport,
}

/// Runs the split criterion on `G` at each point; `A` and `B` come from the structure.
pub fn sample_invertibility(s: &SusyStructure, points: &[Vec<f64>], h: f64) -> Result<Vec<InvertibilitySample>> {
    let n = s.n;
    points
        .iter()
        .map(|x| {
            let a = s.a_jets(x, h, 0)?;
            let b = s.b_jets(x, h, 0)?;
            let am = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[i * n + j].value() + a[j * n + i].value()));
            let bm = DMatrix::from_fn(n, n, |i, j| 2.0 * b[i * n + j].value());
            Ok(InvertibilitySample {
                point: x.clone(),
                h,
                report: invertibility_split(&am, &bm, 1e-10)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kramers_block() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
        let r = invertibility_split(&a, &b, 1e-10).unwrap();
        assert!(r.injective && r.applicable);
        assert_eq!(r.kernel_dim, 1);
        assert!(r.inverse_norm.unwrap() <= r.bound.unwrap());
    }

    #[test]
    fn kernel_angle_of_rotated_kernel() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
        let a0 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let r0 = invertibility_split(&a0, &b, 1e-10).unwrap();
        assert_eq!(kernel_angle(&r0, &r0), Some(0.0));
        // A = v vᵀ with v at angle 0.3 from e2 rotates the kernel by 0.3
        let (s, c) = (0.3f64.sin(), 0.3f64.cos());
        let a1 = DMatrix::from_row_slice(2, 2, &[s * s, s * c, s * c, c * c]);
        let r1 = invertibility_split(&a1, &b, 1e-10).unwrap();
        assert!((kernel_angle(&r0, &r1).unwrap() - s).abs() < 1e-12);
        let r2 = invertibility_split(&DMatrix::identity(2, 2), &b, 1e-10).unwrap();
        assert_eq!(kernel_angle(&r0, &r2), None);
    }

    #[test]
    fn zero_b_is_not_injective() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let b = DMatrix::zeros(2, 2);
        assert!(!invertibility_split(&a, &b, 1e-10).unwrap().injective);
    }

    #[test]
    fn definite_bound() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        let r = invertibility_definite(&a, &b).unwrap();
        assert!(r.pass);
    }
}
