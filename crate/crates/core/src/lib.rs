//! Supersymmetric factorization of second order semiclassical operators.
//!
//! Given `P = hδ∘A∘hd + U∘hd + v` on ℝⁿ together with phases `φ, ψ` and a
//! decomposition of `U + d(φ−ψ)⌟A` as a codifferential of profile-weighted
//! bivector fields, this crate builds `G = A + B` with
//! `P = d^{G,*}_{ψ,h} d_{φ,h}` and checks every ingredient numerically.
//!
//! Conventions used throughout:
//! - `wedge(u, v)_ij = (u_i v_j − u_j v_i)/2` and `(ξ⌟W)_i = 2 Σ_j ξ_j W_ji`,
//!   so `ξ⌟(u∧v) = (ξ·u)v − (ξ·v)u`;
//! - a bivector `W` acts on covectors as the matrix `2W`;
//! - `δV = −div V` on vector fields and `(δW)_i = −2 Σ_j ∂_j W_ji` on bivector fields.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod grid;
pub mod jets;
pub mod morse2d;
pub mod multilinear;
pub mod operator;
pub mod quadrature;
pub mod susy;

pub use error::{Error, JetError, Result};
pub use expr::{Context, Expr, FieldBundle};
pub use jets::{Jet, Taylor1};
pub use multilinear::{Bivector, Covector, SymMap, Vector};
pub use operator::OperatorSpec;
pub use susy::{SusyStructure, ThetaDecomposition};
