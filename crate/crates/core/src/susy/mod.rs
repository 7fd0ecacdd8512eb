//! Construction of `G = A + B` and the checks around it.

mod corrector;
mod decomp;
mod perturbation;
mod structure;

pub use corrector::{classical_expansion, construct_b, profile_integrals};
pub use decomp::{check_assumption, check_growth, fit_constant_theta, AssumptionReport, GrowthReport};
pub use perturbation::{build_perturbation_gallery, PerturbationConfig, PerturbationGallery};
pub use structure::{tensorize, tensorize_operators, SusyStructure};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// What to do when `φ̂(x)` exceeds a finite `m∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Outside {
    /// Report an error (the point is outside the validity region).
    #[default]
    Error,
    /// Treat the corrector as zero there; appropriate when a cutoff vanishes beyond `m∞`.
    Zero,
}

/// One term `α(φ̂) θ` of a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    /// Profile in the t-context.
    pub alpha: Expr,
    /// Antisymmetric `n × n` matrix of x-context expressions, row major.
    pub theta: Vec<Expr>,
    pub n: usize,
}

impl Term {
    /// Builds a term from a full matrix; the lower triangle is replaced by the
    /// negated upper triangle after checking antisymmetry at a few probe points.
    pub fn new(alpha: Expr, m: Vec<Vec<Expr>>) -> Result<Self> {
        let n = m.len();
        if m.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("theta must be a square matrix".into()));
        }
        if alpha.var_count() > 0 {
            return Err(Error::Invalid("alpha may only use t and h".into()));
        }
        let probes: Vec<Vec<f64>> = (0..4)
            .map(|k| (0..n).map(|i| ((k * 7 + i * 3) as f64 * 0.37).sin()).collect())
            .collect();
        for p in &probes {
            for i in 0..n {
                for j in i..n {
                    let a = m[i][j].eval_f64(p, 0.1, None);
                    let b = m[j][i].eval_f64(p, 0.1, None);
                    if let (Ok(a), Ok(b)) = (a, b) {
                        if (a + b).abs() > 1e-12 * (1.0 + a.abs()) {
                            return Err(Error::Invalid(format!("theta is not antisymmetric at entry ({}, {})", i + 1, j + 1)));
                        }
                    }
                }
            }
        }
        let mut theta = vec![Expr::num(0.0); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                theta[i * n + j] = m[i][j].clone();
                theta[j * n + i] = Expr::neg(m[i][j].clone());
            }
        }
        Ok(Term { alpha, theta, n })
    }

    /// Constant θ given by its full matrix.
    pub fn constant(alpha: Expr, m: &[f64], n: usize) -> Result<Self> {
        let rows = (0..n).map(|i| (0..n).map(|j| Expr::num(m[i * n + j])).collect()).collect();
        Term::new(alpha, rows)
    }

    /// Pads θ into an `n × n` matrix at block offset `offset`, shifting variables.
    pub fn embed(&self, n: usize, offset: usize) -> Term {
        let mut theta = vec![Expr::num(0.0); n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                theta[(i + offset) * n + j + offset] = self.theta[i * self.n + j].shift_vars(offset);
            }
        }
        Term {
            alpha: self.alpha.clone(),
            theta,
            n,
        }
    }
}

/// A decomposition `U + d(φ−ψ)⌟A = δ(χ Σ_k (α_k ∘ φ̂) θ_k)` with `φ̂ = φ + ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaDecomposition {
    pub n: usize,
    pub terms: Vec<Term>,
    /// Growth order `N`: `α_k^{(j)}(t) = O(⟨t⟩^N)`.
    pub growth_order: u32,
    /// `+∞` or a finite upper bound for `φ̂`.
    pub m_inf: f64,
    /// Optional cutoff `χ(x)` multiplying every term.
    pub cutoff: Option<Expr>,
    pub outside: Outside,
}

impl ThetaDecomposition {
    pub fn new(n: usize, terms: Vec<Term>, growth_order: u32, m_inf: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("a decomposition needs at least one term".into()));
        }
        for t in &terms {
            crate::error::check_dim(n, t.n)?;
        }
        if m_inf.is_nan() {
            return Err(Error::Invalid("m_infinity must be a number or inf".into()));
        }
        Ok(ThetaDecomposition {
            n,
            terms,
            growth_order,
            m_inf,
            cutoff: None,
            outside: Outside::Error,
        })
    }

    /// The single-term decomposition with `α = 0`.
    pub fn trivial(n: usize) -> Self {
        ThetaDecomposition {
            n,
            terms: vec![Term {
                alpha: Expr::num(0.0),
                theta: vec![Expr::num(0.0); n * n],
                n,
            }],
            growth_order: 0,
            m_inf: f64::INFINITY,
            cutoff: None,
            outside: Outside::Error,
        }
    }

    pub fn with_cutoff(mut self, cutoff: Expr, outside: Outside) -> Self {
        self.cutoff = Some(cutoff);
        self.outside = outside;
        self
    }
}

/// The corrector data attached to one phase sum `φ̂`; structures carry one per
/// tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorPart {
    pub terms: Vec<Term>,
    pub phi_hat: Expr,
    pub m_inf: f64,
    pub outside: Outside,
    pub cutoff: Option<Expr>,
}

impl CorrectorPart {
    pub fn from_decomposition(dec: &ThetaDecomposition, phi_hat: Expr) -> Self {
        CorrectorPart {
            terms: dec.terms.clone(),
            phi_hat,
            m_inf: dec.m_inf,
            outside: dec.outside,
            cutoff: dec.cutoff.clone(),
        }
    }

    pub fn embed(&self, n: usize, offset: usize) -> CorrectorPart {
        CorrectorPart {
            terms: self.terms.iter().map(|t| t.embed(n, offset)).collect(),
            phi_hat: self.phi_hat.shift_vars(offset),
            m_inf: self.m_inf,
            outside: self.outside,
            cutoff: self.cutoff.as_ref().map(|c| c.shift_vars(offset)),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.iter().all(|t| t.alpha.is_zero() || t.theta.iter().all(Expr::is_zero))
    }
}
