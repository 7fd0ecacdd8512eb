//! Planar Morse analysis of first-order parts: for divergence-free `U` with
//! `U(dφ) = 0`, recover the stream potential `α` (`U = ∂2α dx1 − ∂1α dx2`), test
//! `α = f_j∘φ` on each component of the plane minus the saddle levels, and test
//! whether the `f_j` glue into one profile.
//!
//! Convention: `⋆(u1 dx1 + u2 dx2) = −u2 dx1 + u1 dx2`, so `α(y) − α(x) = ∫_γ ⋆U`.

mod critical;
mod glue;
mod partition;
mod stream;

pub use critical::{find_critical_points, CriticalPoint, CriticalSet};
pub use glue::{glue_check, GluePair, GlueReport, SaddleMatch, SMOOTHNESS_TOL};
pub use partition::{component_partition, default_margin, fit_profile, sample_phi, ComponentChart, PhiSamples, ProfileFit, MIN_BIN};
pub use stream::{recover_stream, Field2, StreamField};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::Grid2;

/// `U = ∂2α dx1 − ∂1α dx2` for a given stream potential.
pub fn field_from_potential(alpha: &Expr) -> [Expr; 2] {
    [alpha.diff_x(1), Expr::neg(alpha.diff_x(0))]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Morse2dConfig {
    pub bounds: [[f64; 2]; 2],
    pub grid_points: usize,
    pub saddle_margin: Option<f64>,
    pub fit_tol: f64,
    pub glue_tol: f64,
    /// Divergence tolerance for the stream recovery.
    pub stream_tol: f64,
    pub pairs: Vec<([f64; 2], [f64; 2])>,
    pub newton_seeds: usize,
    pub loops: usize,
    pub seed: u64,
}

impl Default for Morse2dConfig {
    fn default() -> Self {
        Morse2dConfig {
            bounds: [[-2.5, 2.5], [-2.5, 2.5]],
            grid_points: 201,
            saddle_margin: None,
            fit_tol: 1e-4,
            glue_tol: 1e-4,
            stream_tol: 1e-9,
            pairs: Vec::new(),
            newton_seeds: 12,
            loops: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StreamSummary {
    pub max_divergence: f64,
    pub loop_defect: f64,
    pub alpha_range: f64,
    /// `max |U(dφ)|` over the grid; informational.
    pub max_annihilation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Morse2dReport {
    pub grid: Grid2,
    pub critical: CriticalSet,
    pub stream: StreamSummary,
    pub chart: ComponentChart,
    pub fits: Vec<ProfileFit>,
    /// Components too small to bin.
    pub skipped_components: Vec<usize>,
    pub per_component_pass: bool,
    pub glue: GlueReport,
    pub global_pass: bool,
}

/// find critical points, recover α, partition, fit per component, glue.
pub fn run_morse2d(phi: &Expr, field: &Field2, cfg: &Morse2dConfig) -> Result<Morse2dReport> {
    if phi.var_count() > 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: phi.var_count(),
        });
    }
    let [bx, by] = cfg.bounds;
    let grid = Grid2::new([bx[0], by[0]], [bx[1], by[1]], cfg.grid_points, cfg.grid_points)?;
    let critical = find_critical_points(phi, cfg.bounds, cfg.newton_seeds)?;
    let stream = recover_stream(field, &grid, cfg.stream_tol, cfg.loops, cfg.seed)?;
    let samples = sample_phi(phi, &grid)?;
    let chart = component_partition(&critical, &grid, &samples, cfg.saddle_margin)?;

    let (amin, amax) = stream
        .alpha
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |m, a| (m.0.min(*a), m.1.max(*a)));
    let mut max_annihilation = 0.0f64;
    for k in (0..grid.len()).step_by(7) {
        let p = grid.point_k(k);
        let u = field.eval(p)?;
        let j = phi.eval_jet(&p, 0.0, 1)?;
        max_annihilation = max_annihilation.max((u[0] * j.d1(0) + u[1] * j.d1(1)).abs());
    }

    let mut fits = Vec::new();
    let mut skipped_components = Vec::new();
    for c in 0..chart.count {
        if chart.sizes[c] < 2 * MIN_BIN {
            skipped_components.push(c);
            continue;
        }
        fits.push(fit_profile(&stream.alpha, &samples, &chart, c, cfg.fit_tol)?);
    }
    let per_component_pass = !fits.is_empty() && fits.iter().all(|f| f.pass);
    let critical_values: Vec<f64> = critical.points.iter().map(|p| p.value).collect();
    let glue = glue_check(
        phi,
        field,
        &chart,
        &samples,
        &fits,
        &critical_values,
        &cfg.pairs,
        amax - amin,
        cfg.glue_tol,
    )?;
    let global_pass = per_component_pass && glue.pass;
    Ok(Morse2dReport {
        grid,
        critical,
        stream: StreamSummary {
            max_divergence: stream.max_divergence,
            loop_defect: stream.loop_defect,
            alpha_range: amax - amin,
            max_annihilation,
        },
        chart,
        fits,
        skipped_components,
        per_component_pass,
        glue,
        global_pass,
    })
}

/// Least-squares polynomial `f(t)` of the given degree through the knots of all
/// fits, as a t-context expression.
pub fn polynomial_profile(fits: &[ProfileFit], degree: usize) -> Result<Expr> {
    let knots: Vec<(f64, f64)> = fits
        .iter()
        .flat_map(|f| f.knots.iter().copied().zip(f.values.iter().copied()))
        .collect();
    if knots.len() <= degree {
        return Err(Error::Precondition(format!(
            "{} knots cannot determine a degree {degree} polynomial",
            knots.len()
        )));
    }
    let (lo, hi) = knots.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |m, k| (m.0.min(k.0), m.1.max(k.0)));
    let (c, w) = (0.5 * (lo + hi), (0.5 * (hi - lo)).max(1e-12));
    let m = DMatrix::from_fn(knots.len(), degree + 1, |r, j| ((knots[r].0 - c) / w).powi(j as i32));
    let b = DVector::from_iterator(knots.len(), knots.iter().map(|k| k.1));
    let coef = m
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("profile fit failed: {e}")))?;
    // expand Σ c_j ((t − c)/w)^j into monomials in t
    let mut mono = vec![0.0; degree + 1];
    for (j, cj) in coef.iter().enumerate() {
        let mut binom = 1.0;
        for i in 0..=j {
            // coefficient of t^i in (t − c)^j
            mono[i] += cj / w.powi(j as i32) * binom * (-c).powi((j - i) as i32);
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
    }
    Ok(Expr::sum(
        mono.iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| Expr::mul(Expr::num(*c), Expr::pow(Expr::t(), i as f64))),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};

    fn x(s: &str) -> Expr {
        parse(s, Context::X { n: 2 }).unwrap()
    }

    #[test]
    fn partition_double_well() {
        let phi = x("(x1^2-1)^2 + x2^2");
        let grid = Grid2::new([-2.0, -2.0], [2.0, 2.0], 81, 81).unwrap();
        let crit = find_critical_points(&phi, [[-2.0, 2.0], [-2.0, 2.0]], 8).unwrap();
        let s = sample_phi(&phi, &grid).unwrap();
        let chart = component_partition(&crit, &grid, &s, Some(0.05)).unwrap();
        assert_eq!(chart.count, 3);
        assert!(chart.unbounded.is_some());
        assert!(component_partition(&crit, &grid, &s, Some(10.0)).is_err());
    }

    #[test]
    fn non_profile_fails_fit() {
        let phi = x("x1^2 + x2^2");
        let f = Field2 {
            u: field_from_potential(&x("x2")),
            h: 0.1,
        };
        let cfg = Morse2dConfig {
            bounds: [[-1.0, 1.0], [-1.0, 1.0]],
            grid_points: 61,
            ..Morse2dConfig::default()
        };
        let r = run_morse2d(&phi, &f, &cfg).unwrap();
        assert_eq!(r.chart.count, 1);
        assert!(!r.per_component_pass);
    }

    #[test]
    fn profile_of_single_well() {
        let phi = x("x1^2 + x2^2");
        let f = Field2 {
            u: field_from_potential(&x("(x1^2 + x2^2)^2")),
            h: 0.1,
        };
        let cfg = Morse2dConfig {
            bounds: [[-1.0, 1.0], [-1.0, 1.0]],
            grid_points: 101,
            ..Morse2dConfig::default()
        };
        let r = run_morse2d(&phi, &f, &cfg).unwrap();
        assert!(r.global_pass, "{:?}", r.fits[0].deviation);
        // anchor: α(-1,-1) = 0, φ there is 2
        let fit = &r.fits[0];
        for (t, v) in fit.knots.iter().zip(&fit.values) {
            assert!((v - (t * t - 4.0)).abs() < 1e-5, "{t} {v} {}", v - (t * t - 4.0));
        }
        let p = polynomial_profile(&r.fits, 2).unwrap();
        assert!((p.eval_f64(&[], 0.0, Some(0.5)).unwrap() - (0.25 - 4.0)).abs() < 1e-5);
    }

    #[test]
    fn zero_field_is_globally_fine() {
        let phi = x("(x1^2-1)^2 + x2^2");
        let f = Field2 {
            u: [Expr::num(0.0), Expr::num(0.0)],
            h: 0.1,
        };
        let cfg = Morse2dConfig {
            bounds: [[-2.0, 2.0], [-1.5, 1.5]],
            grid_points: 101,
            ..Morse2dConfig::default()
        };
        let r = run_morse2d(&phi, &f, &cfg).unwrap();
        assert!(r.global_pass);
    }
}
