use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;

use super::partition::{ComponentChart, PhiSamples, ProfileFit};
use super::stream::Field2;

/// One equal-level pair and the `⋆U` integral along the connecting path.
#[derive(Debug, Clone, Serialize)]
pub struct GluePair {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub level: f64,
    pub components: (Option<usize>, Option<usize>),
    /// `∫_γ ⋆U`, which equals `α(y) − α(x)`.
    pub star_integral: f64,
    /// `f_j(φ(y)) − f_i(φ(x))` from the per-component fits, when both are known.
    pub fit_difference: Option<f64>,
    pub mismatch: f64,
    pub pass: bool,
}

/// One-sided polynomial limits of two profiles at a saddle value.
#[derive(Debug, Clone, Serialize)]
pub struct SaddleMatch {
    pub saddle_value: f64,
    pub components: (usize, usize),
    /// Gaps in value, first and second derivative at the saddle value.
    pub gaps: [f64; 3],
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlueReport {
    pub pairs: Vec<GluePair>,
    pub saddles: Vec<SaddleMatch>,
    /// Checks that could not be carried out (too few knots, failed projection).
    pub skipped: Vec<String>,
    pub tolerance: f64,
    pub max_mismatch: f64,
    pub pass: bool,
    /// The verdict rests on finitely many sampled pairs.
    pub sampled: bool,
}

pub const SMOOTHNESS_TOL: f64 = 1e-3;
const ONE_SIDED_DEGREE: usize = 4;
/// Width of the one-sided fitting windows next to a saddle value.
pub const SADDLE_WINDOW: f64 = 0.2;

/// Moves `p` along `∇φ` onto `{φ = level}`.
fn project_to_level(phi: &Expr, p: [f64; 2], level: f64) -> Result<Option<[f64; 2]>> {
    let mut p = p;
    for _ in 0..30 {
        let j = phi.eval_jet(&p, 0.0, 1)?;
        let r = j.value() - level;
        if r.abs() <= 1e-13 * (1.0 + level.abs()) {
            return Ok(Some(p));
        }
        let g2 = j.d1(0) * j.d1(0) + j.d1(1) * j.d1(1);
        if g2 < 1e-24 {
            return Ok(None);
        }
        p = [p[0] - r * j.d1(0) / g2, p[1] - r * j.d1(1) / g2];
    }
    let r = phi.eval_f64(&p, 0.0, None)? - level;
    Ok((r.abs() <= 1e-10 * (1.0 + level.abs())).then_some(p))
}

fn label_at(chart: &ComponentChart, p: [f64; 2]) -> Option<usize> {
    chart.grid.nearest(p).and_then(|k| chart.labels[k])
}

/// Equal-level pairs between every two components whose `φ` ranges overlap.
pub fn auto_pairs(
    phi: &Expr,
    chart: &ComponentChart,
    samples: &PhiSamples,
    fits: &[ProfileFit],
    skipped: &mut Vec<String>,
) -> Result<Vec<([f64; 2], [f64; 2])>> {
    let mut out = Vec::new();
    for (a, fa) in fits.iter().enumerate() {
        for fb in &fits[a + 1..] {
            let lo = fa.knots[0].max(fb.knots[0]);
            let hi = fa.knots[fa.knots.len() - 1].min(fb.knots[fb.knots.len() - 1]);
            if !(hi > lo) {
                continue;
            }
            for q in [0.25, 0.5, 0.75] {
                let level = lo + q * (hi - lo);
                let nearest = |c: usize| {
                    chart
                        .cells(c)
                        .min_by(|i, j| (samples.value[*i] - level).abs().total_cmp(&(samples.value[*j] - level).abs()))
                };
                let (Some(kx), Some(ky)) = (nearest(fa.component), nearest(fb.component)) else {
                    continue;
                };
                let px = project_to_level(phi, chart.grid.point_k(kx), level)?;
                let py = project_to_level(phi, chart.grid.point_k(ky), level)?;
                match (px, py) {
                    (Some(x), Some(y))
                        if label_at(chart, x) == Some(fa.component) && label_at(chart, y) == Some(fb.component) =>
                    {
                        out.push((x, y))
                    }
                    _ => skipped.push(format!(
                        "level {level:.6} between components {} and {}: projection failed",
                        fa.component, fb.component
                    )),
                }
            }
        }
    }
    Ok(out)
}

/// Least-squares polynomial in `u = (t − s)/w`; returns value, `f'` and `f''` at `s`.
fn one_sided_limits(knots: &[(f64, f64)], s: f64, w: f64) -> Option<[f64; 3]> {
    let d = ONE_SIDED_DEGREE;
    if knots.len() < 2 * (d + 1) {
        return None;
    }
    let m = DMatrix::from_fn(knots.len(), d + 1, |r, c| ((knots[r].0 - s) / w).powi(c as i32));
    let b = DVector::from_iterator(knots.len(), knots.iter().map(|k| k.1));
    let c = m.svd(true, true).solve(&b, 1e-13).ok()?;
    Some([c[0], c[1] / w, 2.0 * c[2] / (w * w)])
}

/// Compares one-sided fits of the profiles bordering each saddle level.
pub fn saddle_smoothness(
    chart: &ComponentChart,
    fits: &[ProfileFit],
    critical_values: &[f64],
    skipped: &mut Vec<String>,
) -> Vec<SaddleMatch> {
    let mut out = Vec::new();
    for (si, &s) in chart.saddle_values.iter().enumerate() {
        let gap = critical_values
            .iter()
            .filter(|v| (*v - s).abs() > 1e-9 * (1.0 + s.abs()))
            .fold(f64::INFINITY, |m, v| m.min((v - s).abs()));
        let w = SADDLE_WINDOW.min(0.5 * gap);
        let mut limits: Vec<(usize, [f64; 3])> = Vec::new();
        for &(c, sj, above) in &chart.adjacency {
            if sj != si {
                continue;
            }
            let Some(fit) = fits.iter().find(|f| f.component == c) else { continue };
            let knots: Vec<(f64, f64)> = fit
                .knots
                .iter()
                .zip(&fit.values)
                .filter(|(t, _)| if above { **t > s && **t <= s + w } else { **t < s && **t >= s - w })
                .map(|(t, v)| (*t, *v))
                .collect();
            match one_sided_limits(&knots, s, w) {
                Some(l) => limits.push((c, l)),
                None => skipped.push(format!("saddle {s:.6}: component {c} has too few knots near the level")),
            }
        }
        for pair in limits.windows(2) {
            let ((c0, l0), (c1, l1)) = (pair[0], pair[1]);
            let gaps = [(l0[0] - l1[0]).abs(), (l0[1] - l1[1]).abs(), (l0[2] - l1[2]).abs()];
            out.push(SaddleMatch {
                saddle_value: s,
                components: (c0, c1),
                gaps,
                pass: gaps.iter().all(|g| *g <= SMOOTHNESS_TOL),
            });
        }
    }
    out
}

/// Tests whether one profile serves every component: equal-level pairs must have
/// `∫_γ ⋆U = 0` and the profiles must match smoothly across the saddle levels.
#[allow(clippy::too_many_arguments)]
pub fn glue_check(
    phi: &Expr,
    field: &Field2,
    chart: &ComponentChart,
    samples: &PhiSamples,
    fits: &[ProfileFit],
    critical_values: &[f64],
    user_pairs: &[([f64; 2], [f64; 2])],
    alpha_range: f64,
    glue_tol: f64,
) -> Result<GlueReport> {
    let mut skipped = Vec::new();
    let mut pairs = user_pairs.to_vec();
    let inside = |p: [f64; 2]| (0..2).all(|a| p[a] >= chart.grid.lo[a] && p[a] <= chart.grid.hi[a]);
    for (x, y) in &pairs {
        if !inside(*x) || !inside(*y) {
            return Err(Error::Invalid(format!("glue path from {x:?} to {y:?} leaves the grid")));
        }
        let (px, py) = (phi.eval_f64(x, 0.0, None)?, phi.eval_f64(y, 0.0, None)?);
        if (px - py).abs() > 1e-8 * (1.0 + px.abs()) {
            return Err(Error::Invalid(format!("glue pair has phi(x) = {px} but phi(y) = {py}")));
        }
    }
    pairs.extend(auto_pairs(phi, chart, samples, fits, &mut skipped)?);
    let tol = glue_tol * (1.0 + alpha_range);
    let piece = 4.0 * chart.grid.dx().max(chart.grid.dy());
    let mut out = Vec::with_capacity(pairs.len());
    let mut max_mismatch = 0.0f64;
    for (x, y) in pairs {
        let path = [x, [y[0], x[1]], y];
        let integral = field.star_integral_path(&path, piece)?;
        let level = phi.eval_f64(&x, 0.0, None)?;
        let comps = (label_at(chart, x), label_at(chart, y));
        let fit_of = |c: Option<usize>| c.and_then(|c| fits.iter().find(|f| f.component == c));
        let fit_difference = match (fit_of(comps.0), fit_of(comps.1)) {
            (Some(a), Some(b)) => Some(b.eval(level) - a.eval(level)),
            _ => None,
        };
        let mismatch = integral.abs();
        max_mismatch = max_mismatch.max(mismatch);
        out.push(GluePair {
            x,
            y,
            level,
            components: comps,
            star_integral: integral,
            fit_difference,
            mismatch,
            pass: mismatch <= tol,
        });
    }
    let saddles = saddle_smoothness(chart, fits, critical_values, &mut skipped);
    let pass = out.iter().all(|p| p.pass) && saddles.iter().all(|s| s.pass);
    Ok(GlueReport {
        pairs: out,
        saddles,
        skipped,
        tolerance: tol,
        max_mismatch,
        pass,
        sampled: true,
    })
}
