use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::susy::SusyStructure;

/// Largest accepted ratio `max_h C_ν(h) / min_h C_ν(h)`.
pub const UNIFORMITY_LIMIT: f64 = 2.0;

/// Fitted constant `C_ν(h) = max_x ‖∂^ν G(x; h)‖ / ⟨x⟩^m` for one multi-index.
#[derive(Debug, Clone, Serialize)]
pub struct NuConstants {
    /// Multi-index as a list of differentiated axes (0-based, sorted).
    pub nu: Vec<usize>,
    /// Growth order `m_ν` in `‖∂^ν G‖ ≤ C_ν ⟨x⟩^{m_ν}`.
    pub slope: f64,
    pub constants: Vec<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TemperatenessReport {
    /// Largest fitted growth order over all `ν`.
    pub order: f64,
    pub hs: Vec<f64>,
    pub per_nu: Vec<NuConstants>,
    pub max_ratio: f64,
    pub pass: bool,
}

fn japanese(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Multi-indices with `|ν| ≤ 2`.
fn multi_indices(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..n {
        out.push(vec![i]);
    }
    for i in 0..n {
        for j in i..n {
            out.push(vec![i, j]);
        }
    }
    out
}

/// Frobenius norms of `∂^ν G` for every `ν`, at one point.
fn derivative_norms(s: &SusyStructure, x: &[f64], h: f64, nus: &[Vec<usize>]) -> Result<Vec<f64>> {
    let g = s.g_jets(x, h, 2)?;
    Ok(nus
        .iter()
        .map(|nu| {
            g.iter()
                .map(|e| match nu.as_slice() {
                    [] => e.value(),
                    [i] => e.d1(*i),
                    [i, j] => e.d2(*i, *j),
                    _ => unreachable!(),
                })
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

/// Least-squares slope of `log y` against `log ⟨x⟩`, ignoring near-zero samples.
fn log_slope(rho: &[f64], y: &[f64], floor: f64) -> f64 {
    let pts: Vec<(f64, f64)> = rho
        .iter()
        .zip(y)
        .filter(|(_, v)| **v > floor)
        .map(|(r, v)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx < 1e-14 {
        return 0.0;
    }
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx
}

/// Estimates the order `m` and the constants `C_ν(h)` of the temperate bound
/// `‖∂^ν G(x; h)‖ ≤ C_ν ⟨x⟩^m` for `|ν| ≤ 2`, and checks their uniformity in `h`.
pub fn temperateness(s: &SusyStructure, points: &[Vec<f64>], hs: &[f64]) -> Result<TemperatenessReport> {
    if points.is_empty() || hs.is_empty() {
        return Err(Error::Invalid("temperateness needs sample points and h values".into()));
    }
    let nus = multi_indices(s.n);
    let rho: Vec<f64> = points.iter().map(|x| japanese(x)).collect();
    // norms[h][point][ν]
    let norms: Vec<Vec<Vec<f64>>> = hs
        .iter()
        .map(|&h| {
            points
                .par_iter()
                .map(|x| derivative_norms(s, x, h, &nus))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let scale = norms
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(*v))
        .max(1e-300);
    let floor = 1e-10 * scale;
    let mut order_idx: Vec<usize> = (0..rho.len()).collect();
    order_idx.sort_by(|a, b| rho[*a].total_cmp(&rho[*b]));
    let sorted_rho: Vec<f64> = order_idx.iter().map(|i| rho[*i]).collect();
    let mut slopes = Vec::with_capacity(nus.len());
    for k in 0..nus.len() {
        // growth at infinity: fit the running maximum (over x and h) on the outer half
        let mut m = 0.0f64;
        let env: Vec<f64> = order_idx
            .iter()
            .map(|i| {
                m = norms.iter().fold(m, |m, per_h| m.max(per_h[*i][k]));
                m
            })
            .collect();
        let half = sorted_rho.len() / 2;
        slopes.push(log_slope(&sorted_rho[half..], &env[half..], floor));
    }
    let order = slopes.iter().fold(0.0f64, |m, s| m.max(*s));
    let mut per_nu = Vec::with_capacity(nus.len());
    let mut max_ratio = 1.0f64;
    for (k, nu) in nus.iter().enumerate() {
        let constants: Vec<f64> = norms
            .iter()
            .map(|per_h| {
                per_h
                    .iter()
                    .zip(&rho)
                    .map(|(v, r)| v[k] / r.powf(slopes[k]))
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let hi = constants.iter().fold(0.0f64, |m, c| m.max(*c));
        let lo = constants.iter().fold(f64::INFINITY, |m, c| m.min(*c));
        // a derivative that vanishes for some h counts as zero throughout
        let ratio = if hi <= floor {
            1.0
        } else if lo <= floor {
            f64::INFINITY
        } else {
            hi / lo
        };
        max_ratio = max_ratio.max(ratio);
        per_nu.push(NuConstants {
            nu: nu.clone(),
            slope: slopes[k],
            constants,
            ratio,
        });
    }
    Ok(TemperatenessReport {
        order,
        hs: hs.to_vec(),
        per_nu,
        max_ratio,
        pass: max_ratio <= UNIFORMITY_LIMIT,
    })
}
