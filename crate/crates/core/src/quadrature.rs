//! Gauss–Legendre rules and an adaptive integrator for `∫₀^L f(s) e^{−s} ds`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 { 1.0 } else if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule(m: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static R16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R24: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match m {
        16 => R16.get_or_init(|| gauss_legendre(16)),
        24 => R24.get_or_init(|| gauss_legendre(24)),
        _ => unreachable!("only the 16 and 24 point rules are cached"),
    }
}

/// `∫_a^b f` with the `m`-point rule.
pub fn integrate(a: f64, b: f64, m: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(m);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Truncation of the half line.
    pub max_s: f64,
    /// Width of the first geometric panel.
    pub first_panel: f64,
    /// Growth ratio of successive panels.
    pub ratio: f64,
    /// Absolute tolerance on the whole integral, relative to `1 + |I|`.
    pub tol: f64,
    /// Maximum bisection depth of a panel.
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            max_s: 50.0,
            first_panel: 0.5,
            ratio: 1.5,
            tol: 1e-12,
            max_depth: 12,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_s < 40.0 || self.tol > 1e-10 || self.tol <= 0.0 {
            return Err(Error::Invalid(format!(
                "quadrature needs max_s >= 40 and 0 < tol <= 1e-10 (got {}, {})",
                self.max_s, self.tol
            )));
        }
        Ok(())
    }

    fn panels(&self, upper: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let (mut a, mut w) = (0.0, self.first_panel);
        while a < upper {
            let b = (a + w).min(upper);
            // avoid a sliver at the end
            let b = if upper - b < 0.25 * w { upper } else { b };
            out.push((a, b));
            a = b;
            w *= self.ratio;
        }
        out
    }
}

/// Vector-valued `∫₀^{min(L, max_s)} f(s) e^{−s} ds`.
///
/// `f` writes its components into the provided slice. Returns the integral and
/// an error estimate (max over components).
pub fn integrate_exp_weighted(
    upper: f64,
    dim: usize,
    cfg: &QuadratureConfig,
    mut f: impl FnMut(f64, &mut [f64]) -> Result<()>,
) -> Result<(Vec<f64>, f64)> {
    let mut total = vec![0.0; dim];
    let upper = upper.min(cfg.max_s);
    if upper <= 0.0 {
        return Ok((total, 0.0));
    }
    let panels = cfg.panels(upper);
    let budget = cfg.tol / panels.len() as f64;
    let mut est = 0.0;
    let mut buf = vec![0.0; dim];
    let mut stack: Vec<(f64, f64, u32)> = panels.into_iter().rev().map(|(a, b)| (a, b, 0)).collect();
    while let Some((a, b, depth)) = stack.pop() {
        let mut q = [vec![0.0; dim], vec![0.0; dim]];
        for (slot, m) in [16usize, 24].into_iter().enumerate() {
            let (x, w) = rule(m);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (xi, wi) in x.iter().zip(w) {
                let s = mid + half * xi;
                f(s, &mut buf)?;
                let wt = half * wi * (-s).exp();
                for (acc, v) in q[slot].iter_mut().zip(&buf) {
                    *acc += wt * v;
                }
            }
        }
        let err = q[0].iter().zip(&q[1]).map(|(p, r)| (p - r).abs()).fold(0.0, f64::max);
        let scale = 1.0 + q[1].iter().map(|v| v.abs()).fold(0.0, f64::max);
        let local_budget = budget * 0.5f64.powi(depth as i32);
        if err <= local_budget * scale || depth >= cfg.max_depth {
            if !err.is_finite() {
                return Err(Error::Quadrature {
                    tol: cfg.tol,
                    estimate: err,
                });
            }
            for (t, v) in total.iter_mut().zip(&q[1]) {
                *t += v;
            }
            est += err;
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    let scale = 1.0 + total.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if est > cfg.tol * scale {
        return Err(Error::Quadrature {
            tol: cfg.tol,
            estimate: est,
        });
    }
    Ok((total, est))
}
