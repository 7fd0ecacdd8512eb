use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::Grid2;

use super::critical::CriticalSet;

/// Values and gradient norms of `φ` at every grid node.
#[derive(Debug, Clone)]
pub struct PhiSamples {
    pub value: Vec<f64>,
    pub grad_norm: Vec<f64>,
}

pub fn sample_phi(phi: &Expr, grid: &Grid2) -> Result<PhiSamples> {
    let vals: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let j = phi.eval_jet(&grid.point_k(k), 0.0, 1)?;
            Ok((j.value(), j.d1(0).hypot(j.d1(1))))
        })
        .collect::<Result<_>>()?;
    let (value, grad_norm) = vals.into_iter().unzip();
    Ok(PhiSamples { value, grad_norm })
}

/// Connected components of the grid cells away from the saddle levels.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentChart {
    pub grid: Grid2,
    #[serde(skip)]
    pub labels: Vec<Option<usize>>,
    pub count: usize,
    pub sizes: Vec<usize>,
    pub saddle_values: Vec<f64>,
    pub margin: f64,
    pub touches_boundary: Vec<bool>,
    /// The component touching the most boundary nodes.
    pub unbounded: Option<usize>,
    /// `(component, saddle index, above)`: the component borders the band around
    /// that saddle value, from above when `above` is true.
    pub adjacency: Vec<(usize, usize, bool)>,
}

impl ComponentChart {
    pub fn cells(&self, comp: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(move |(k, l)| (*l == Some(comp)).then_some(k))
    }
}

/// `5·δx·max‖∇φ‖` over nodes within `3δx` of a saddle point.
pub fn default_margin(crit: &CriticalSet, grid: &Grid2, samples: &PhiSamples) -> f64 {
    let d = grid.dx().max(grid.dy());
    let saddles: Vec<[f64; 2]> = crit.points.iter().filter(|p| p.index == 1).map(|p| p.location).collect();
    let mut g = 0.0f64;
    for k in 0..grid.len() {
        let p = grid.point_k(k);
        if saddles.iter().any(|s| (s[0] - p[0]).hypot(s[1] - p[1]) <= 3.0 * d) {
            g = g.max(samples.grad_norm[k]);
        }
    }
    5.0 * d * g
}

/// Flood-fill labeling of the nodes with `|φ − s| > margin` for every saddle value `s`.
///
/// Nodes within `1.5·δx·‖∇φ‖` of a saddle level are dropped as well, so that no
/// pair of neighbouring nodes straddles the level.
pub fn component_partition(
    crit: &CriticalSet,
    grid: &Grid2,
    samples: &PhiSamples,
    margin: Option<f64>,
) -> Result<ComponentChart> {
    let saddle_values = crit.saddle_values();
    let margin = margin.unwrap_or_else(|| default_margin(crit, grid, samples));
    if !(margin >= 0.0) {
        return Err(Error::Invalid(format!("saddle margin must be non-negative, got {margin}")));
    }
    let d = grid.dx().max(grid.dy());
    let keep = |k: usize| {
        let (v, g) = (samples.value[k], samples.grad_norm[k]);
        saddle_values
            .iter()
            .all(|s| (v - s).abs() > margin && (v - s).abs() > 1.5 * d * g)
    };
    let mask: Vec<bool> = (0..grid.len()).into_par_iter().map(keep).collect();
    for p in &crit.points {
        if p.index == 1 {
            continue;
        }
        if let Some(k) = grid.nearest(p.location) {
            if !mask[k] {
                return Err(Error::Invalid(format!(
                    "saddle margin {margin:.3e} removes the extremum at ({:.4}, {:.4}); use a smaller margin",
                    p.location[0], p.location[1]
                )));
            }
        }
    }
    let (labels, count) = grid.label(&mask);
    if count == 0 {
        return Err(Error::Invalid(format!(
            "saddle margin {margin:.3e} leaves no cells; use a smaller margin"
        )));
    }
    let mut sizes = vec![0usize; count];
    let mut boundary = vec![0usize; count];
    let mut adjacency = BTreeSet::new();
    for k in 0..grid.len() {
        let Some(c) = labels[k] else { continue };
        sizes[c] += 1;
        if grid.on_boundary(k) {
            boundary[c] += 1;
        }
        for nb in grid.neighbors(k) {
            if labels[nb].is_none() {
                // the band this neighbour sits in
                let v = samples.value[nb];
                if let Some((si, s)) = saddle_values
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (v - a.1).abs().total_cmp(&(v - b.1).abs()))
                {
                    adjacency.insert((c, si, samples.value[k] > *s));
                }
            }
        }
    }
    let touches_boundary: Vec<bool> = boundary.iter().map(|b| *b > 0).collect();
    let unbounded = (0..count).filter(|c| boundary[*c] > 0).max_by_key(|c| boundary[*c]);
    Ok(ComponentChart {
        grid: *grid,
        labels,
        count,
        sizes,
        saddle_values,
        margin,
        touches_boundary,
        unbounded,
        adjacency: adjacency.into_iter().collect(),
    })
}

/// Recovered profile `f_j` on one component.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileFit {
    pub component: usize,
    pub cells: usize,
    /// Strictly increasing `φ` values.
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |α − f(φ)|` over the component cells.
    pub deviation: f64,
    /// Range of `α` over the component.
    pub range: f64,
    pub pass: bool,
}

impl ProfileFit {
    /// Piecewise linear interpolation of the knots, extended linearly at both ends.
    pub fn eval(&self, t: f64) -> f64 {
        let (k, v) = (&self.knots, &self.values);
        if k.len() == 1 {
            return v[0];
        }
        let i = match k.partition_point(|x| *x <= t) {
            0 => 0,
            i if i >= k.len() => k.len() - 2,
            i => i - 1,
        };
        let w = (t - k[i]) / (k[i + 1] - k[i]);
        v[i] + w * (v[i + 1] - v[i])
    }
}

pub const MIN_BIN: usize = 20;

/// Least-squares polynomial `a + b s + c s²` in `s = (φ − m)/w`, with the degree
/// lowered when the bin holds fewer than three distinct `φ` values.
fn local_quadratic(pts: &[(f64, f64)], m: f64, w: f64) -> [f64; 3] {
    let mut distinct = 1;
    for pair in pts.windows(2) {
        if pair[1].0 - pair[0].0 > 1e-6 * w {
            distinct += 1;
        }
    }
    let cols = distinct.min(3);
    let mean = || [pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64, 0.0, 0.0];
    if cols == 1 {
        return mean();
    }
    let a = DMatrix::from_fn(pts.len(), cols, |r, c| ((pts[r].0 - m) / w).powi(c as i32));
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let svd = a.svd(true, true);
    let eps = 1e-10 * svd.singular_values.max();
    match svd.solve(&b, eps) {
        Ok(x) if x.iter().all(|v| v.is_finite()) => [x[0], x[1], if cols == 3 { x[2] } else { 0.0 }],
        _ => mean(),
    }
}

/// Fits `α ≈ f(φ)` on one component from equal-count bins in `φ`.
///
/// Each bin carries a local quadratic regression of `α` on `φ`; its value at the
/// bin's median level is the knot value and its residuals give the deviation.
pub fn fit_profile(
    alpha: &[f64],
    samples: &PhiSamples,
    chart: &ComponentChart,
    comp: usize,
    fit_tol: f64,
) -> Result<ProfileFit> {
    let mut pts: Vec<(f64, f64)> = chart.cells(comp).map(|k| (samples.value[k], alpha[k])).collect();
    if pts.len() < MIN_BIN {
        return Err(Error::Precondition(format!(
            "component {comp} has {} cells, fewer than {MIN_BIN}",
            pts.len()
        )));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nbins = pts.len() / MIN_BIN;
    let (amin, amax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |m, p| (m.0.min(p.1), m.1.max(p.1)));
    let mut knots: Vec<f64> = Vec::with_capacity(nbins);
    let mut values: Vec<f64> = Vec::with_capacity(nbins);
    let mut deviation = 0.0f64;
    for b in 0..nbins {
        let lo = b * pts.len() / nbins;
        let hi = (b + 1) * pts.len() / nbins;
        let bin = &pts[lo..hi];
        // knots sit on a sampled level so that degree-lowered bins stay exact there
        let m = bin[bin.len() / 2].0;
        let w = bin[bin.len() - 1].0 - bin[0].0;
        let q = if w > 1e-14 * (1.0 + m.abs()) {
            local_quadratic(bin, m, w)
        } else {
            [bin.iter().map(|p| p.1).sum::<f64>() / bin.len() as f64, 0.0, 0.0]
        };
        for &(p, a) in bin {
            let s = if w > 0.0 { (p - m) / w } else { 0.0 };
            deviation = deviation.max((a - (q[0] + q[1] * s + q[2] * s * s)).abs());
        }
        match knots.last() {
            Some(&last) if m <= last => {
                // merge coincident knots
                let i = values.len() - 1;
                values[i] = 0.5 * (values[i] + q[0]);
            }
            _ => {
                knots.push(m);
                values.push(q[0]);
            }
        }
    }
    let range = amax - amin;
    Ok(ProfileFit {
        component: comp,
        cells: pts.len(),
        knots,
        values,
        deviation,
        range,
        pass: deviation <= fit_tol * (1.0 + range),
    })
}
