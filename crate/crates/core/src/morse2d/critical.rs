use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub location: [f64; 2],
    /// Number of negative Hessian eigenvalues.
    pub index: u8,
    pub value: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CriticalSet {
    pub points: Vec<CriticalPoint>,
    /// Seeds whose Newton iteration did not converge inside the box.
    pub warnings: Vec<String>,
}

impl CriticalSet {
    /// Sorted, deduplicated saddle values.
    pub fn saddle_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().filter(|p| p.index == 1).map(|p| p.value).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
        v
    }
}

/// Newton iteration on `∇φ` from a `seeds × seeds` lattice over the box.
pub fn find_critical_points(phi: &Expr, bounds: [[f64; 2]; 2], seeds: usize) -> Result<CriticalSet> {
    let mut set = CriticalSet::default();
    let seeds = seeds.max(2);
    let pad = [
        0.05 * (bounds[0][1] - bounds[0][0]),
        0.05 * (bounds[1][1] - bounds[1][0]),
    ];
    let inside = |p: [f64; 2]| {
        (0..2).all(|a| p[a] >= bounds[a][0] - pad[a] && p[a] <= bounds[a][1] + pad[a])
    };
    for si in 0..seeds {
        for sj in 0..seeds {
            let mut p = [
                bounds[0][0] + (bounds[0][1] - bounds[0][0]) * (si as f64 + 0.5) / seeds as f64,
                bounds[1][0] + (bounds[1][1] - bounds[1][0]) * (sj as f64 + 0.5) / seeds as f64,
            ];
            let mut converged = false;
            // degenerate points converge only linearly, so allow many steps
            for _ in 0..200 {
                let j = match phi.eval_jet(&p, 0.0, 2) {
                    Ok(j) => j,
                    Err(_) => break,
                };
                let (g, hm) = ([j.d1(0), j.d1(1)], [j.d2(0, 0), j.d2(0, 1), j.d2(1, 1)]);
                let det = hm[0] * hm[2] - hm[1] * hm[1];
                if det.abs() < 1e-300 {
                    break;
                }
                let step = [(hm[2] * g[0] - hm[1] * g[1]) / det, (hm[0] * g[1] - hm[1] * g[0]) / det];
                p = [p[0] - step[0], p[1] - step[1]];
                if !inside(p) {
                    break;
                }
                if step[0].hypot(step[1]) < 1e-15 * (1.0 + p[0].hypot(p[1])) {
                    converged = true;
                    break;
                }
            }
            if !converged || !inside(p) {
                continue;
            }
            let j = phi.eval_jet(&p, 0.0, 2)?;
            if j.d1(0).hypot(j.d1(1)) > 1e-9 {
                set.warnings.push(format!("seed ({si}, {sj}) stalled at ({:.6}, {:.6})", p[0], p[1]));
                continue;
            }
            if set
                .points
                .iter()
                .any(|q| (q.location[0] - p[0]).hypot(q.location[1] - p[1]) <= 1e-6)
            {
                continue;
            }
            let (a, b, c) = (j.d2(0, 0), j.d2(0, 1), j.d2(1, 1));
            let det = a * c - b * b;
            if det.abs() < 1e-8 {
                return Err(Error::NotMorse(format!(
                    "degenerate critical point at ({:.6}, {:.6}), det Hess = {det:.3e}",
                    p[0], p[1]
                )));
            }
            let tr = a + c;
            let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
            let index = [0.5 * (tr - disc), 0.5 * (tr + disc)].iter().filter(|l| **l < 0.0).count() as u8;
            set.points.push(CriticalPoint {
                location: p,
                index,
                value: j.value(),
            });
        }
    }
    set.points.sort_by(|a, b| {
        a.location[0]
            .total_cmp(&b.location[0])
            .then(a.location[1].total_cmp(&b.location[1]))
    });
    Ok(set)
}
