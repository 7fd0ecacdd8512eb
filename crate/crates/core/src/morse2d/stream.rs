use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::Grid2;
use crate::quadrature::gauss_legendre;

/// The covector field `U = U1 dx1 + U2 dx2` evaluated at parameter `h`.
#[derive(Debug, Clone)]
pub struct Field2 {
    pub u: [Expr; 2],
    pub h: f64,
}

impl Field2 {
    pub fn eval(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        Ok([
            self.u[0].eval_f64(&p, self.h, None)?,
            self.u[1].eval_f64(&p, self.h, None)?,
        ])
    }

    /// `∫ ⋆U` along the straight segment from `a` to `b`, with `⋆U = −U2 dx1 + U1 dx2`.
    pub fn star_integral(&self, a: [f64; 2], b: [f64; 2], nodes: &(Vec<f64>, Vec<f64>)) -> Result<f64> {
        let d = [b[0] - a[0], b[1] - a[1]];
        let mut s = 0.0;
        for (x, w) in nodes.0.iter().zip(&nodes.1) {
            let t = 0.5 * (1.0 + x);
            let u = self.eval([a[0] + t * d[0], a[1] + t * d[1]])?;
            s += 0.5 * w * (-u[1] * d[0] + u[0] * d[1]);
        }
        Ok(s)
    }

    /// `∫ ⋆U` along a polyline, each leg split into pieces no longer than `max_piece`.
    pub fn star_integral_path(&self, path: &[[f64; 2]], max_piece: f64) -> Result<f64> {
        let nodes = gauss_legendre(8);
        let mut total = 0.0;
        for leg in path.windows(2) {
            let (a, b) = (leg[0], leg[1]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let pieces = ((len / max_piece).ceil() as usize).max(1);
            for k in 0..pieces {
                let (s0, s1) = (k as f64 / pieces as f64, (k + 1) as f64 / pieces as f64);
                let p0 = [a[0] + s0 * (b[0] - a[0]), a[1] + s0 * (b[1] - a[1])];
                let p1 = [a[0] + s1 * (b[0] - a[0]), a[1] + s1 * (b[1] - a[1])];
                total += self.star_integral(p0, p1, &nodes)?;
            }
        }
        Ok(total)
    }
}

/// Stream potential on a grid: `U = ∂2α dx1 − ∂1α dx2`, anchored at the grid origin.
#[derive(Debug, Clone, Serialize)]
pub struct StreamField {
    pub grid: Grid2,
    pub alpha: Vec<f64>,
    /// Largest `|∂1U1 + ∂2U2|` seen at the nodes.
    pub max_divergence: f64,
    /// Largest loop defect relative to its allowed bound (≤ 1 when consistent).
    pub loop_defect: f64,
}

/// Integrates `α` up the left edge and then along each row.
pub fn recover_stream(field: &Field2, grid: &Grid2, tol: f64, loops: usize, seed: u64) -> Result<StreamField> {
    // integrability check
    let divs: Vec<(f64, usize)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let p = grid.point_k(k);
            let j0 = field.u[0].eval_jet(&p, field.h, 1)?;
            let j1 = field.u[1].eval_jet(&p, field.h, 1)?;
            Ok(((j0.d1(0) + j1.d1(1)).abs(), k))
        })
        .collect::<Result<_>>()?;
    let (max_div, worst) = divs.iter().fold((0.0f64, 0usize), |m, &(d, k)| if d > m.0 { (d, k) } else { m });
    if max_div > tol {
        let p = grid.point_k(worst);
        return Err(Error::Integrability {
            residual: max_div,
            tol,
            x: p[0],
            y: p[1],
        });
    }
    let nodes = gauss_legendre(8);
    let mut left = vec![0.0; grid.ny];
    for j in 1..grid.ny {
        let (a, b) = (grid.point(0, j - 1), grid.point(0, j));
        left[j] = left[j - 1] + field.star_integral(a, b, &nodes)?;
    }
    let rows: Vec<Vec<f64>> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![0.0; grid.nx];
            row[0] = left[j];
            for i in 1..grid.nx {
                row[i] = row[i - 1] + field.star_integral(grid.point(i - 1, j), grid.point(i, j), &nodes)?;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let alpha: Vec<f64> = rows.into_iter().flatten().collect();

    // path independence on random rectangles
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loop_defect = 0.0f64;
    let piece = grid.dx().max(grid.dy()) * 4.0;
    for _ in 0..loops {
        let (i0, i1) = (rng.random_range(0..grid.nx), rng.random_range(0..grid.nx));
        let (j0, j1) = (rng.random_range(0..grid.ny), rng.random_range(0..grid.ny));
        let (a, c) = (grid.point(i0, j0), grid.point(i1, j1));
        let path = [a, [c[0], a[1]], c, [a[0], c[1]], a];
        let len = 2.0 * ((c[0] - a[0]).abs() + (c[1] - a[1]).abs());
        let circ = field.star_integral_path(&path, piece)?;
        let bound = 10.0 * tol * len.max(grid.dx());
        loop_defect = loop_defect.max(circ.abs() / bound);
    }
    Ok(StreamField {
        grid: *grid,
        alpha,
        max_divergence: max_div,
        loop_defect,
    })
}
