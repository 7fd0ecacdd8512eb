//! Uniform sample grids and flood-fill labeling.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box, one `[min, max]` pair per axis.
pub type Bounds = Vec<[f64; 2]>;

pub fn check_bounds(b: &Bounds) -> Result<()> {
    for (i, [lo, hi]) in b.iter().enumerate() {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Invalid(format!("degenerate box on axis {}: [{lo}, {hi}]", i + 1)));
        }
    }
    Ok(())
}

/// Tensor grid with `m` points per axis (including the end points).
pub fn tensor_points(b: &Bounds, m: usize) -> Vec<Vec<f64>> {
    let n = b.len();
    let m = m.max(2);
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut k| {
            (0..n)
                .map(|ax| {
                    let i = k % m;
                    k /= m;
                    let [lo, hi] = b[ax];
                    lo + (hi - lo) * i as f64 / (m - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// Two-dimensional node grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Grid2 {
    pub fn new(lo: [f64; 2], hi: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        check_bounds(&vec![[lo[0], hi[0]], [lo[1], hi[1]]])?;
        if nx < 3 || ny < 3 {
            return Err(Error::Invalid("grids need at least 3 points per axis".into()));
        }
        Ok(Grid2 { lo, hi, nx, ny })
    }

    pub fn dx(&self) -> f64 {
        (self.hi[0] - self.lo[0]) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.hi[1] - self.lo[1]) / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.lo[0] + i as f64 * self.dx(), self.lo[1] + j as f64 * self.dy()]
    }

    pub fn point_k(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.coords(k);
        self.point(i, j)
    }

    /// Nearest node to `p`, if `p` lies in the box.
    pub fn nearest(&self, p: [f64; 2]) -> Option<usize> {
        if p[0] < self.lo[0] || p[0] > self.hi[0] || p[1] < self.lo[1] || p[1] > self.hi[1] {
            return None;
        }
        let i = ((p[0] - self.lo[0]) / self.dx()).round() as usize;
        let j = ((p[1] - self.lo[1]) / self.dy()).round() as usize;
        Some(self.index(i.min(self.nx - 1), j.min(self.ny - 1)))
    }

    pub fn on_boundary(&self, k: usize) -> bool {
        let (i, j) = self.coords(k);
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(k);
        let cand = [
            (i > 0).then(|| self.index(i - 1, j)),
            (i + 1 < self.nx).then(|| self.index(i + 1, j)),
            (j > 0).then(|| self.index(i, j - 1)),
            (j + 1 < self.ny).then(|| self.index(i, j + 1)),
        ];
        cand.into_iter().flatten()
    }

    /// 4-connected components of the masked nodes; returns labels and the count.
    pub fn label(&self, mask: &[bool]) -> (Vec<Option<usize>>, usize) {
        let mut labels = vec![None; self.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.len() {
            if !mask[start] || labels[start].is_some() {
                continue;
            }
            labels[start] = Some(count);
            queue.push_back(start);
            while let Some(k) = queue.pop_front() {
                for nb in self.neighbors(k) {
                    if mask[nb] && labels[nb].is_none() {
                        labels[nb] = Some(count);
                        queue.push_back(nb);
                    }
                }
            }
            count += 1;
        }
        (labels, count)
    }
}
