#![allow(dead_code)]

use susyfactor::expr::{parse, Context, Expr};

pub fn x(s: &str, n: usize) -> Expr {
    parse(s, Context::X { n }).unwrap()
}

pub fn t(s: &str) -> Expr {
    parse(s, Context::T).unwrap()
}

/// Expressions in x1, x2, x3 and h that exercise every builtin.
pub const CORPUS: &[&str] = &[
    "x1^2*x2 - 3*x3 + 1",
    "sin(x1*x2) + cos(x3)",
    "exp(-(x1^2 + x2^2)/2)*x3",
    "sqrt(2 + x1^2 + x2^2 + x3^2)",
    "log(3 + x1^2) - x2*log(2 + x3^2)",
    "tanh(x1 - 2*x2)*x3^3",
    "(x1^2 - 1)^2 + x2^2 + h*x3",
    "x1/(1 + x2^2) - x3/(2 + sin(x1))",
    "bump(x1^2 + x2^2, 0.2, 1.6)*x3",
    "(1 + x1^2)^(3/2) - x2^5",
    "sin(h*x1 + x2)*exp(x3/3)",
    "-x1*x2*x3 + (x1 + x2 + x3)^4/24",
];

/// Central finite differences of `f` at `p`: gradient with step `e1`, Hessian
/// from function values with step `e2`, both Richardson-extrapolated to fourth order.
pub fn fd_grad_hess(f: &dyn Fn(&[f64]) -> f64, p: &[f64], e1: f64, e2: f64) -> (Vec<f64>, Vec<f64>) {
    let (g1, h1) = central(f, p, e1, e2);
    let (g2, h2) = central(f, p, 0.5 * e1, 0.5 * e2);
    let rich = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    (rich(&g1, &g2), rich(&h1, &h2))
}

fn central(f: &dyn Fn(&[f64]) -> f64, p: &[f64], e1: f64, e2: f64) -> (Vec<f64>, Vec<f64>) {
    let n = p.len();
    let at = |d: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(i, s) in d {
            q[i] += s;
        }
        f(&q)
    };
    let grad = (0..n).map(|i| (at(&[(i, e1)]) - at(&[(i, -e1)])) / (2.0 * e1)).collect();
    let mut hess = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            hess[i * n + j] = if i == j {
                (at(&[(i, e2)]) - 2.0 * f(p) + at(&[(i, -e2)])) / (e2 * e2)
            } else {
                (at(&[(i, e2), (j, e2)]) - at(&[(i, e2), (j, -e2)]) - at(&[(i, -e2), (j, e2)])
                    + at(&[(i, -e2), (j, -e2)]))
                    / (4.0 * e2 * e2)
            };
        }
    }
    (grad, hess)
}

/// Points of a tensor grid on `[-r, r]^n`.
pub fn cube(n: usize, m: usize, r: f64) -> Vec<Vec<f64>> {
    susyfactor::grid::tensor_points(&vec![[-r, r]; n], m)
}

pub mod instances {
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A constant-coefficient pair `(A, B)`: `A ≥ 0` with a kernel of the given
    /// dimension, `B` antisymmetric with vanishing kernel block. When `deficient`
    /// the block from the kernel into its complement loses rank on purpose.
    pub struct Instance {
        pub a: DMatrix<f64>,
        pub b: DMatrix<f64>,
        pub kernel_dim: usize,
    }

    fn orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        m.qr().q()
    }

    pub fn split_instance(rng: &mut ChaCha8Rng, definite: bool) -> (Instance, bool) {
        let n = rng.random_range(2..=6);
        let k = if definite { 0 } else { rng.random_range(1..n) };
        let q = orthogonal(n, rng);
        let mut lam = DMatrix::zeros(n, n);
        for i in k..n {
            lam[(i, i)] = rng.random_range(0.5..3.0);
        }
        let a = &q * lam * q.transpose();
        let a = 0.5 * (&a + a.transpose());
        // B in the eigenbasis: zero E-E block, random F-E and F-F blocks
        let deficient = k > 0 && rng.random_bool(0.5);
        let mut bl = DMatrix::zeros(n, n);
        let mut fe = DMatrix::from_fn(n - k, k, |_, _| rng.random_range(-2.0..2.0));
        if deficient {
            let v = DMatrix::from_fn(k, 1, |_, _| rng.random_range(-1.0..1.0)).normalize();
            fe = &fe * (DMatrix::identity(k, k) - &v * v.transpose());
        }
        for i in k..n {
            for j in 0..k {
                bl[(i, j)] = fe[(i - k, j)];
                bl[(j, i)] = -fe[(i - k, j)];
            }
            for j in (i + 1)..n {
                let v = rng.random_range(-2.0..2.0);
                bl[(i, j)] = v;
                bl[(j, i)] = -v;
            }
        }
        let b = &q * bl * q.transpose();
        let b = 0.5 * (&b - b.transpose());
        (Instance { a, b, kernel_dim: k }, deficient)
    }

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn sigma_min(m: &DMatrix<f64>) -> f64 {
        m.singular_values().iter().fold(f64::INFINITY, |a, s| a.min(*s))
    }
}
