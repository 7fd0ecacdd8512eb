use crate::error::{Error, Result};
use crate::expr::{Expr, FieldBundle};
use crate::grid::Grid2;
use crate::morse2d::find_critical_points;
use crate::operator::{codiff_bivec, OperatorSpec};
use crate::quadrature::QuadratureConfig;

use super::{Outside, SusyStructure, Term, ThetaDecomposition};

/// Inputs for the localized perturbation `P_ε = U_ε∘hd`, `U_ε = δ((χ_ε α∘φ)θ)`.
#[derive(Debug, Clone)]
pub struct PerturbationConfig {
    pub phi: Expr,
    pub sigma: f64,
    pub eps: f64,
    /// Profile in the t-context, supported in `t < σ − ε`.
    pub alpha: Expr,
    /// Co-closed bivector field, full `2 × 2` matrix.
    pub theta: Vec<Vec<Expr>>,
    /// A point of the sublevel component the cutoff localizes to.
    pub seed: [f64; 2],
    pub bounds: [[f64; 2]; 2],
    pub grid_points: usize,
    pub qc: QuadratureConfig,
}

#[derive(Debug, Clone)]
pub struct PerturbationGallery {
    pub op: OperatorSpec,
    pub dec: ThetaDecomposition,
    pub structure: SusyStructure,
    pub cutoff: Expr,
    pub center: [f64; 2],
    pub r1: f64,
    pub r2: f64,
}

fn check_support(alpha: &Expr, lo: f64, hi: f64) -> Result<()> {
    for k in 0..=400 {
        let t = lo + (hi - lo) * k as f64 / 400.0;
        let d = alpha.eval_taylor(t, 0.1, 3)?.derivatives();
        if let Some(v) = d.iter().find(|v| v.abs() > 1e-14) {
            return Err(Error::Precondition(format!(
                "alpha is not flat on [{lo}, {hi}]: a derivative equals {v:.3e} at t = {t}"
            )));
        }
    }
    Ok(())
}

fn check_coclosed(theta: &[Vec<Expr>]) -> Result<()> {
    let n = theta.len();
    for k in 0..5 {
        let p: Vec<f64> = (0..n).map(|i| ((k * 5 + i * 3) as f64 * 0.61).sin() * 1.5).collect();
        let jets = theta
            .iter()
            .flatten()
            .map(|e| e.eval_jet(&p, 0.1, 1))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let d = codiff_bivec(&jets, n);
        if d.iter().any(|v| v.abs() > 1e-10) {
            return Err(Error::Precondition("theta must satisfy codiff(theta) = 0".into()));
        }
    }
    Ok(())
}

/// Builds `P_ε` and its structure `G = χ_ε B⁰`.
///
/// `χ_ε = bump(φ, σ−ε, σ−ε/2) · bump(|x−c|², r1², r2²)`, where the disk `|x − c| < r1`
/// covers the component of `{φ < σ − ε/2}` through the seed and the disk of radius
/// `r2` avoids every other such component. On `{φ ≥ σ − ε}` the profile vanishes, so
/// `χ_ε α∘φ` equals `α∘φ` on the chosen component and zero elsewhere.
pub fn build_perturbation_gallery(cfg: &PerturbationConfig) -> Result<PerturbationGallery> {
    let (sigma, eps) = (cfg.sigma, cfg.eps);
    if !(eps > 0.0) || !sigma.is_finite() {
        return Err(Error::Invalid(format!("need eps > 0 and finite sigma, got sigma = {sigma}, eps = {eps}")));
    }
    if cfg.theta.len() != 2 || cfg.theta.iter().any(|r| r.len() != 2) {
        return Err(Error::Unsupported("the perturbation gallery is planar; theta must be 2 x 2".into()));
    }
    if cfg.phi.var_count() > 2 || cfg.alpha.var_count() > 0 {
        return Err(Error::Invalid("phi must use x1, x2 and alpha only t".into()));
    }
    check_support(&cfg.alpha, sigma - eps, sigma + 1.0)?;
    check_coclosed(&cfg.theta)?;

    let crit = find_critical_points(&cfg.phi, cfg.bounds, 12)?;
    if let Some(p) = crit.points.iter().find(|p| p.value > sigma - eps && p.value < sigma) {
        return Err(Error::Precondition(format!(
            "critical value {} lies in ({}, {sigma})",
            p.value,
            sigma - eps
        )));
    }

    let [bx, by] = cfg.bounds;
    let grid = Grid2::new([bx[0], by[0]], [bx[1], by[1]], cfg.grid_points, cfg.grid_points)?;
    let vals: Vec<f64> = (0..grid.len())
        .map(|k| cfg.phi.eval_f64(&grid.point_k(k), 0.0, None))
        .collect::<std::result::Result<_, _>>()?;
    let phi_seed = cfg.phi.eval_f64(&cfg.seed, 0.0, None)?;
    let seed_node = grid
        .nearest(cfg.seed)
        .ok_or_else(|| Error::Invalid("seed lies outside the box".into()))?;
    if !(phi_seed < sigma) || !(vals[seed_node] < sigma) {
        return Err(Error::Invalid(format!("seed is not in {{phi < {sigma}}} (phi = {phi_seed})")));
    }
    let (below_sigma, _) = grid.label(&vals.iter().map(|v| *v < sigma).collect::<Vec<_>>());
    let omega_id = below_sigma[seed_node];
    let level = sigma - eps / 2.0;
    let inner: Vec<bool> = vals.iter().map(|v| *v < level).collect();
    let omega: Vec<usize> = (0..grid.len())
        .filter(|&k| inner[k] && below_sigma[k] == omega_id)
        .collect();
    if omega.is_empty() {
        return Err(Error::Precondition(format!("the seed component has no nodes with phi < {level}")));
    }
    if omega.iter().any(|&k| grid.on_boundary(k)) || (0..grid.len()).any(|k| grid.on_boundary(k) && below_sigma[k] == omega_id) {
        return Err(Error::Precondition("the seed component reaches the edge of the box".into()));
    }
    let mut c = [0.0, 0.0];
    for &k in &omega {
        let p = grid.point_k(k);
        c[0] += p[0];
        c[1] += p[1];
    }
    c = [c[0] / omega.len() as f64, c[1] / omega.len() as f64];
    let dist = |k: usize| {
        let p = grid.point_k(k);
        (p[0] - c[0]).hypot(p[1] - c[1])
    };
    let delta = grid.dx().max(grid.dy());
    let r1 = omega.iter().map(|&k| dist(k)).fold(0.0, f64::max) + 2.0 * delta;
    let others = (0..grid.len())
        .filter(|&k| inner[k] && below_sigma[k] != omega_id)
        .map(dist)
        .fold(f64::INFINITY, f64::min);
    let r2 = if others.is_finite() { others - 2.0 * delta } else { r1 + 1.0 };
    if r1 >= r2 {
        return Err(Error::Precondition(format!(
            "cannot separate the seed component by a disk (r1 = {r1:.4}, r2 = {r2:.4})"
        )));
    }

    let radius2 = Expr::add(
        Expr::pow(Expr::sub(Expr::x(0), Expr::num(c[0])), 2.0),
        Expr::pow(Expr::sub(Expr::x(1), Expr::num(c[1])), 2.0),
    );
    let cutoff = Expr::mul(
        Expr::bump(cfg.phi.clone(), sigma - eps, level, 0),
        Expr::bump(radius2, r1 * r1, r2 * r2, 0),
    );

    // U_i = −2 Σ_j ∂_j (F θ_ji) with F = χ α(φ)
    let f = Expr::mul(cutoff.clone(), cfg.alpha.subst_t(&cfg.phi));
    let u: Vec<Expr> = (0..2)
        .map(|i| {
            Expr::sum((0..2).map(|j| Expr::mul(Expr::num(-2.0), Expr::mul(f.clone(), cfg.theta[j][i].clone()).diff_x(j))))
        })
        .collect();
    let zero = || Expr::num(0.0);
    let bundle = FieldBundle::new(vec![vec![zero(), zero()], vec![zero(), zero()]], u, zero(), cfg.phi.clone(), cfg.phi.clone())?;
    let op = OperatorSpec::new("perturbation-two-wells", bundle);

    // φ̂ = 2φ, so the profile in t is α(t/2) and the limit is 2(σ − ε)
    let half_t = Expr::mul(Expr::num(0.5), Expr::t());
    let term = Term::new(cfg.alpha.subst_t(&half_t), cfg.theta.clone())?;
    let dec = ThetaDecomposition::new(2, vec![term], 0, 2.0 * (sigma - eps))?.with_cutoff(cutoff.clone(), Outside::Zero);
    let structure = SusyStructure::assemble(&op, &dec, cfg.qc)?;
    Ok(PerturbationGallery {
        op,
        dec,
        structure,
        cutoff,
        center: c,
        r1,
        r2,
    })
}
