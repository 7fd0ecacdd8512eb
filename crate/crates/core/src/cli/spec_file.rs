//! The TOML problem description and its resolution into engine objects.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{parse, Context, Expr, FieldBundle};
use crate::grid::{check_bounds, tensor_points, Bounds};
use crate::morse2d::Morse2dConfig;
use crate::operator::OperatorSpec;
use crate::susy::{fit_constant_theta, CorrectorPart, Outside, Term, ThetaDecomposition};

/// An expression written either as a string or as a bare number.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ExprValue {
    Num(f64),
    Text(String),
}

impl ExprValue {
    pub fn source(&self) -> String {
        match self {
            ExprValue::Num(v) => format!("{v:?}"),
            ExprValue::Text(s) => s.clone(),
        }
    }

    fn parse(&self, ctx: Context, what: &str) -> Result<Expr> {
        match self {
            ExprValue::Num(v) => Ok(Expr::num(*v)),
            ExprValue::Text(s) => parse(s, ctx).map_err(|e| Error::Spec(format!("{what}: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub name: Option<String>,
    pub dimension: usize,
    pub h: Option<Vec<f64>>,
    pub phases: Phases,
    pub operator: OperatorBlock,
    pub theta: Option<ThetaBlock>,
    #[serde(default)]
    pub verify: VerifyBlock,
    pub morse2d: Option<Morse2dBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phases {
    pub phi: ExprValue,
    pub psi: ExprValue,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorBlock {
    #[serde(rename = "A")]
    pub a: Vec<Vec<ExprValue>>,
    #[serde(rename = "U")]
    pub u: Vec<ExprValue>,
    pub v: ExprValue,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MInfinity {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ThetaValue {
    Matrix(Vec<Vec<ExprValue>>),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermBlock {
    pub alpha: ExprValue,
    pub theta: ThetaValue,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaBlock {
    #[serde(rename = "N", default)]
    pub n: u32,
    pub m_infinity: Option<MInfinity>,
    pub terms: Vec<TermBlock>,
    pub cutoff: Option<ExprValue>,
    pub outside: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_assumption")]
    pub assumption: f64,
    #[serde(default = "default_eikonal")]
    pub eikonal: f64,
    #[serde(default = "default_factorization")]
    pub factorization: f64,
    #[serde(default = "default_pde")]
    pub pde: f64,
}

fn default_assumption() -> f64 {
    1e-9
}
fn default_eikonal() -> f64 {
    1e-9
}
fn default_factorization() -> f64 {
    1e-7
}
fn default_pde() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            assumption: default_assumption(),
            eikonal: default_eikonal(),
            factorization: default_factorization(),
            pde: default_pde(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    #[serde(rename = "box")]
    pub bounds: Option<Vec<[f64; 2]>>,
    pub grid_points: Option<usize>,
    pub test_functions: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Morse2dBlock {
    #[serde(rename = "box")]
    pub bounds: Option<[[f64; 2]; 2]>,
    pub grid_points: Option<usize>,
    pub saddle_margin: Option<f64>,
    pub fit_tol: Option<f64>,
    pub glue_tol: Option<f64>,
    #[serde(default)]
    pub pairs: Vec<[[f64; 2]; 2]>,
}

pub const DEFAULT_H: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
pub const DEFAULT_TEST_FUNCTIONS: usize = 3;

pub fn default_grid_points(n: usize) -> usize {
    match n {
        0..=2 => 21,
        3 => 13,
        _ => 9,
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub h: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct VerifySettings {
    pub bounds: Bounds,
    pub grid_points: usize,
    pub test_functions: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl VerifySettings {
    pub fn points(&self) -> Vec<Vec<f64>> {
        tensor_points(&self.bounds, self.grid_points)
    }
}

/// A fully resolved problem.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: String,
    pub n: usize,
    pub hs: Vec<f64>,
    pub op: OperatorSpec,
    pub dec: ThetaDecomposition,
    pub verify: VerifySettings,
    pub morse2d: Option<Morse2dConfig>,
}

impl Case {
    pub fn parts(&self) -> Vec<CorrectorPart> {
        let b = &self.op.bundle;
        vec![CorrectorPart::from_decomposition(&self.dec, Expr::add(b.phi.clone(), b.psi.clone()))]
    }
}

pub fn parse_spec(text: &str) -> Result<SpecFile> {
    toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))
}

pub fn load_spec(path: &std::path::Path) -> Result<SpecFile> {
    let text = std::fs::read_to_string(path)?;
    parse_spec(&text)
}

fn matrix(rows: &[Vec<ExprValue>], n: usize, ctx: Context, what: &str) -> Result<Vec<Vec<Expr>>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Spec(format!("{what} must be a {n} x {n} matrix")));
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, e)| e.parse(ctx, &format!("{what}[{}][{}]", i + 1, j + 1)))
                .collect()
        })
        .collect()
}

impl SpecFile {
    /// Resolves expressions, defaults and fitted θ terms.
    pub fn resolve(&self, ov: &Overrides) -> Result<Case> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::Spec("dimension must be at least 1".into()));
        }
        let ctx = Context::X { n };
        let hs = ov.h.clone().or_else(|| self.h.clone()).unwrap_or_else(|| DEFAULT_H.to_vec());
        if hs.is_empty() || hs.iter().any(|h| !(*h > 0.0 && *h <= 1.0)) {
            return Err(Error::Spec(format!("h values must lie in (0, 1], got {hs:?}")));
        }
        let a = matrix(&self.operator.a, n, ctx, "operator.A")?;
        if self.operator.u.len() != n {
            return Err(Error::Spec(format!("operator.U must have {n} entries")));
        }
        let u = self
            .operator
            .u
            .iter()
            .enumerate()
            .map(|(i, e)| e.parse(ctx, &format!("operator.U[{}]", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        let v = self.operator.v.parse(ctx, "operator.v")?;
        let phi = self.phases.phi.parse(ctx, "phases.phi")?;
        let psi = self.phases.psi.parse(ctx, "phases.psi")?;
        let bundle = FieldBundle::new(a, u, v, phi, psi).map_err(|e| Error::Spec(e.to_string()))?;
        let op = OperatorSpec::new(self.name.clone().unwrap_or_else(|| "unnamed".into()), bundle);

        let vb = &self.verify;
        let bounds = vb.bounds.clone().unwrap_or_else(|| vec![[-2.0, 2.0]; n]);
        if bounds.len() != n {
            return Err(Error::Spec(format!("verify.box needs {n} [min, max] pairs")));
        }
        check_bounds(&bounds).map_err(|e| Error::Spec(e.to_string()))?;
        let t = &vb.tolerances;
        if [t.assumption, t.eikonal, t.factorization, t.pde].iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Spec("tolerances must be positive".into()));
        }
        let verify = VerifySettings {
            bounds,
            grid_points: ov.grid.or(vb.grid_points).unwrap_or_else(|| default_grid_points(n)),
            test_functions: vb.test_functions.unwrap_or(DEFAULT_TEST_FUNCTIONS),
            seed: ov.seed.or(vb.seed).unwrap_or(0),
            tolerances: t.clone(),
        };
        if verify.grid_points < 2 {
            return Err(Error::Spec("verify.grid_points must be at least 2".into()));
        }

        let dec = match &self.theta {
            None => ThetaDecomposition::trivial(n),
            Some(tb) => self.resolve_theta(tb, &op, &verify, hs[0])?,
        };

        let morse2d = match &self.morse2d {
            None => None,
            Some(mb) => {
                if n != 2 {
                    return Err(Error::Spec("the morse2d block needs dimension = 2".into()));
                }
                let d = Morse2dConfig::default();
                let bounds = match mb.bounds {
                    Some(b) => b,
                    None => [verify.bounds[0], verify.bounds[1]],
                };
                Some(Morse2dConfig {
                    bounds,
                    grid_points: ov.grid.or(mb.grid_points).unwrap_or(d.grid_points),
                    saddle_margin: mb.saddle_margin,
                    fit_tol: mb.fit_tol.unwrap_or(d.fit_tol),
                    glue_tol: mb.glue_tol.unwrap_or(d.glue_tol),
                    pairs: mb.pairs.iter().map(|p| (p[0], p[1])).collect(),
                    seed: verify.seed,
                    ..d
                })
            }
        };
        Ok(Case {
            name: op.name.clone(),
            n,
            hs,
            op,
            dec,
            verify,
            morse2d,
        })
    }

    fn resolve_theta(&self, tb: &ThetaBlock, op: &OperatorSpec, verify: &VerifySettings, h_fit: f64) -> Result<ThetaDecomposition> {
        let n = self.dimension;
        let ctx = Context::X { n };
        let m_inf = match &tb.m_infinity {
            None => f64::INFINITY,
            Some(MInfinity::Num(v)) => *v,
            Some(MInfinity::Text(s)) if s == "inf" => f64::INFINITY,
            Some(MInfinity::Text(s)) => return Err(Error::Spec(format!("m_infinity must be \"inf\" or a number, got {s:?}"))),
        };
        if tb.terms.is_empty() {
            return Err(Error::Spec("theta.terms must not be empty".into()));
        }
        let cutoff = tb.cutoff.as_ref().map(|c| c.parse(ctx, "theta.cutoff")).transpose()?;
        let outside = match tb.outside.as_deref() {
            None | Some("error") => Outside::Error,
            Some("zero") => Outside::Zero,
            Some(o) => return Err(Error::Spec(format!("theta.outside must be \"error\" or \"zero\", got {o:?}"))),
        };
        let mut fixed = Vec::new();
        let mut to_fit = Vec::new();
        for (k, term) in tb.terms.iter().enumerate() {
            let alpha = term.alpha.parse(Context::T, &format!("theta.terms[{}].alpha", k + 1))?;
            match &term.theta {
                ThetaValue::Keyword(s) if s == "fit" => to_fit.push((k, alpha)),
                ThetaValue::Keyword(s) => {
                    return Err(Error::Spec(format!("theta.terms[{}].theta: expected a matrix or \"fit\", got {s:?}", k + 1)))
                }
                ThetaValue::Matrix(m) => {
                    let m = matrix(m, n, ctx, &format!("theta.terms[{}].theta", k + 1))?;
                    let t = Term::new(alpha, m).map_err(|e| Error::Spec(format!("theta.terms[{}]: {e}", k + 1)))?;
                    fixed.push((k, t));
                }
            }
        }
        if !to_fit.is_empty() && cutoff.is_some() {
            return Err(Error::Spec("fitted theta terms cannot be combined with a cutoff".into()));
        }
        let phi_hat = Expr::add(op.bundle.phi.clone(), op.bundle.psi.clone());
        let all_points = verify.points();
        let stride = (all_points.len() / 200).max(1);
        let sample: Vec<Vec<f64>> = all_points.into_iter().step_by(stride).collect();
        for (k, alpha) in to_fit {
            let parts = vec![CorrectorPart {
                terms: fixed.iter().map(|(_, t)| t.clone()).collect(),
                phi_hat: phi_hat.clone(),
                m_inf,
                outside,
                cutoff: None,
            }];
            let theta = fit_constant_theta(op, &parts, &alpha, &sample, h_fit)?;
            // round away least-squares noise so that exact structures stay exact
            let theta: Vec<f64> = theta.iter().map(|v| (v * 1e12).round() / 1e12).collect();
            fixed.push((k, Term::constant(alpha, &theta, n)?));
        }
        fixed.sort_by_key(|(k, _)| *k);
        let mut dec = ThetaDecomposition::new(n, fixed.into_iter().map(|(_, t)| t).collect(), tb.n, m_inf)?;
        if let Some(c) = cutoff {
            dec = dec.with_cutoff(c, outside);
        } else {
            dec.outside = outside;
        }
        Ok(dec)
    }
}
