use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use susyfactor::cli::{self, Case, Overrides};
use susyfactor::expr::{parse, Context};
use susyfactor::quadrature::QuadratureConfig;
use susyfactor::SusyStructure;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn overrides(h: Option<Vec<f64>>, seed: Option<u64>, grid: Option<usize>) -> Overrides {
    Overrides { h, seed, grid }
}

fn case_from_text(text: &str, ov: &Overrides) -> PyResult<Case> {
    cli::parse_spec(text).and_then(|s| s.resolve(ov)).map_err(err)
}

/// Names of the built-in gallery cases.
#[pyfunction]
fn gallery_names() -> Vec<&'static str> {
    cli::NAMES.to_vec()
}

/// TOML spec text of a gallery case.
#[pyfunction]
fn gallery_spec(name: &str) -> PyResult<String> {
    cli::gallery::spec_text(name).map(str::to_owned).map_err(err)
}

/// Runs a gallery case and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (name, h=None, seed=None, grid=None))]
fn run_gallery(py: Python<'_>, name: &str, h: Option<Vec<f64>>, seed: Option<u64>, grid: Option<usize>) -> PyResult<String> {
    let ov = overrides(h, seed, grid);
    py.detach(|| cli::run_gallery(name, &ov)).map(|r| r.to_json()).map_err(err)
}

/// Verifies a case given as TOML text and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (text, h=None, seed=None, grid=None))]
fn verify(py: Python<'_>, text: &str, h: Option<Vec<f64>>, seed: Option<u64>, grid: Option<usize>) -> PyResult<String> {
    let case = case_from_text(text, &overrides(h, seed, grid))?;
    Ok(py.detach(|| cli::verify_case(&case, "verify")).to_json())
}

#[pyfunction]
#[pyo3(signature = (text, h=None, seed=None, grid=None))]
fn morse2d(py: Python<'_>, text: &str, h: Option<Vec<f64>>, seed: Option<u64>, grid: Option<usize>) -> PyResult<String> {
    let case = case_from_text(text, &overrides(h, seed, grid))?;
    py.detach(|| cli::morse2d_report(&case)).map(|r| r.to_json()).map_err(err)
}

/// Tensor product check; each source is TOML text or `gallery:NAME`.
#[pyfunction]
#[pyo3(signature = (a, b, h=None, grid=None))]
fn tensor(py: Python<'_>, a: &str, b: &str, h: Option<Vec<f64>>, grid: Option<usize>) -> PyResult<String> {
    let ov = overrides(h, None, None);
    let load = |s: &str| match s.strip_prefix("gallery:") {
        Some(name) => cli::gallery_case(name, &ov).map_err(err),
        None => case_from_text(s, &ov),
    };
    let (ca, cb) = (load(a)?, load(b)?);
    Ok(py.detach(|| cli::tensor_report(&ca, &cb, grid)).to_json())
}

/// Value, gradient and flattened Hessian of an expression in `x1..xn` and `h`.
#[pyfunction]
#[pyo3(signature = (source, x, h=0.0))]
fn eval_jet(source: &str, x: Vec<f64>, h: f64) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let e = parse(source, Context::X { n: x.len() }).map_err(err)?;
    let j = e.eval_jet(&x, h, 2).map_err(err)?;
    Ok((j.value(), j.grad().to_vec(), j.hess().to_vec()))
}

/// Row-major `G(x; h)` for the case described by the TOML text.
#[pyfunction]
fn g_matrix(text: &str, x: Vec<f64>, h: f64) -> PyResult<Vec<f64>> {
    let case = case_from_text(text, &Overrides::default())?;
    if x.len() != case.n {
        return Err(PyValueError::new_err(format!("expected {} coordinates, got {}", case.n, x.len())));
    }
    let s = SusyStructure::assemble(&case.op, &case.dec, QuadratureConfig::default()).map_err(err)?;
    s.g_matrix(&x, h).map_err(err)
}

#[pymodule]
fn susyfactor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gallery_names, m)?)?;
    m.add_function(wrap_pyfunction!(gallery_spec, m)?)?;
    m.add_function(wrap_pyfunction!(run_gallery, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(morse2d, m)?)?;
    m.add_function(wrap_pyfunction!(tensor, m)?)?;
    m.add_function(wrap_pyfunction!(eval_jet, m)?)?;
    m.add_function(wrap_pyfunction!(g_matrix, m)?)?;
    Ok(())
}
