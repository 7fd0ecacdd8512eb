use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::grid::tensor_points;
use crate::morse2d::{run_morse2d, Field2};
use crate::quadrature::QuadratureConfig;
use crate::susy::{tensorize, tensorize_operators, SusyStructure};

use super::gallery::{gallery_case, run_gallery, spec_text};
use super::pipeline::{factorization_check, test_functions, verify_case};
use super::report::{Check, Environment, Report, Verdict};
use super::spec_file::{default_grid_points, load_spec, Case, Overrides};

#[derive(Debug, Parser)]
#[command(name = "susyfactor", version, about = "Build and certify supersymmetric factorizations of semiclassical operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonFlags {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the h values (comma separated).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub h: Option<Vec<f64>>,
    /// Seed for the random test functions and loops.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
}

impl CommonFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            h: self.h.clone(),
            seed: self.seed,
            grid: self.grid,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify a spec file.
    Verify {
        spec: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Run a built-in example.
    Gallery {
        /// witten, kfp, r3-example, alpha-linear or perturbation-two-wells
        name: String,
        /// Print the example's spec instead of running it.
        #[arg(long)]
        print_spec: bool,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Planar Morse analysis of the first-order part of a 2D spec.
    Morse2d {
        spec: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Verify the product of two specs (paths or `gallery:NAME`).
    Tensor {
        spec_a: String,
        spec_b: String,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

/// Loads a spec path, or a gallery entry written `gallery:NAME`.
pub fn load_case(source: &str, ov: &Overrides) -> Result<Case> {
    match source.strip_prefix("gallery:") {
        Some(name) => gallery_case(name, ov),
        None => load_spec(Path::new(source))?.resolve(ov),
    }
}

pub fn cmd_verify(spec: &Path, ov: &Overrides) -> Result<Report> {
    let case = load_spec(spec)?.resolve(ov)?;
    Ok(verify_case(&case, "verify"))
}

pub fn cmd_morse2d(spec: &Path, ov: &Overrides) -> Result<Report> {
    morse2d_report(&load_spec(spec)?.resolve(ov)?)
}

/// The `morse2d` report for a resolved planar case with a `[morse2d]` block.
pub fn morse2d_report(case: &Case) -> Result<Report> {
    if case.n != 2 {
        return Err(Error::Spec(format!("morse2d needs dimension 2, got {}", case.n)));
    }
    let cfg = case
        .morse2d
        .clone()
        .ok_or_else(|| Error::Spec("morse2d needs a [morse2d] block".into()))?;
    let mut report = Report::new("morse2d", &case.name);
    report.environment = Some(Environment {
        dimension: 2,
        seed: cfg.seed,
        grid_points: cfg.grid_points,
        h: vec![case.hs[0]],
        bounds: cfg.bounds.to_vec(),
        test_functions: 0,
    });
    let b = &case.op.bundle;
    let field = Field2 {
        u: [b.u[0].clone(), b.u[1].clone()],
        h: case.hs[0],
    };
    match run_morse2d(&b.phi, &field, &cfg) {
        Ok(m) => {
            report
                .checks
                .push(Check::new("stream_integrability", m.stream.max_divergence, cfg.stream_tol));
            report
                .checks
                .push(Check::new("stream_loops", m.stream.loop_defect, 1.0));
            let dev = m.fits.iter().map(|f| f.deviation).fold(0.0, f64::max);
            report.checks.push(
                Check::new("per_component_profiles", dev, cfg.fit_tol * (1.0 + m.stream.alpha_range))
                    .with_pass(m.per_component_pass),
            );
            report
                .checks
                .push(Check::new("glue", m.glue.max_mismatch, m.glue.tolerance).with_pass(m.glue.pass));
            report
                .checks
                .push(Check::new("annihilation", m.stream.max_annihilation, 1e-8).info());
            report.notes.push("the glue verdict rests on sampled level pairs".into());
            report.morse2d = Some(m);
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report.finish();
    Ok(report)
}

pub fn cmd_tensor(a: &str, b: &str, ov: &Overrides) -> Result<Report> {
    // the factors run with their own grids; --grid applies to the product
    let factor_ov = Overrides { grid: None, ..ov.clone() };
    let ca = load_case(a, &factor_ov)?;
    let cb = load_case(b, &factor_ov)?;
    Ok(tensor_report(&ca, &cb, ov.grid))
}

/// Verifies both factors and the factorization of their product.
pub fn tensor_report(ca: &Case, cb: &Case, grid: Option<usize>) -> Report {
    let mut report = Report::new("tensor", &format!("{} x {}", ca.name, cb.name));
    report.factors = vec![verify_case(ca, "verify"), verify_case(cb, "verify")];
    let n = ca.n + cb.n;
    let mut bounds = ca.verify.bounds.clone();
    bounds.extend(cb.verify.bounds.iter().copied());
    let grid_points = grid.unwrap_or_else(|| default_grid_points(n));
    let seed = ca.verify.seed;
    report.environment = Some(Environment {
        dimension: n,
        seed,
        grid_points,
        h: ca.hs.clone(),
        bounds: bounds.clone(),
        test_functions: ca.verify.test_functions,
    });
    let run = || -> Result<f64> {
        let sa = SusyStructure::assemble(&ca.op, &ca.dec, QuadratureConfig::default())?;
        let sb = SusyStructure::assemble(&cb.op, &cb.dec, QuadratureConfig::default())?;
        let s = tensorize(&sa, &sb);
        let op = tensorize_operators(&ca.op, &cb.op);
        let us = test_functions(n, &bounds, ca.verify.test_functions, seed);
        factorization_check(&s, &op, &us, &tensor_points(&bounds, grid_points), &ca.hs)
    };
    match run() {
        Ok(r) => {
            let tol = ca.verify.tolerances.factorization.min(cb.verify.tolerances.factorization);
            report.checks.push(Check::new("factorization", r, tol));
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report.finish();
    report
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    let json = report.to_json();
    match out {
        Some(p) => std::fs::write(p, json)?,
        None => print!("{json}"),
    }
    for c in &report.checks {
        eprintln!(
            "{:<24} {:>12.3e} <= {:<10.3e} {}{}",
            c.name,
            c.max_residual,
            c.tolerance,
            if c.pass { "ok" } else { "FAILED" },
            if c.informational { " (info)" } else { "" }
        );
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    eprintln!("verdict: {:?}", report.verdict);
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var("SUSYFACTOR_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // an already initialized pool keeps its size
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Exit codes: 0 pass, 1 fail, 2 input error.
pub fn run(cli: Cli) -> ExitCode {
    configure_threads();
    let result = match &cli.command {
        Command::Verify { spec, flags } => cmd_verify(spec, &flags.overrides()).map(|r| (r, flags.out.clone())),
        Command::Gallery {
            name,
            print_spec: true,
            ..
        } => {
            return match spec_text(name) {
                Ok(t) => {
                    print!("{t}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Gallery { name, flags, .. } => run_gallery(name, &flags.overrides()).map(|r| (r, flags.out.clone())),
        Command::Morse2d { spec, flags } => cmd_morse2d(spec, &flags.overrides()).map(|r| (r, flags.out.clone())),
        Command::Tensor { spec_a, spec_b, flags } => {
            cmd_tensor(spec_a, spec_b, &flags.overrides()).map(|r| (r, flags.out.clone()))
        }
    };
    match result {
        Ok((report, out)) => {
            if let Err(e) = emit(&report, out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if report.verdict == Verdict::Pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn main() -> ExitCode {
    run(Cli::parse())
}
