//! Command-line front end.
//!
//! Every command writes its artifacts into `--out` (created if missing) and
//! prints a short summary on stdout. Reports are deterministic for a given
//! configuration except for their `timings` field.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::assembly::{assemble_system, AssemblyOptions, IncidentWave, Problem};
use crate::geometry::{generate_sine_scene, ElasticMedium, Scene, SineSceneRanges};
use crate::potentials::{eval_total_field_grid, FieldOptions, GridSpec};
use crate::solver::{convergence_study, solve, sobolev_norm, DensitySolution};
use crate::Error;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "ELASTIC_ARCS_THREADS";

pub mod exit {
    pub const OK: u8 = 0;
    /// Bad flags (reported by the argument parser).
    pub const USAGE: u8 = 2;
    /// Invalid scene, medium, grid or other input.
    pub const INPUT: u8 = 3;
    /// Expansion, quadrature or linear solve failed.
    pub const NUMERICAL: u8 = 4;
    /// Reading or writing files failed.
    pub const IO: u8 = 5;
}

const EXIT_CODES: &str = "\
Exit codes: 0 success, 2 usage error, 3 invalid input (scene, medium, grid, flags),
4 numerical failure (expansion, quadrature, singular system), 5 file I/O error.
Threads: set ELASTIC_ARCS_THREADS to fix the worker count.";

#[derive(Debug, Parser)]
#[command(name = "elastic-arcs", version, about = "Spectral Galerkin solver for elastic scattering by open arcs", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a scene file and report wavenumbers and arc clearance.
    Check(CheckArgs),
    /// Assemble and solve at one degree; writes solution.json.
    Solve(SolveArgs),
    /// Convergence study against an overkill solution; writes convergence.json.
    Converge(ConvergeArgs),
    /// Solve, then evaluate the total field on a grid; writes field.csv and field.json.
    Field(FieldArgs),
    /// Frequency or arc-count sweep on generated sine scenes; writes bench.json.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Scene file (JSON).
    #[arg(long)]
    pub scene: PathBuf,
    /// Output directory; the report is also printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Numerics {
    /// Compression tolerance for cross-arc blocks.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Relative tolerance of the right-hand side expansions.
    #[arg(long, default_value_t = 1e-12)]
    pub rhs_tol: f64,
}

impl Numerics {
    fn options(&self) -> Result<AssemblyOptions, Error> {
        for (name, v) in [("tol", self.tol), ("rhs-tol", self.rhs_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("--{name} must be a finite non-negative number")));
            }
        }
        Ok(AssemblyOptions {
            tol: self.tol,
            rhs_tol: self.rhs_tol,
            ..Default::default()
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct Setup {
    /// Scene file (JSON).
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_parser = parse_problem)]
    pub problem: Problem,
    /// Incidence angle of the p-plane wave, in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub numerics: Numerics,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub setup: Setup,
    /// Polynomial degree per arc.
    #[arg(long)]
    pub degree: usize,
    /// Also write the assembled blocks to `<out>/matrix`.
    #[arg(long)]
    pub dump_matrix: bool,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub setup: Setup,
    /// Largest degree in the study.
    #[arg(long)]
    pub degree: usize,
    /// Spacing of the studied degrees (they run from `step` to `degree`).
    #[arg(long, default_value_t = 4)]
    pub step: usize,
    /// Reference degree is `degree + overkill`.
    #[arg(long, default_value_t = 60)]
    pub overkill: usize,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub setup: Setup,
    #[arg(long)]
    pub degree: usize,
    /// "xmin,xmax,ymin,ymax,nx,ny"
    #[arg(long, allow_hyphen_values = true)]
    pub grid: GridSpec,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = parse_problem, default_value = "dirichlet")]
    pub problem: Problem,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Polynomial degree per arc for every row.
    #[arg(long)]
    pub degree: usize,
    /// Reference degree is `degree + overkill`.
    #[arg(long, default_value_t = 60)]
    pub overkill: usize,
    /// Comma-separated frequencies (default: the medium's, 50).
    #[arg(long, value_delimiter = ',')]
    pub omega_list: Vec<f64>,
    /// Comma-separated arc counts (default: 10).
    #[arg(long, value_delimiter = ',')]
    pub arc_count_list: Vec<usize>,
    /// Seed of the generated sine scene.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub numerics: Numerics,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_problem(s: &str) -> Result<Problem, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => exit::IO,
        Error::InvalidArgument(_)
        | Error::Geometry(_)
        | Error::Medium(_)
        | Error::Generation(_)
        | Error::Json(_)
        | Error::MaskedPoint { .. } => exit::INPUT,
        Error::Block { source, .. } => exit_code(source),
        Error::OutOfDomain { .. }
        | Error::NonConvergence { .. }
        | Error::SingularEvaluation
        | Error::Pole { .. }
        | Error::Singular(_)
        | Error::Quadrature { .. } => exit::NUMERICAL,
    }
}

/// Reads the thread count from [`THREADS_ENV`], if set.
pub fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // a pool already built by an earlier call keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Entry point shared by the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(&cli.command)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::from(exit::OK)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Runs one command and returns the summary line.
pub fn run(command: &Command) -> Result<String, Error> {
    match command {
        Command::Check(a) => cmd_check(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Field(a) => cmd_field(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn cmd_check(args: &CheckArgs) -> Result<String, Error> {
    let scene = Scene::load(&args.scene)?;
    let report = scene.check()?;
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(dir) = &args.out {
        write_json(dir, "check.json", &report)?;
    }
    Ok(text)
}

#[derive(Debug, Serialize)]
pub struct SolveTimings {
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveOutput {
    pub problem: Problem,
    pub degree: usize,
    pub arcs: usize,
    pub alpha: f64,
    pub omega: f64,
    pub tol: f64,
    pub rhs_tol: f64,
    pub nnz_fraction: f64,
    pub residual: f64,
    pub rcond: f64,
    /// Norm of the coefficients: `H^{-1/2}`-type for Dirichlet, `H^{1/2}` for Neumann.
    pub sobolev_norm: f64,
    /// Per arc, `[re, im]` pairs in mode-major order (mode `l`, component `p` at `2l + p`).
    pub coefficients: Vec<Vec<num_complex::Complex64>>,
    pub timings: SolveTimings,
}

fn solve_setup(setup: &Setup, degree: usize) -> Result<(Scene, IncidentWave, DensitySolution, SolveOutput), Error> {
    let scene = Scene::load(&setup.scene)?;
    let wave = IncidentWave::new(setup.alpha);
    let opts = setup.numerics.options()?;
    let t = Instant::now();
    let system = assemble_system(setup.problem, &scene, &wave, degree, &opts)?;
    let assembly_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let (solution, report) = solve(&system)?;
    let output = SolveOutput {
        problem: setup.problem,
        degree,
        arcs: scene.arcs.len(),
        alpha: setup.alpha,
        omega: scene.medium.omega,
        tol: opts.tol,
        rhs_tol: opts.rhs_tol,
        nnz_fraction: system.nnz_fraction,
        residual: report.residual,
        rcond: report.rcond,
        sobolev_norm: sobolev_norm(&solution),
        coefficients: solution.coeffs.clone(),
        timings: SolveTimings {
            assembly_seconds,
            solve_seconds: t.elapsed().as_secs_f64(),
        },
    };
    Ok((scene, wave, solution, output))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<String, Error> {
    let (scene, wave, _, output) = solve_setup(&args.setup, args.degree)?;
    let path = write_json(&args.setup.out, "solution.json", &output)?;
    if args.dump_matrix {
        let system = assemble_system(args.setup.problem, &scene, &wave, args.degree, &args.setup.numerics.options()?)?;
        system.dump(&args.setup.out.join("matrix"))?;
    }
    Ok(format!(
        "{} N={} arcs={} residual={:.3e} nnz={:.1}% -> {}",
        output.problem,
        output.degree,
        output.arcs,
        output.residual,
        100.0 * output.nnz_fraction,
        path.display()
    ))
}

pub fn cmd_converge(args: &ConvergeArgs) -> Result<String, Error> {
    if args.step == 0 || args.step > args.degree {
        return Err(Error::InvalidArgument("--step must be in 1..=degree".into()));
    }
    let scene = Scene::load(&args.setup.scene)?;
    let degrees: Vec<usize> = (args.step..=args.degree).step_by(args.step).collect();
    let report = convergence_study(
        args.setup.problem,
        &scene,
        &IncidentWave::new(args.setup.alpha),
        &degrees,
        args.overkill,
        &args.setup.numerics.options()?,
    )?;
    let path = write_json(&args.setup.out, "convergence.json", &report)?;
    let fit = match &report.fit {
        Some(f) => format!("slope={:.4} corr={:.4} rate={:.4}", f.slope, f.correlation, f.rate),
        None => "no fit".into(),
    };
    let last = report.error_at(args.degree).map_or("failed".into(), |e| format!("{e:.3e}"));
    Ok(format!(
        "{} reference N={} error(N={})={last} {fit} -> {}",
        report.problem,
        report.reference_degree,
        args.degree,
        path.display()
    ))
}

pub fn cmd_field(args: &FieldArgs) -> Result<String, Error> {
    args.grid.validate()?;
    let (scene, wave, solution, output) = solve_setup(&args.setup, args.degree)?;
    let opts = FieldOptions::default();
    let t = Instant::now();
    let grid = eval_total_field_grid(&solution, &scene, &wave, &args.grid, opts)?;
    let field_seconds = t.elapsed().as_secs_f64();
    std::fs::create_dir_all(&args.setup.out)?;
    let csv = args.setup.out.join("field.csv");
    grid.write_csv(&csv)?;
    let mut header = grid.header(&solution, &scene, &wave, &opts);
    header["residual"] = output.residual.into();
    header["timings"] = serde_json::json!({
        "assembly_seconds": output.timings.assembly_seconds,
        "solve_seconds": output.timings.solve_seconds,
        "field_seconds": field_seconds,
    });
    write_json(&args.setup.out, "field.json", &header)?;
    Ok(format!(
        "{}x{} points, {} masked ({} quadrature) -> {}",
        args.grid.nx,
        args.grid.ny,
        grid.masked_count(),
        grid.quadrature_failures,
        csv.display()
    ))
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub omega: f64,
    pub arcs: usize,
    pub degree: usize,
    pub reference_degree: usize,
    /// Sobolev-norm distance to the reference solution; `null` on failure.
    pub error: Option<f64>,
    pub nnz_fraction: f64,
    pub residual: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct BenchTiming {
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub problem: Problem,
    pub alpha: f64,
    pub seed: u64,
    pub tol: f64,
    pub rhs_tol: f64,
    pub rows: Vec<BenchRow>,
    /// Wall times per row, in row order; not part of the reproducible content.
    pub timings: Vec<BenchTiming>,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String, Error> {
    let opts = args.numerics.options()?;
    let base = ElasticMedium::default();
    let omegas = if args.omega_list.is_empty() { vec![base.omega] } else { args.omega_list.clone() };
    let counts = if args.arc_count_list.is_empty() { vec![10] } else { args.arc_count_list.clone() };
    let largest = *counts.iter().max().expect("non-empty");
    let ranges = SineSceneRanges::default();
    // generated once; smaller counts are prefixes of the same scene
    let full = generate_sine_scene(largest, args.seed, &ranges, base)?;
    let wave = IncidentWave::new(args.alpha);
    let mut report = BenchReport {
        problem: args.problem,
        alpha: args.alpha,
        seed: args.seed,
        tol: opts.tol,
        rhs_tol: opts.rhs_tol,
        rows: Vec::new(),
        timings: Vec::new(),
    };
    let mut lines = Vec::new();
    for &omega in &omegas {
        let medium = base.with_omega(omega);
        medium.validate()?;
        for &count in &counts {
            let mut scene = full.prefix(count)?;
            scene.medium = medium;
            let t = Instant::now();
            let study = convergence_study(args.problem, &scene, &wave, &[args.degree], args.overkill, &opts)?;
            let entry = &study.entries[0];
            report.rows.push(BenchRow {
                omega,
                arcs: count,
                degree: args.degree,
                reference_degree: study.reference_degree,
                error: entry.error,
                nnz_fraction: study.nnz_fraction,
                residual: entry.residual,
                failure: entry.failure.clone(),
            });
            report.timings.push(BenchTiming {
                assembly_seconds: study.timings.assembly_seconds,
                solve_seconds: study.timings.reference_solve_seconds + study.timings.solve_seconds.iter().sum::<f64>(),
                total_seconds: t.elapsed().as_secs_f64(),
            });
            lines.push(format!(
                "omega={omega} arcs={count} N={} error={} nnz={:.1}%",
                args.degree,
                entry.error.map_or("failed".into(), |e| format!("{e:.3e}")),
                100.0 * study.nnz_fraction
            ));
        }
    }
    let path = write_json(&args.out, "bench.json", &report)?;
    lines.push(format!("-> {}", path.display()));
    Ok(lines.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_command() {
        let ok = |args: &[&str]| Cli::try_parse_from(args).map(|_| ()).map_err(|e| e.to_string());
        ok(&["x", "check", "--scene", "s.json"]).unwrap();
        ok(&["x", "solve", "--scene", "s.json", "--problem", "neumann", "--degree", "8", "--alpha", "-0.5"]).unwrap();
        ok(&["x", "converge", "--scene", "s.json", "--problem", "dirichlet", "--degree", "40", "--overkill", "20"]).unwrap();
        ok(&["x", "field", "--scene", "s.json", "--problem", "dirichlet", "--degree", "8", "--grid", "-2,2,-1,1,5,3"]).unwrap();
        ok(&["x", "bench", "--degree", "20", "--omega-list", "10,50", "--arc-count-list", "2,3", "--seed", "4"]).unwrap();
        assert!(ok(&["x", "solve", "--scene", "s.json", "--problem", "robin", "--degree", "8"]).is_err());
        assert!(ok(&["x", "field", "--scene", "s.json", "--problem", "dirichlet", "--degree", "8", "--grid", "1,2"]).is_err());
    }

    #[test]
    fn defaults_match_documented_values() {
        let cli = Cli::try_parse_from(["x", "converge", "--scene", "s", "--problem", "dirichlet", "--degree", "8"]).unwrap();
        let Command::Converge(a) = cli.command else { panic!() };
        assert_eq!((a.setup.numerics.tol, a.setup.numerics.rhs_tol, a.overkill, a.step), (1e-10, 1e-12, 60, 4));
    }

    #[test]
    fn error_classes_have_distinct_codes() {
        assert_eq!(exit_code(&Error::Medium("mu".into())), exit::INPUT);
        assert_eq!(exit_code(&Error::Singular("x".into())), exit::NUMERICAL);
        let io = Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "x"));
        assert_eq!(exit_code(&io), exit::IO);
        let nested = Error::Block {
            row: 0,
            col: 1,
            source: Box::new(Error::NonConvergence { cap: 1, tail: 1.0 }),
        };
        assert_eq!(exit_code(&nested), exit::NUMERICAL);
    }
}
