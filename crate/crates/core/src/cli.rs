//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    coercivity_constant, convergence_study, error_norms, inf_sup_for, locking_study, solve_mixed,
    ExactSolution, ManufacturedProblem, SolverConfig, StudyConfig,
};
use crate::analysis::convergence::{check_levels, ERROR_QUADRATURE_DEGREE};
use crate::assembly::Form;
use crate::discretization::Discretization;
use crate::error::{FeccError, Result};
use crate::geometry::Point2;
use crate::io::{convergence_csv, export_vtk, infsup_csv, locking_csv, read_mesh, write_mesh, InfSupRow};
use crate::material::MaterialParams;
use crate::mesh::{MeshFamily, PrimalMesh, MAX_PERTURB};
use crate::solve::{SolveMethod, SolveOptions};
use crate::spaces::{DisplacementField, PressureField};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fecc", version, about = "Mixed displacement-pressure finite elements on cell-centered dual meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated mesh in FECCMESH format.
    MeshGen(MeshGenArgs),
    /// Solve one problem and print a summary.
    #[command(after_help = SOLVE_HELP)]
    Solve(SolveArgs),
    /// Manufactured-solution refinement study (CSV).
    #[command(after_help = CONVERGENCE_HELP)]
    Convergence(ConvergenceArgs),
    /// Discrete inf-sup (and optionally coercivity) constants per level (CSV).
    #[command(after_help = INFSUP_HELP)]
    Infsup(InfSupArgs),
    /// Mixed versus pure-displacement errors at one level (CSV).
    #[command(after_help = LOCKING_HELP)]
    Locking(LockingArgs),
}

const SOLVE_HELP: &str = "Summary lines on stdout are 'key=value'. With --load manufactured the \
body force is that of the closed-form solution on the unit square and the error norms are printed.";
const CONVERGENCE_HELP: &str = "CSV schema (header line '# fecc-convergence v1'):\n  \
family,form,condensed,kappa,nu,lambda,mu,n,h,n_u,n_p,l2_u,h1_u,l2_p,residual\n\
h = 1/n. Footer comment lines give least-squares rates and constants per nu, excluding the coarsest level when three or more levels are run.";
const INFSUP_HELP: &str = "CSV schema (header line '# fecc-infsup v1'):\n  \
family,n,h,beta,unfiltered_min,alpha0\n\
beta uses the eps form with mu = 1/2; alpha0 is empty unless --coercivity is given. A footer comment gives min(beta) and max/min.";
const LOCKING_HELP: &str = "CSV schema (header line '# fecc-locking v1'):\n  \
family,n,nu,lambda,mixed_l2_u,baseline_l2_u,ratio\n\
ratio = baseline_l2_u / mixed_l2_u, for the eps-form manufactured problem.";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Generator {
    Quads,
    PerturbedQuads,
    Triangles,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    Eps,
    Grad,
}

impl From<FormArg> for Form {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Eps => Form::Eps,
            FormArg::Grad => Form::Grad,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Uzawa,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LoadArg {
    /// Body force of the closed-form solution.
    Manufactured,
    /// f = (1, 0).
    Constant,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "triangles")]
    generator: Generator,
    /// Vertex perturbation as a fraction of h (perturbed-quads only).
    #[arg(long, default_value_t = 0.2)]
    perturb: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FamilyArgs {
    fn family(&self) -> Result<MeshFamily> {
        Ok(match self.generator {
            Generator::Quads => MeshFamily::Quads,
            Generator::Triangles => MeshFamily::Triangles,
            Generator::PerturbedQuads => {
                check_perturb(self.perturb)?;
                MeshFamily::PerturbedQuads {
                    perturb: self.perturb,
                    seed: self.seed,
                }
            }
        })
    }
}

fn check_perturb(perturb: f64) -> Result<()> {
    if (0.0..MAX_PERTURB).contains(&perturb) {
        Ok(())
    } else {
        Err(FeccError::InvalidArgument(format!(
            "--perturb must lie in [0, {MAX_PERTURB}) (got {perturb})"
        )))
    }
}

#[derive(Debug, Args)]
struct MeshGenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 4)]
    nx: usize,
    /// Defaults to --nx.
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "eps")]
    form: FormArg,
    /// Eliminate dual-center unknowns before solving (grad form only).
    #[arg(long)]
    condensed: bool,
    /// Pressure coupling factor in the momentum equation.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, value_enum, default_value = "direct")]
    method: MethodArg,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let config = SolverConfig {
            form: self.form.into(),
            condensed: self.condensed,
            kappa: self.kappa,
            options: SolveOptions {
                method: match self.method {
                    MethodArg::Direct => SolveMethod::Direct,
                    MethodArg::Uzawa => SolveMethod::Uzawa,
                },
                tolerance: self.tol,
                max_iterations: self.max_iterations,
            },
        };
        config.options.validate()?;
        if !(config.kappa > 0.0 && config.kappa.is_finite()) {
            return Err(FeccError::InvalidArgument(format!("--kappa must be positive (got {})", config.kappa)));
        }
        if config.condensed && config.form == Form::Eps {
            return Err(FeccError::InvalidArgument("--condensed requires --form grad".into()));
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Mesh file; when absent a mesh is generated.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 8)]
    nx: usize,
    #[arg(long)]
    ny: Option<usize>,
    /// Young's modulus (with --nu).
    #[arg(long = "E")]
    young: Option<f64>,
    /// Poisson ratio, 0 <= nu < 0.5.
    #[arg(long)]
    nu: Option<f64>,
    /// First Lame constant (with --mu).
    #[arg(long)]
    lambda: Option<f64>,
    /// Shear modulus (with --lambda).
    #[arg(long)]
    mu: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value = "manufactured")]
    load: LoadArg,
    /// VTK output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    levels: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4999")]
    nu: Vec<f64>,
    #[arg(long = "E", default_value_t = 1.0)]
    young: f64,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InfSupArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    levels: Vec<usize>,
    /// Also compute the kernel coercivity constant (slower).
    #[arg(long)]
    coercivity: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LockingArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Subdivisions per side.
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4999")]
    nu: Vec<f64>,
    #[arg(long = "E", default_value_t = 1.0)]
    young: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Largest level accepted by the dense eigensolves.
const MAX_DENSE_LEVEL: usize = 16;

fn material(args: &SolveArgs) -> Result<MaterialParams> {
    match (args.young, args.nu, args.lambda, args.mu) {
        (young, Some(nu), None, None) => MaterialParams::from_young_poisson(young.unwrap_or(1.0), nu),
        (None, None, Some(lambda), Some(mu)) => MaterialParams::from_lame(lambda, mu),
        (None, None, None, None) => Err(FeccError::InvalidArgument(
            "give material parameters as --nu [--E] or as --lambda and --mu".into(),
        )),
        _ => Err(FeccError::InvalidArgument(
            "give exactly one of (--E, --nu) or (--lambda, --mu)".into(),
        )),
    }
}

fn generated(family: &MeshFamily, nx: usize, ny: Option<usize>) -> Result<PrimalMesh> {
    let ny = ny.unwrap_or(nx);
    if nx == 0 || ny == 0 {
        return Err(FeccError::InvalidArgument("--nx and --ny must be positive".into()));
    }
    match *family {
        MeshFamily::Quads => crate::mesh::generate_structured_quads(nx, ny, 0.0, 0),
        MeshFamily::PerturbedQuads { perturb, seed } => crate::mesh::generate_structured_quads(nx, ny, perturb, seed),
        MeshFamily::Triangles => crate::mesh::generate_structured_triangles(nx, ny),
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_solve(args: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let params = material(args)?;
    let config = args.solver.config()?;
    let mesh = match &args.mesh {
        Some(path) => {
            let parsed = read_mesh(path)?;
            for w in &parsed.warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            parsed.mesh
        }
        None => generated(&args.family.family()?, args.nx, args.ny)?,
    };
    let disc = Discretization::new(mesh)?;
    let problem = match args.load {
        LoadArg::Manufactured => Some(ManufacturedProblem::new(params.lambda, params.mu, config.form)?),
        LoadArg::Constant => None,
    };
    let f = |x: Point2| problem.as_ref().map_or([1.0, 0.0], |p| p.f(x));
    let (_, sol) = solve_mixed(&disc, params.lambda, params.mu, &config, &f)?;
    let n_u = if config.condensed { 2 * disc.dofs.n_cell() } else { disc.dofs.n_u() };
    writeln!(stdout, "cells={}", disc.primal.num_cells())?;
    writeln!(stdout, "vertices={}", disc.primal.num_vertices())?;
    writeln!(stdout, "form={} condensed={} kappa={}", config.form, config.condensed, config.kappa)?;
    writeln!(stdout, "E={:.11e} nu={:.11e} lambda={:.11e} mu={:.11e}", params.young, params.poisson, params.lambda, params.mu)?;
    writeln!(stdout, "n_u={n_u}")?;
    writeln!(stdout, "n_u_full={}", disc.dofs.n_u())?;
    writeln!(stdout, "n_p={}", disc.dofs.n_p())?;
    writeln!(stdout, "residual={:.11e}", sol.residual)?;
    writeln!(stdout, "pressure_mean={:.11e}", sol.pressure_mean)?;
    writeln!(stdout, "iterations={}", sol.iterations)?;
    if let Some(problem) = &problem {
        let e = error_norms(&disc, &sol.u, &sol.p, problem, ERROR_QUADRATURE_DEGREE)?;
        writeln!(stdout, "l2_u={:.11e} h1_u={:.11e} l2_p={:.11e}", e.l2_u, e.h1_u, e.l2_p)?;
    }
    if let Some(path) = &args.out {
        let u = DisplacementField::from_dofs(&disc.dofs, &sol.u);
        let p = PressureField { values: sol.p.clone() };
        export_vtk(&disc.third, &u, &p, path)?;
        writeln!(stdout, "vtk={}", path.display())?;
    }
    Ok(())
}

fn run_convergence(args: &ConvergenceArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = StudyConfig {
        family: args.family.family()?,
        levels: args.levels.clone(),
        young: args.young,
        solver: args.solver.config()?,
    };
    check_levels(&config.levels)?;
    for &nu in &args.nu {
        MaterialParams::from_young_poisson(args.young, nu)?;
    }
    let reports = convergence_study(&config, &args.nu)?;
    emit(&args.out, &convergence_csv(&reports), stdout)
}

/// Inf-sup (and optional coercivity) rows for a mesh family.
pub fn infsup_rows(family: &MeshFamily, levels: &[usize], coercivity: bool) -> Result<Vec<InfSupRow>> {
    if let Some(&n) = levels.iter().find(|&&n| n == 0 || n > MAX_DENSE_LEVEL) {
        return Err(FeccError::InvalidArgument(format!(
            "dense eigensolves need levels in 1..={MAX_DENSE_LEVEL} (got {n})"
        )));
    }
    levels
        .iter()
        .map(|&n| {
            let disc = Discretization::new(family.generate(n)?)?;
            let r = inf_sup_for(&disc)?;
            let alpha0 = if coercivity { Some(coercivity_constant(&disc, 0.5, Form::Eps)?) } else { None };
            Ok(InfSupRow {
                n,
                h: 1.0 / n as f64,
                beta: r.beta,
                unfiltered_min: r.unfiltered_min,
                alpha0,
            })
        })
        .collect()
}

fn run_infsup(args: &InfSupArgs, stdout: &mut dyn Write) -> Result<()> {
    let family = args.family.family()?;
    let rows = infsup_rows(&family, &args.levels, args.coercivity)?;
    emit(&args.out, &infsup_csv(family.name(), &rows), stdout)
}

fn run_locking(args: &LockingArgs, stdout: &mut dyn Write) -> Result<()> {
    let family = args.family.family()?;
    if args.n == 0 {
        return Err(FeccError::InvalidArgument("--n must be positive".into()));
    }
    for &nu in &args.nu {
        MaterialParams::from_young_poisson(args.young, nu)?;
    }
    let rows = locking_study(&family, args.n, args.young, &args.nu)?;
    emit(&args.out, &locking_csv(family.name(), &rows), stdout)
}

fn run_mesh_gen(args: &MeshGenArgs) -> Result<()> {
    let mesh = generated(&args.family.family()?, args.nx, args.ny)?;
    write_mesh(&mesh, Path::new(&args.out))
}

fn error_line(e: &FeccError, code: i32) -> String {
    let message = e.to_string().replace('\n', " ");
    format!("fecc-error kind={} exit={code} message={message}", e.kind())
}

/// Runs the CLI on `argv` (including the program name) and returns the exit status.
pub fn run_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
                let first = rendered.lines().next().unwrap_or("").replace("error: ", "");
                let _ = writeln!(stderr, "fecc-error kind=usage exit={EXIT_USAGE} message={first}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::MeshGen(a) => run_mesh_gen(a),
        Command::Solve(a) => run_solve(a, stdout, stderr),
        Command::Convergence(a) => run_convergence(a, stdout),
        Command::Infsup(a) => run_infsup(a, stdout),
        Command::Locking(a) => run_locking(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = if e.is_usage() { EXIT_USAGE } else { EXIT_NUMERICAL };
            let _ = writeln!(stderr, "{}", error_line(&e, code));
            code
        }
    }
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut argv = vec!["fecc"];
        argv.extend_from_slice(args);
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn nu_at_half_is_a_usage_error() {
        let (code, _, err) = run_capture(&["solve", "--nu", "0.5"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("kind=invalid-argument"), "{err}");
        assert!(err.contains("0.5"), "{err}");
    }

    #[test]
    fn conflicting_material_flags() {
        let (code, _, _) = run_capture(&["solve", "--nu", "0.3", "--lambda", "1", "--mu", "1"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_capture(&["solve", "--form", "eps", "--condensed", "--nu", "0.3"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn unknown_flag_and_help() {
        assert_eq!(run_capture(&["solve", "--bogus"]).0, EXIT_USAGE);
        let (code, out, _) = run_capture(&["convergence", "--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("fecc-convergence v1"));
    }

    #[test]
    fn generated_solve_summary() {
        let (code, out, err) = run_capture(&[
            "solve", "--generator", "quads", "--nx", "4", "--nu", "0.4999", "--form", "grad", "--condensed",
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.lines().any(|l| l == "n_u=32"), "{out}");
    }

    #[test]
    fn infsup_rejects_large_levels() {
        assert_eq!(run_capture(&["infsup", "--levels", "32"]).0, EXIT_USAGE);
    }
}
