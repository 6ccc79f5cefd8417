//! Command-line frontend for STM-NFPE symmetry analysis.
//!
//! Every subcommand resolves its inputs from flags merged over an optional
//! `key=value` config file (flags win), runs one library pipeline, and writes
//! its outputs plus a `manifest.json` (inputs, versions, seed) into the
//! output directory. Runs are deterministic given the same flags, config,
//! and seed.
//!
//! Exit codes:
//! * 0: success
//! * 1: internal failure, including verification mismatches
//! * 2: invalid or degenerate input
//! * 3: `verify-all` completed but recorded findings

mod caseref;
mod cmd_classify;
mod cmd_evolve;
mod cmd_reduce;
mod cmd_residual;
mod cmd_tables;
mod cmd_verify;
mod ctx;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::ctx::{InputError, RunContext};

#[derive(Parser)]
#[command(
    name = "nfpe-lie",
    version,
    about = "Lie point symmetry toolkit for the STM nonlinear Fokker-Planck equation"
)]
struct Cli {
    /// Key=value config file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for results and the run manifest (default .).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Seed for seeded subcommands, recorded in every manifest (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify (r, k), list the symmetry generators, and verify each one
    /// against the invariance condition.
    Classify(ClassifyArgs),
    /// Write commutator and adjoint tables for a case family and diff them
    /// against the built-in closed forms.
    Tables(TablesArgs),
    /// Build a symmetry reduction recipe, certify it on test functions, and
    /// optionally integrate the reduced ODE into a solution grid.
    Reduce(ReduceArgs),
    /// Integrate a reduced ODE and write the profile samples.
    SolveOde(SolveOdeArgs),
    /// Advance an initial density under the equation with a positivity-aware
    /// finite-volume scheme.
    Evolve(EvolveArgs),
    /// Measure the discrete residual of a candidate solution, either a
    /// closed-form expression or a stored grid.
    Residual(ResidualArgs),
    /// Recompute the whole catalog, diff it against frozen expectations, and
    /// report checks plus findings.
    VerifyAll(VerifyAllArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Entropy parameter r, an integer or p/q ratio.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    /// Entropy parameter k, an integer or p/q ratio (k != 0).
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Diffusion coefficient Omega (default 1).
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
}

#[derive(Args)]
struct TablesArgs {
    /// Case family: A, B, or C.
    #[arg(long)]
    case: Option<String>,
    /// Delta for case C (rejected for A and B, whose delta is fixed).
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Comma-separated adjoint parameter values (default 0.1,0.5,1).
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Case family: A, B, or C.
    #[arg(long)]
    case: Option<String>,
    /// Case line: i, ii, iii, or iv (default i for A and B).
    #[arg(long)]
    part: Option<String>,
    /// Delta for case C.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Entropy parameter k, fixing case C's delta through the line.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Representative: catalog letter (a, b, ...) or name like X1X3.
    #[arg(long)]
    rep: Option<String>,
    /// Representative parameter alpha.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Representative parameter beta.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Representative parameter gamma.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Diffusion coefficient Omega (default 1).
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Also integrate the reduced ODE and write a solution grid with its
    /// residual report.
    #[arg(long)]
    solve: bool,
    /// Initial point of the ODE integration (default 0).
    #[arg(long, allow_hyphen_values = true)]
    zeta0: Option<String>,
    /// Profile value at zeta0 (default 1, must be positive).
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    /// Profile slope at zeta0 (default 0).
    #[arg(long, allow_hyphen_values = true)]
    yp0: Option<String>,
    /// Integration endpoint (default: far enough to cover the grid window).
    #[arg(long, allow_hyphen_values = true)]
    zeta_end: Option<String>,
    /// Maximum ODE step size (default 5e-4).
    #[arg(long)]
    max_step: Option<String>,
    /// Grid window override; defaults come from the recipe.
    #[arg(long, allow_hyphen_values = true)]
    x_lo: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_hi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<String>,
    /// Grid columns (default 201) and saved time levels (default 11).
    #[arg(long)]
    n_x: Option<String>,
    #[arg(long)]
    n_t: Option<String>,
}

#[derive(Args)]
struct SolveOdeArgs {
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    part: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long)]
    rep: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    zeta0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    yp0: Option<String>,
    /// Integration endpoint (required).
    #[arg(long, allow_hyphen_values = true)]
    zeta_end: Option<String>,
    #[arg(long)]
    max_step: Option<String>,
    /// Relative and absolute tolerances of the adaptive integrator.
    #[arg(long)]
    rel_tol: Option<String>,
    #[arg(long)]
    abs_tol: Option<String>,
    /// Number of profile samples written to ode.csv (default 501).
    #[arg(long)]
    n_samples: Option<String>,
}

#[derive(Args)]
struct EvolveArgs {
    /// Entropy parameters of the equation.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Initial profile as an expression in x, e.g. "1 + exp(-x^2)".
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
    /// Initial profile from a grid CSV; its first time level is used.
    #[arg(long, value_name = "FILE")]
    initial_csv: Option<String>,
    /// Spatial window (required with --initial).
    #[arg(long, allow_hyphen_values = true)]
    x_lo: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_hi: Option<String>,
    /// Grid nodes (default 201).
    #[arg(long)]
    n_x: Option<String>,
    /// Time span; t0 defaults to 0 (or the CSV's first level), t1 is
    /// required.
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<String>,
    /// Saved time levels including endpoints (default 11).
    #[arg(long)]
    n_saves: Option<String>,
    /// Safety factor on the stability bounds, in (0, 1] (default 0.4).
    #[arg(long)]
    cfl: Option<String>,
    /// Hard cap on time steps (default 20000000).
    #[arg(long)]
    max_steps: Option<String>,
}

#[derive(Args)]
struct ResidualArgs {
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Candidate solution as an expression in x and t; measured on three
    /// refinement levels to estimate convergence slopes.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// Candidate solution as a grid CSV; measured on its own grid.
    #[arg(long, value_name = "FILE")]
    grid: Option<String>,
    /// Sampling window for --u (defaults -1, 1, 0, 1/2).
    #[arg(long, allow_hyphen_values = true)]
    x_lo: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_hi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<String>,
    /// Coarsest grid for --u (defaults 51 by 5).
    #[arg(long)]
    n_x: Option<String>,
    #[arg(long)]
    n_t: Option<String>,
}

#[derive(Args)]
struct VerifyAllArgs {
    /// Restrict the run, e.g. case=B.
    #[arg(long)]
    only: Option<String>,
}

/// Evenly spaced samples including both endpoints.
pub(crate) fn linspace((a, b): (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<InputError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let ctx = |name| RunContext::new(name, cli.config.as_deref(), cli.out.as_deref(), cli.seed);
    match cli.command {
        Command::Classify(args) => cmd_classify::run(ctx("classify")?, args),
        Command::Tables(args) => cmd_tables::run(ctx("tables")?, args),
        Command::Reduce(args) => cmd_reduce::run(ctx("reduce")?, args),
        Command::SolveOde(args) => cmd_reduce::run_solve_ode(ctx("solve-ode")?, args),
        Command::Evolve(args) => cmd_evolve::run(ctx("evolve")?, args),
        Command::Residual(args) => cmd_residual::run(ctx("residual")?, args),
        Command::VerifyAll(args) => cmd_verify::run(ctx("verify-all")?, args),
    }
}
