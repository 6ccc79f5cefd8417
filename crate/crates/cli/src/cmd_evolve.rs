//! `evolve`: advance an initial density under the equation with the
//! positivity-aware finite-volume scheme and record the mass drift.

use std::fs::File;
use std::io::BufReader;

use anyhow::Result;
use nfpe_lie::family::make_pde;
use nfpe_lie::numerics::{evolve_pde, EvolveError, EvolveOptions, GridField};
use nfpe_lie::{Expr, NumBindings, Var};

use crate::caseref::{parse_expr, parse_rat, parse_real, parse_usize};
use crate::ctx::{bad_input, RunContext};
use crate::{linspace, EvolveArgs};

pub fn run(mut ctx: RunContext, args: EvolveArgs) -> Result<u8> {
    let r = parse_rat("--r", &ctx.resolve_required("r", args.r)?)?;
    let k = parse_rat("--k", &ctx.resolve_required("k", args.k)?)?;
    let omega = parse_real("--omega", &ctx.resolve_or("omega", args.omega, "1"))?;
    let pde = make_pde(r, k, omega).map_err(|e| bad_input(e.to_string()))?;

    let initial = ctx.resolve("initial", args.initial);
    let initial_csv = ctx.resolve("initial-csv", args.initial_csv);
    let (u0, x_range, csv_t0) = match (initial, initial_csv) {
        (Some(expr), None) => {
            let expr = parse_expr("--initial", &expr)?;
            let x_lo = parse_real("--x-lo", &ctx.resolve_required("x-lo", args.x_lo)?)?;
            let x_hi = parse_real("--x-hi", &ctx.resolve_required("x-hi", args.x_hi)?)?;
            let n_x = parse_usize("--n-x", &ctx.resolve_or("n-x", args.n_x, "201"))?;
            if !(x_hi > x_lo) {
                return Err(bad_input("the x window is empty or reversed"));
            }
            if n_x < 5 {
                return Err(bad_input("need --n-x >= 5"));
            }
            let u0 = linspace((x_lo, x_hi), n_x)
                .iter()
                .map(|&x| profile_value(&expr, x, omega))
                .collect::<Result<Vec<f64>>>()?;
            (u0, (x_lo, x_hi), None)
        }
        (None, Some(path)) => {
            let file = File::open(&path)
                .map_err(|e| bad_input(format!("cannot open --initial-csv {path}: {e}")))?;
            let field = GridField::read_csv(BufReader::new(file))
                .map_err(|e| bad_input(format!("--initial-csv {path}: {e}")))?;
            let xs = field.xs();
            let x_range = (xs[0], *xs.last().expect("grids are non-empty"));
            (field.level(0).to_vec(), x_range, field.ts().first().copied())
        }
        _ => {
            return Err(bad_input(
                "give exactly one of --initial (expression) or --initial-csv (file)",
            ))
        }
    };

    let t0_default = csv_t0.unwrap_or(0.0).to_string();
    let t0 = parse_real("--t0", &ctx.resolve_or("t0", args.t0, &t0_default))?;
    let t1 = parse_real("--t1", &ctx.resolve_required("t1", args.t1)?)?;
    let defaults = EvolveOptions::default();
    let options = EvolveOptions {
        n_saves: parse_usize(
            "--n-saves",
            &ctx.resolve_or("n-saves", args.n_saves, &defaults.n_saves.to_string()),
        )?,
        cfl: parse_real("--cfl", &ctx.resolve_or("cfl", args.cfl, &defaults.cfl.to_string()))?,
        max_steps: parse_usize(
            "--max-steps",
            &ctx.resolve_or("max-steps", args.max_steps, &defaults.max_steps.to_string()),
        )?,
    };

    let report = evolve_pde(&u0, x_range, &pde, (t0, t1), &options).map_err(|e| match e {
        EvolveError::TooFewCells { .. }
        | EvolveError::NonPositiveInitial { .. }
        | EvolveError::NonFiniteInitial { .. }
        | EvolveError::EmptySpan { .. }
        | EvolveError::EmptyRange { .. }
        | EvolveError::BadOptions(_) => bad_input(e.to_string()),
        runtime => anyhow::Error::new(runtime).context("advancing the density"),
    })?;

    println!(
        "evolved {} nodes over t in [{t0}, {t1}] in {} steps (dt in [{:.3e}, {:.3e}])",
        report.field.n_x(),
        report.steps,
        report.dt_min,
        report.dt_max
    );
    println!(
        "mass: initial {:.9}, final {:.9}, relative drift {:.3e}",
        report.mass_initial, report.mass_final, report.mass_drift
    );

    let mut csv = Vec::new();
    report.field.write_csv(&mut csv)?;
    ctx.write_text("evolve.csv", &String::from_utf8(csv)?)?;
    ctx.write_json("evolve.json", &report.to_json())?;
    ctx.finish()?;
    Ok(0)
}

/// Evaluate the initial profile at a node; x and omega are bound, so the
/// expression must not involve t, u, or derivative coordinates.
fn profile_value(expr: &Expr, x: f64, omega: f64) -> Result<f64> {
    let mut bindings = NumBindings::new();
    bindings.insert(Var::x(), x);
    bindings.insert(Var::sym("omega"), omega);
    expr.eval(&bindings).map_err(|e| {
        bad_input(format!(
            "--initial must be a function of x (and omega): {e} at x = {x}"
        ))
    })
}
