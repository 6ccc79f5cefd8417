//! `residual`: measure the discrete residual of a candidate solution. An
//! expression in x and t is sampled on three refinement levels to estimate
//! convergence slopes; a stored grid is measured as-is.

use std::fs::File;
use std::io::BufReader;

use anyhow::Result;
use nfpe_lie::family::make_pde;
use nfpe_lie::numerics::{pde_residual, residual_convergence, GridField, ResidualReport};
use nfpe_lie::{Expr, NumBindings, Var};

use crate::caseref::{parse_expr, parse_rat, parse_real, parse_usize};
use crate::ctx::{bad_input, RunContext};
use crate::ResidualArgs;

pub fn run(mut ctx: RunContext, args: ResidualArgs) -> Result<u8> {
    let r = parse_rat("--r", &ctx.resolve_required("r", args.r)?)?;
    let k = parse_rat("--k", &ctx.resolve_required("k", args.k)?)?;
    let omega = parse_real("--omega", &ctx.resolve_or("omega", args.omega, "1"))?;
    let pde = make_pde(r, k, omega).map_err(|e| bad_input(e.to_string()))?;

    let u = ctx.resolve("u", args.u);
    let grid = ctx.resolve("grid", args.grid);
    let report = match (u, grid) {
        (Some(expr), None) => {
            let expr = parse_expr("--u", &expr)?;
            let x_lo = parse_real("--x-lo", &ctx.resolve_or("x-lo", args.x_lo, "-1"))?;
            let x_hi = parse_real("--x-hi", &ctx.resolve_or("x-hi", args.x_hi, "1"))?;
            let t0 = parse_real("--t0", &ctx.resolve_or("t0", args.t0, "0"))?;
            let t1 = parse_real("--t1", &ctx.resolve_or("t1", args.t1, "1/2"))?;
            let n_x = parse_usize("--n-x", &ctx.resolve_or("n-x", args.n_x, "51"))?;
            let n_t = parse_usize("--n-t", &ctx.resolve_or("n-t", args.n_t, "5"))?;
            if !(x_hi > x_lo) || !(t1 > t0) {
                return Err(bad_input("the sampling window is empty or reversed"));
            }
            if n_x < 5 || n_t < 5 {
                return Err(bad_input(
                    "the residual stencils need --n-x >= 5 and --n-t >= 5",
                ));
            }
            candidate_value(&expr, x_lo, t0, omega)?;
            candidate_value(&expr, x_hi, t1, omega)?;
            let sample = |x: f64, t: f64| {
                candidate_value(&expr, x, t, omega).unwrap_or(f64::NAN)
            };
            residual_convergence(sample, &pde, (x_lo, x_hi), (t0, t1), n_x, n_t)
                .map_err(|e| bad_input(e.to_string()))?
        }
        (None, Some(path)) => {
            let file = File::open(&path)
                .map_err(|e| bad_input(format!("cannot open --grid {path}: {e}")))?;
            let field = GridField::read_csv(BufReader::new(file))
                .map_err(|e| bad_input(format!("--grid {path}: {e}")))?;
            pde_residual(&field, &pde).map_err(|e| bad_input(e.to_string()))?
        }
        _ => {
            return Err(bad_input(
                "give exactly one of --u (expression) or --grid (file)",
            ))
        }
    };

    print_summary(&report);
    ctx.write_json("residual.json", &report.to_json())?;
    ctx.finish()?;
    Ok(0)
}

fn print_summary(report: &ResidualReport) {
    println!(
        "residual on {} x {}: sup {:.3e}, l2 {:.3e}",
        report.finest.n_x, report.finest.n_t, report.finest.sup_norm, report.finest.l2_norm
    );
    match (report.sup_slope, report.l2_slope) {
        (Some(sup), Some(l2)) => println!(
            "convergence slopes: sup {sup:.2}, l2 {l2:.2} (band {:.2})",
            report.slope_band
        ),
        _ => println!("single level; no convergence slopes"),
    }
}

/// Evaluate the candidate solution at a sample point; x, t, and omega are
/// bound, so the expression must not involve u or derivative coordinates.
fn candidate_value(expr: &Expr, x: f64, t: f64, omega: f64) -> Result<f64> {
    let mut bindings = NumBindings::new();
    bindings.insert(Var::x(), x);
    bindings.insert(Var::t(), t);
    bindings.insert(Var::sym("omega"), omega);
    expr.eval(&bindings).map_err(|e| {
        bad_input(format!(
            "--u must be a function of x and t (and omega): {e} at (x, t) = ({x}, {t})"
        ))
    })
}
