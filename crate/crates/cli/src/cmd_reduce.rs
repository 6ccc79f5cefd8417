//! `reduce` and `solve-ode`: build a reduction recipe, certify it on test
//! functions, and integrate the reduced ODE. `reduce --solve` additionally
//! maps the profile back through the ansatz onto an (x, t) grid and measures
//! the discrete residual there.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use nfpe_lie::family::{make_pde, CaseId};
use nfpe_lie::liealg::RepLabel;
use nfpe_lie::numerics::{build_solution, integrate_ode, pde_residual, OdeProblem, OdeSolution};
use nfpe_lie::reduction::{recipe, standard_test_functions, verify_reduction, ReductionRecipe};
use nfpe_lie::{OdeError, StopReason};
use serde_json::json;

use crate::caseref::{param_map, parse_part, parse_rat, parse_real, parse_usize};
use crate::caseref::{parse_family, resolve_case, resolve_rep};
use crate::ctx::{bad_input, RunContext};
use crate::{linspace, ReduceArgs, SolveOdeArgs};

/// The flags that pin down case, representative, parameters, and Omega.
struct CaseFlags {
    case: Option<String>,
    part: Option<String>,
    delta: Option<String>,
    k: Option<String>,
    rep: Option<String>,
    alpha: Option<String>,
    beta: Option<String>,
    gamma: Option<String>,
    omega: Option<String>,
}

struct Reduction {
    case: CaseId,
    label: RepLabel,
    params: BTreeMap<String, f64>,
    omega: f64,
}

fn resolve_reduction(ctx: &mut RunContext, flags: CaseFlags) -> Result<Reduction> {
    let family = parse_family(&ctx.resolve_required("case", flags.case)?)?;
    let part = match ctx.resolve("part", flags.part) {
        Some(raw) => Some(parse_part(&raw)?),
        None => None,
    };
    let delta = match ctx.resolve("delta", flags.delta) {
        Some(raw) => Some(parse_rat("--delta", &raw)?),
        None => None,
    };
    let k = match ctx.resolve("k", flags.k) {
        Some(raw) => Some(parse_rat("--k", &raw)?),
        None => None,
    };
    let case = resolve_case(family, part, delta, k)?;
    let label = resolve_rep(&case, &ctx.resolve_required("rep", flags.rep)?)?;
    let parse_param = |raw: Option<String>, what| -> Result<Option<f64>> {
        raw.map(|s| parse_real(what, &s)).transpose()
    };
    let params = param_map(
        parse_param(ctx.resolve("alpha", flags.alpha), "--alpha")?,
        parse_param(ctx.resolve("beta", flags.beta), "--beta")?,
        parse_param(ctx.resolve("gamma", flags.gamma), "--gamma")?,
    );
    let omega = parse_real("--omega", &ctx.resolve_or("omega", flags.omega, "1"))?;
    if omega <= 0.0 {
        return Err(bad_input(format!("--omega must be positive, got {omega}")));
    }
    Ok(Reduction {
        case,
        label,
        params,
        omega,
    })
}

pub fn run(mut ctx: RunContext, args: ReduceArgs) -> Result<u8> {
    let ReduceArgs {
        case,
        part,
        delta,
        k,
        rep,
        alpha,
        beta,
        gamma,
        omega,
        solve,
        zeta0,
        y0,
        yp0,
        zeta_end,
        max_step,
        x_lo,
        x_hi,
        t0,
        t1,
        n_x,
        n_t,
    } = args;
    let red = resolve_reduction(
        &mut ctx,
        CaseFlags {
            case,
            part,
            delta,
            k,
            rep,
            alpha,
            beta,
            gamma,
            omega,
        },
    )?;
    let rec = recipe(&red.case, red.label, &red.params).map_err(|e| bad_input(e.to_string()))?;

    println!("case: {}", red.case.label());
    println!("representative: {}", red.label.as_str());
    if !red.params.is_empty() {
        let listed: Vec<String> = red
            .params
            .iter()
            .map(|(name, value)| format!("{name} = {value}"))
            .collect();
        println!("params: {}", listed.join(", "));
    }
    println!("ansatz: u = {}", rec.phi_text);
    println!("        zeta = {}", rec.zeta_text);
    println!("ode: {} = 0", rec.ode);
    println!("theta = {}", rec.theta);

    let report = verify_reduction(
        &red.case,
        red.label,
        &red.params,
        &standard_test_functions(),
        red.omega,
    )
    .context("certifying the reduction on test functions")?;
    let certified = report.certified && report.isc_ok();
    println!(
        "verification: {} (multiplier spread {:.3e} over {} test functions, \
         invariant-surface residual {:.3e})",
        if certified { "certified" } else { "NOT certified" },
        report.max_spread,
        report.test_functions.len(),
        report.isc_max,
    );

    ctx.write_json("recipe.json", &rec.to_json())?;
    ctx.write_json("verification.json", &report.to_json())?;

    if solve {
        let flags = SolveFlags {
            zeta0,
            y0,
            yp0,
            zeta_end,
            max_step,
            x_lo,
            x_hi,
            t0,
            t1,
            n_x,
            n_t,
        };
        solve_into_grid(&mut ctx, &red, &rec, flags)?;
    }
    ctx.finish()?;

    if certified {
        Ok(0)
    } else {
        eprintln!("error: the reduction certificate failed; see verification.json");
        Ok(1)
    }
}

struct SolveFlags {
    zeta0: Option<String>,
    y0: Option<String>,
    yp0: Option<String>,
    zeta_end: Option<String>,
    max_step: Option<String>,
    x_lo: Option<String>,
    x_hi: Option<String>,
    t0: Option<String>,
    t1: Option<String>,
    n_x: Option<String>,
    n_t: Option<String>,
}

/// Integrate the reduced profile, lift it onto the sampling window, and
/// measure the discrete residual of the lifted solution.
fn solve_into_grid(
    ctx: &mut RunContext,
    red: &Reduction,
    rec: &ReductionRecipe,
    flags: SolveFlags,
) -> Result<()> {
    let resolve_f64 = |ctx: &mut RunContext, key, flag: Option<String>, default: &str| {
        parse_real(key, &ctx.resolve_or(key, flag, default))
    };
    let zeta0 = resolve_f64(ctx, "zeta0", flags.zeta0, "0")?;
    let y0 = resolve_f64(ctx, "y0", flags.y0, "1")?;
    let yp0 = resolve_f64(ctx, "yp0", flags.yp0, "0")?;
    let max_step = resolve_f64(ctx, "max-step", flags.max_step, "5e-4")?;
    let x_lo = resolve_f64(ctx, "x-lo", flags.x_lo, &rec.x_range.0.to_string())?;
    let x_hi = resolve_f64(ctx, "x-hi", flags.x_hi, &rec.x_range.1.to_string())?;
    let t0 = resolve_f64(ctx, "t0", flags.t0, &rec.t_range.0.to_string())?;
    let t1 = resolve_f64(ctx, "t1", flags.t1, &rec.t_range.1.to_string())?;
    let n_x = parse_usize("--n-x", &ctx.resolve_or("n-x", flags.n_x, "201"))?;
    let n_t = parse_usize("--n-t", &ctx.resolve_or("n-t", flags.n_t, "11"))?;
    if y0 <= 0.0 {
        return Err(bad_input(format!("--y0 must be positive, got {y0}")));
    }
    if !(x_hi > x_lo) || !(t1 > t0) {
        return Err(bad_input("the grid window is empty or reversed"));
    }
    if n_x < 5 || n_t < 5 {
        return Err(bad_input(
            "the residual stencils need --n-x >= 5 and --n-t >= 5",
        ));
    }

    let zeta_end = match ctx.resolve("zeta-end", flags.zeta_end) {
        Some(raw) => parse_real("--zeta-end", &raw)?,
        None => {
            let end = auto_zeta_end(rec, zeta0, (x_lo, x_hi), (t0, t1), n_t)?;
            ctx.record("zeta-end", json!(end.to_string()));
            end
        }
    };

    let problem =
        OdeProblem::from_recipe(rec, red.omega, zeta0, y0, yp0, zeta_end).with_max_step(max_step);
    let sol = integrate(&problem)?;
    println!("ode integration: {}", stop_reason_text(&sol.outcome));
    write_ode_outputs(ctx, &sol, 501)?;

    let window = clamp_window(rec, &sol, (x_lo, x_hi), (t0, t1), n_x, n_t).ok_or_else(|| {
        bad_input(
            "the integrated zeta span covers no part of the grid window; \
             extend --zeta-end or move the window",
        )
    })?;
    let (wx, wn) = window;
    let grid =
        build_solution(rec, &sol, wx, wn, (t0, t1), n_t).map_err(|e| bad_input(e.to_string()))?;

    let (r, k) = rec.case.rk().expect("resolved reduce cases carry (r, k)");
    let pde = make_pde(r, k, red.omega).map_err(|e| bad_input(e.to_string()))?;
    let residual = pde_residual(&grid, &pde).map_err(|e| bad_input(e.to_string()))?;
    println!(
        "grid: {} columns x {} levels on [{:.6}, {:.6}], residual sup {:.3e}",
        grid.n_x(),
        grid.n_t(),
        wx.0,
        wx.1,
        residual.finest.sup_norm
    );

    let mut csv = Vec::new();
    grid.write_csv(&mut csv)?;
    ctx.write_text("grid.csv", &String::from_utf8(csv)?)?;
    ctx.write_json("residual.json", &residual.to_json())?;
    Ok(())
}

pub fn run_solve_ode(mut ctx: RunContext, args: SolveOdeArgs) -> Result<u8> {
    let SolveOdeArgs {
        case,
        part,
        delta,
        k,
        rep,
        alpha,
        beta,
        gamma,
        omega,
        zeta0,
        y0,
        yp0,
        zeta_end,
        max_step,
        rel_tol,
        abs_tol,
        n_samples,
    } = args;
    let red = resolve_reduction(
        &mut ctx,
        CaseFlags {
            case,
            part,
            delta,
            k,
            rep,
            alpha,
            beta,
            gamma,
            omega,
        },
    )?;
    let rec = recipe(&red.case, red.label, &red.params).map_err(|e| bad_input(e.to_string()))?;

    let resolve_f64 = |ctx: &mut RunContext, key, flag: Option<String>, default: &str| {
        parse_real(key, &ctx.resolve_or(key, flag, default))
    };
    let zeta0 = resolve_f64(&mut ctx, "zeta0", zeta0, "0")?;
    let y0 = resolve_f64(&mut ctx, "y0", y0, "1")?;
    let yp0 = resolve_f64(&mut ctx, "yp0", yp0, "0")?;
    let zeta_end = parse_real("--zeta-end", &ctx.resolve_required("zeta-end", zeta_end)?)?;
    let n_samples = parse_usize("--n-samples", &ctx.resolve_or("n-samples", n_samples, "501"))?;
    if y0 <= 0.0 {
        return Err(bad_input(format!("--y0 must be positive, got {y0}")));
    }
    if n_samples < 2 {
        return Err(bad_input("need --n-samples >= 2"));
    }

    let mut problem = OdeProblem::from_recipe(&rec, red.omega, zeta0, y0, yp0, zeta_end);
    if let Some(raw) = ctx.resolve("max-step", max_step) {
        problem = problem.with_max_step(parse_real("--max-step", &raw)?);
    }
    match (ctx.resolve("rel-tol", rel_tol), ctx.resolve("abs-tol", abs_tol)) {
        (Some(r), Some(a)) => {
            problem =
                problem.with_tolerances(parse_real("--rel-tol", &r)?, parse_real("--abs-tol", &a)?);
        }
        (None, None) => {}
        _ => return Err(bad_input("--rel-tol and --abs-tol must be given together")),
    }

    println!("case: {}", red.case.label());
    println!("representative: {}", red.label.as_str());
    println!("ode: {} = 0", rec.ode);
    let sol = integrate(&problem)?;
    println!("ode integration: {}", stop_reason_text(&sol.outcome));
    let (ze, ye, ype) = sol.end_state();
    println!("end state: zeta = {ze:.6}, y = {ye:.6}, y' = {ype:.6}");
    write_ode_outputs(&mut ctx, &sol, n_samples)?;
    ctx.finish()?;
    Ok(0)
}

fn integrate(problem: &OdeProblem) -> Result<OdeSolution> {
    integrate_ode(problem).map_err(|e| match e {
        OdeError::EmptySpan(_) | OdeError::BadTolerances { .. } => bad_input(e.to_string()),
        other => anyhow::Error::new(other).context("integrating the reduced ODE"),
    })
}

fn stop_reason_text(reason: &StopReason) -> String {
    match reason {
        StopReason::SpanCompleted => "span completed".to_string(),
        StopReason::NonPositiveY { zeta } => {
            format!("y reached zero at zeta = {zeta:.6}; profile ends there")
        }
        StopReason::DegenerateLeadingCoefficient { zeta } => {
            format!("leading coefficient vanished at zeta = {zeta:.6}; profile ends there")
        }
    }
}

fn stop_reason_json(reason: &StopReason) -> serde_json::Value {
    match reason {
        StopReason::SpanCompleted => json!({"kind": "span_completed"}),
        StopReason::NonPositiveY { zeta } => json!({"kind": "non_positive_y", "zeta": zeta}),
        StopReason::DegenerateLeadingCoefficient { zeta } => {
            json!({"kind": "degenerate_leading_coefficient", "zeta": zeta})
        }
    }
}

/// Sample the dense output onto `ode.csv` and summarize it in `ode.json`.
fn write_ode_outputs(ctx: &mut RunContext, sol: &OdeSolution, n_samples: usize) -> Result<()> {
    let (lo, hi) = sol.span();
    let margin = 1e-12 * (hi - lo).max(1.0);
    let (lo, hi) = (lo + margin, hi - margin);
    let mut csv = String::from("zeta,y,yp\n");
    for i in 0..n_samples {
        let z = lo + (hi - lo) * i as f64 / (n_samples - 1) as f64;
        let (y, yp) = sol.sample(z).context("sampling the dense ODE output")?;
        csv.push_str(&format!("{z},{y},{yp}\n"));
    }
    ctx.write_text("ode.csv", &csv)?;

    let (ze, ye, ype) = sol.end_state();
    ctx.write_json(
        "ode.json",
        &json!({
            "span": [sol.span().0, sol.span().1],
            "outcome": stop_reason_json(&sol.outcome),
            "n_steps": sol.n_steps,
            "n_rejected": sol.n_rejected,
            "end_state": {"zeta": ze, "y": ye, "yp": ype},
        }),
    )?;
    Ok(())
}

/// Pick an integration endpoint that covers the zeta values the grid window
/// needs, choosing the side of zeta0 with the larger required extent.
fn auto_zeta_end(
    rec: &ReductionRecipe,
    zeta0: f64,
    x_range: (f64, f64),
    t_range: (f64, f64),
    n_t: usize,
) -> Result<f64> {
    let mut zmin = f64::INFINITY;
    let mut zmax = f64::NEG_INFINITY;
    for &t in &linspace(t_range, n_t) {
        for &x in &[x_range.0, x_range.1] {
            let z = rec.zeta_at(x, t).v;
            if z.is_finite() {
                zmin = zmin.min(z);
                zmax = zmax.max(z);
            }
        }
    }
    if zmin > zmax {
        return Err(bad_input(
            "the grid window maps to no finite zeta values; check the t window \
             against the recipe's t domain",
        ));
    }
    let width = (zmax - zmin).max(1e-6);
    let (zmin, zmax) = (zmin - 1e-3 * width, zmax + 1e-3 * width);
    Ok(if zeta0 <= zmin {
        zmax
    } else if zeta0 >= zmax {
        zmin
    } else if zmax - zeta0 >= zeta0 - zmin {
        zmax
    } else {
        zmin
    })
}

/// Largest contiguous column range of the requested grid whose zeta values
/// stay inside the integrated span at every time level.
fn clamp_window(
    rec: &ReductionRecipe,
    sol: &OdeSolution,
    x_range: (f64, f64),
    t_range: (f64, f64),
    n_x: usize,
    n_t: usize,
) -> Option<((f64, f64), usize)> {
    let (zlo, zhi) = sol.span();
    let margin = 1e-9 * (zhi - zlo).max(1e-12);
    let (zlo, zhi) = (zlo + margin, zhi - margin);
    let xs = linspace(x_range, n_x);
    let ts = linspace(t_range, n_t);
    let in_span = |x: f64| {
        ts.iter().all(|&t| {
            let z = rec.zeta_at(x, t).v;
            z.is_finite() && z >= zlo && z <= zhi
        })
    };
    let mask: Vec<bool> = xs.iter().map(|&x| in_span(x)).collect();

    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &ok) in mask.iter().chain(std::iter::once(&false)).enumerate() {
        match (ok, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.map_or(true, |(bs, be)| i - s > be - bs + 1) {
                    best = Some((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    let (s, e) = best?;
    if e - s + 1 < 2 {
        return None;
    }
    Some(((xs[s], xs[e]), e - s + 1))
}
