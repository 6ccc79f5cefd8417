//! `classify`: place (r, k) in the symmetry classification, print the
//! generator basis, and verify each generator against the linearized
//! invariance condition.

use anyhow::{Context, Result};
use nfpe_lie::family::{classify, generators, make_pde};
use nfpe_lie::jets::invariance_residual;
use nfpe_lie::symexpr::equivalent;
use nfpe_lie::Expr;
use serde_json::json;

use crate::caseref::{parse_rat, parse_real};
use crate::ctx::{bad_input, RunContext};
use crate::ClassifyArgs;

pub fn run(mut ctx: RunContext, args: ClassifyArgs) -> Result<u8> {
    let r = parse_rat("--r", &ctx.resolve_required("r", args.r)?)?;
    let k = parse_rat("--k", &ctx.resolve_required("k", args.k)?)?;
    let omega = parse_real("--omega", &ctx.resolve_or("omega", args.omega, "1"))?;

    let case = classify(&r, &k).map_err(|e| bad_input(e.to_string()))?;
    let pde = make_pde(r.clone(), k.clone(), omega).map_err(|e| bad_input(e.to_string()))?;
    let catalog = generators(&case);

    println!("case: {}", case.label());
    println!("(r, k) = ({r}, {k})");
    match case.delta_value() {
        Some(d) => println!("delta = {d}"),
        None => println!("delta: none (generic pair)"),
    }
    println!("generators: {}", catalog.basis.len());

    let mut gens = Vec::new();
    let mut all_verified = true;
    for (i, vf) in catalog.basis.iter().enumerate() {
        let name = format!("X{}", i + 1);
        let residual = invariance_residual(vf, pde.rhs())
            .with_context(|| format!("prolonging {name}"))?;
        let verified = equivalent(&residual, &Expr::zero()).holds();
        all_verified &= verified;
        let status = if verified { "VERIFIED" } else { "FAILED" };
        println!(
            "  {name}: xi = {}, tau = {}, eta = {}   [{status}]",
            vf.xi, vf.tau, vf.eta
        );
        gens.push(json!({
            "name": name,
            "xi": vf.xi.to_string(),
            "tau": vf.tau.to_string(),
            "eta": vf.eta.to_string(),
            "verified": verified,
        }));
    }

    ctx.write_json(
        "classify.json",
        &json!({
            "case": case.label(),
            "family": case.family().to_string(),
            "r": r.to_string(),
            "k": k.to_string(),
            "delta": case.delta_value().map(|d| d.to_string()),
            "omega": omega,
            "generators": gens,
            "all_verified": all_verified,
        }),
    )?;
    ctx.finish()?;

    if all_verified {
        Ok(0)
    } else {
        eprintln!("error: at least one generator failed the invariance check");
        Ok(1)
    }
}
