//! `verify-all`: recompute the whole catalog against frozen expectations.
//! Exit 0 means every check passed with no findings, 3 means the checks
//! passed but findings were recorded, 1 means at least one check failed.

use anyhow::Result;
use nfpe_lie::verify::{verify_all, VerifyFilter};

use crate::ctx::{bad_input, RunContext};
use crate::VerifyAllArgs;

pub fn run(mut ctx: RunContext, args: VerifyAllArgs) -> Result<u8> {
    let filter = match ctx.resolve("only", args.only) {
        Some(raw) => VerifyFilter::parse(&raw).map_err(bad_input)?,
        None => VerifyFilter::none(),
    };
    let report = verify_all(&filter, ctx.seed);
    println!("{report}");

    ctx.write_json("verify.json", &report.to_json())?;
    ctx.write_json("findings.json", &report.findings_json())?;
    ctx.finish()?;

    if !report.all_passed() {
        eprintln!("error: at least one verification check failed");
        Ok(1)
    } else if report.findings.is_empty() {
        Ok(0)
    } else {
        Ok(3)
    }
}
