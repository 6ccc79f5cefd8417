//! `tables`: write the commutator and adjoint tables of a case family and
//! diff both against the frozen closed forms. A diff mismatch means the
//! library disagrees with its own oracle and exits 1.

use anyhow::Result;
use nfpe_lie::family::{CaseFamily, CaseId, Part};
use nfpe_lie::liealg::{
    adjoint_table_json, adjoint_table_text, bracket_table_json, bracket_table_text,
};
use nfpe_lie::verify::{expected_adjoint, expected_commutators};
use nfpe_lie::{AdjointMatrix, StructureConstants};
use serde_json::json;

use crate::caseref::{parse_family, parse_rat, parse_real_list};
use crate::ctx::{bad_input, RunContext};
use crate::TablesArgs;

const ADJOINT_TOL: f64 = 1e-10;

pub fn run(mut ctx: RunContext, args: TablesArgs) -> Result<u8> {
    let family = parse_family(&ctx.resolve_required("case", args.case)?)?;
    let delta = ctx.resolve("delta", args.delta);
    let case = match family {
        CaseFamily::A | CaseFamily::B => {
            if delta.is_some() {
                return Err(bad_input(format!(
                    "case {family} fixes delta by itself; drop --delta"
                )));
            }
            CaseId::ab(family, Part::I)
        }
        CaseFamily::C => {
            let raw = delta.ok_or_else(|| bad_input("case C needs --delta"))?;
            CaseId::c_delta(parse_rat("--delta", &raw)?)
        }
        CaseFamily::Generic => unreachable!("parse_family never yields Generic"),
    };
    let eps = parse_real_list("--eps", &ctx.resolve_or("eps", args.eps, "0.1,0.5,1"))?;

    let sc = StructureConstants::for_case(&case).map_err(|e| bad_input(e.to_string()))?;
    let tag = family.to_string();

    println!("{}", bracket_table_text(&sc));
    ctx.write_json(
        &format!("brackets_{tag}.json"),
        &bracket_table_json(&case, &sc),
    )?;
    ctx.write_text(&format!("brackets_{tag}.txt"), &bracket_table_text(&sc))?;

    let mut adjoint_sections = String::new();
    let mut adjoint_tables = Vec::new();
    for &e in &eps {
        adjoint_sections.push_str(&format!("eps = {e}\n"));
        adjoint_sections.push_str(&adjoint_table_text(&sc, e));
        adjoint_sections.push('\n');
        adjoint_tables.push(adjoint_table_json(&case, &sc, e));
    }
    ctx.write_json(
        &format!("adjoint_{tag}.json"),
        &json!({
            "case": case.label(),
            "eps": eps,
            "tables": adjoint_tables,
        }),
    )?;
    ctx.write_text(&format!("adjoint_{tag}.txt"), &adjoint_sections)?;

    let mismatches = diff_against_oracle(&case, &sc, &eps)?;
    ctx.finish()?;
    if mismatches.is_empty() {
        println!("oracle diff: OK");
        Ok(0)
    } else {
        for m in &mismatches {
            eprintln!("oracle diff: {m}");
        }
        eprintln!("error: computed tables disagree with the frozen closed forms");
        Ok(1)
    }
}

/// Exact comparison for the brackets, entrywise tolerance for the adjoints.
fn diff_against_oracle(
    case: &CaseId,
    sc: &StructureConstants,
    eps: &[f64],
) -> Result<Vec<String>> {
    let n = sc.n();
    let mut mismatches = Vec::new();

    let expected = expected_commutators(case).map_err(|e| bad_input(e.to_string()))?;
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                if *sc.c(i, j, m) != expected[i][j][m] {
                    mismatches.push(format!(
                        "bracket [X{}, X{}] component X{}: computed {}, expected {}",
                        i + 1,
                        j + 1,
                        m + 1,
                        sc.c(i, j, m),
                        expected[i][j][m]
                    ));
                }
            }
        }
    }

    for &e in eps {
        for g in 1..=n {
            let computed = AdjointMatrix::new(sc, g, e);
            let expected = expected_adjoint(case, g, e).map_err(|err| bad_input(err.to_string()))?;
            for row in 0..n {
                for col in 0..n {
                    let diff = (computed.entry(row, col) - expected[row][col]).abs();
                    if diff > ADJOINT_TOL {
                        mismatches.push(format!(
                            "adjoint of X{g} at eps = {e}, entry ({row}, {col}): \
                             computed {}, expected {} (diff {diff:.3e})",
                            computed.entry(row, col),
                            expected[row][col]
                        ));
                    }
                }
            }
        }
    }
    Ok(mismatches)
}
