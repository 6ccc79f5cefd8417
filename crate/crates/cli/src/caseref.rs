//! Parsing of case, part, representative, and numeric inputs.
//!
//! Rational inputs are exact `p/q` strings. Real inputs accept either a
//! float literal or a `p/q` ratio. Case C is pinned down by `--delta`
//! directly or by `--k` combined with the part's defining line.

use std::collections::BTreeMap;
use std::str::FromStr;

use anyhow::Result;
use nfpe_lie::family::{CaseFamily, CaseId, Part};
use nfpe_lie::liealg::RepLabel;
use nfpe_lie::Rat;

use crate::ctx::bad_input;

pub fn parse_rat(what: &str, s: &str) -> Result<Rat> {
    Rat::from_str(s.trim())
        .map_err(|_| bad_input(format!("{what} must be an integer or p/q ratio, got '{s}'")))
}

pub fn parse_real(what: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| bad_input(format!("{what} has a bad numerator in '{s}'")))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| bad_input(format!("{what} has a bad denominator in '{s}'")))?;
            num / den
        }
        None => s
            .parse()
            .map_err(|_| bad_input(format!("{what} must be a number, got '{s}'")))?,
    };
    if !value.is_finite() {
        return Err(bad_input(format!("{what} must be finite, got '{s}'")));
    }
    Ok(value)
}

pub fn parse_usize(what: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| bad_input(format!("{what} must be a non-negative integer, got '{s}'")))
}

/// Comma-separated list of reals, e.g. `0.1,0.5,1`.
pub fn parse_real_list(what: &str, s: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_real(what, p))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(bad_input(format!("{what} list is empty")));
    }
    Ok(values)
}

/// Parse an expression in the library grammar, e.g. `1 + exp(-x^2)`.
pub fn parse_expr(what: &str, s: &str) -> Result<nfpe_lie::Expr> {
    nfpe_lie::symexpr::parse(s).map_err(|e| bad_input(format!("{what}: {e}")))
}

pub fn parse_family(s: &str) -> Result<CaseFamily> {
    match s.trim() {
        "A" | "a" => Ok(CaseFamily::A),
        "B" | "b" => Ok(CaseFamily::B),
        "C" | "c" => Ok(CaseFamily::C),
        other => Err(bad_input(format!(
            "case must be A, B, or C, got '{other}'"
        ))),
    }
}

pub fn parse_part(s: &str) -> Result<Part> {
    match s.trim().to_ascii_lowercase().as_str() {
        "i" | "1" => Ok(Part::I),
        "ii" | "2" => Ok(Part::II),
        "iii" | "3" => Ok(Part::III),
        "iv" | "4" => Ok(Part::IV),
        other => Err(bad_input(format!(
            "part must be one of i, ii, iii, iv, got '{other}'"
        ))),
    }
}

/// Resolve a full case line for `reduce`/`solve-ode`: families A and B take
/// an optional part (default i), case C needs a part plus either delta or k.
pub fn resolve_case(
    family: CaseFamily,
    part: Option<Part>,
    delta: Option<Rat>,
    k: Option<Rat>,
) -> Result<CaseId> {
    match family {
        CaseFamily::A | CaseFamily::B => {
            if delta.is_some() {
                return Err(bad_input(format!(
                    "case {family:?} fixes delta by itself; drop --delta"
                )));
            }
            Ok(CaseId::ab(family, part.unwrap_or(Part::I)))
        }
        CaseFamily::C => {
            let part =
                part.ok_or_else(|| bad_input("case C needs --part to pick its defining line"))?;
            let delta = match (delta, k) {
                (Some(d), None) => d,
                (None, Some(k)) => delta_from_k(part, &k),
                (Some(d), Some(k)) => {
                    let implied = delta_from_k(part, &k);
                    if implied != d {
                        return Err(bad_input(format!(
                            "--delta {d} conflicts with --k {k} on line {part:?} (implies delta = {implied})"
                        )));
                    }
                    d
                }
                (None, None) => {
                    return Err(bad_input("case C needs --delta or --k to fix the line"))
                }
            };
            Ok(CaseId::c(part, delta))
        }
        CaseFamily::Generic => unreachable!("parse_family never yields Generic"),
    }
}

/// Delta implied by k on each case C line: (i) k, (ii) -k, (iii) k - 1/2,
/// (iv) -k - 1/2.
fn delta_from_k(part: Part, k: &Rat) -> Rat {
    let half = Rat::new(1.into(), 2.into());
    match part {
        Part::I => k.clone(),
        Part::II => -k.clone(),
        Part::III => k.clone() - half,
        Part::IV => -k.clone() - half,
    }
}

/// Representative selector: a catalog letter (`a`, `b`, ...) or the
/// generator-combination name (`X1X3`, case-insensitive).
pub fn resolve_rep(case: &CaseId, s: &str) -> Result<RepLabel> {
    let letters: &[(&str, RepLabel)] = if case.family() == CaseFamily::A {
        &[
            ("a", RepLabel::X2X4X5),
            ("b", RepLabel::X1X2X4),
            ("c", RepLabel::X1X3),
            ("d", RepLabel::X1),
        ]
    } else {
        &[
            ("a", RepLabel::X1X4),
            ("b", RepLabel::X1X3),
            ("c", RepLabel::X1),
        ]
    };
    let want = s.trim().to_ascii_lowercase();
    for (letter, label) in letters {
        let accepted = want == *letter
            || want == compact_name(*label)
            || want == label.as_str().to_ascii_lowercase();
        if accepted {
            return Ok(*label);
        }
    }
    let options: Vec<String> = letters
        .iter()
        .map(|(letter, label)| format!("{letter} ({})", label.as_str()))
        .collect();
    Err(bad_input(format!(
        "unknown representative '{s}' for {}; options: {}",
        case.label(),
        options.join(", ")
    )))
}

/// Generator-combination shorthand for a representative, e.g. `x1x3`.
fn compact_name(label: RepLabel) -> &'static str {
    match label {
        RepLabel::X2X4X5 => "x2x4x5",
        RepLabel::X1X2X4 => "x1x2x4",
        RepLabel::X1X3 => "x1x3",
        RepLabel::X1X4 => "x1x4",
        RepLabel::X1 => "x1",
    }
}

/// Collect the provided representative parameters under their catalog names.
pub fn param_map(
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
) -> BTreeMap<String, f64> {
    let mut params = BTreeMap::new();
    if let Some(a) = alpha {
        params.insert("alpha".to_string(), a);
    }
    if let Some(b) = beta {
        params.insert("beta".to_string(), b);
    }
    if let Some(g) = gamma {
        params.insert("gamma".to_string(), g);
    }
    params
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_accept_ratios_and_floats() {
        assert_eq!(parse_real("x", "3/4").unwrap(), 0.75);
        assert_eq!(parse_real("x", "-1.5e-1").unwrap(), -0.15);
        assert!(parse_real("x", "1/0").is_err());
        assert!(parse_real("x", "abc").is_err());
        assert_eq!(parse_real_list("eps", "0.1, 0.5,1").unwrap().len(), 3);
    }

    #[test]
    fn case_c_line_resolution() {
        let one = Rat::from_str("1").unwrap();
        let case = resolve_case(CaseFamily::C, Some(Part::I), None, Some(one.clone())).unwrap();
        assert_eq!(case.delta_value().unwrap(), one);
        let case = resolve_case(CaseFamily::C, Some(Part::III), None, Some(one.clone())).unwrap();
        assert_eq!(case.delta_value().unwrap(), Rat::from_str("1/2").unwrap());
        assert!(resolve_case(CaseFamily::C, None, Some(one.clone()), None).is_err());
        assert!(resolve_case(CaseFamily::C, Some(Part::II), Some(one.clone()), Some(one)).is_err());
    }

    #[test]
    fn rep_letters_track_the_family() {
        let a = CaseId::ab(CaseFamily::A, Part::I);
        assert_eq!(resolve_rep(&a, "b").unwrap(), RepLabel::X1X2X4);
        assert_eq!(resolve_rep(&a, "x2x4x5").unwrap(), RepLabel::X2X4X5);
        let b = CaseId::ab(CaseFamily::B, Part::I);
        assert_eq!(resolve_rep(&b, "b").unwrap(), RepLabel::X1X3);
        assert_eq!(resolve_rep(&b, "X1").unwrap(), RepLabel::X1);
        assert!(resolve_rep(&b, "d").is_err());
    }
}
