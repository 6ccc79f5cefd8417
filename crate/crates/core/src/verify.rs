//! Whole-catalog verification: recompute every machine-checkable object in
//! the symmetry catalog, diff it against frozen expectations, and collect the
//! result as pass/fail checks plus findings.
//!
//! A check answers "does the implementation reproduce the catalogued object"
//! (commutator tables, adjoint actions, invariance residuals, reduction
//! certificates, numeric cross-checks). A finding records a delta between the
//! catalog as documented and what the machine verifies; findings are not
//! failures, and a fully green run still reports them. [`verify_all`] never
//! returns an error: anything that breaks mid-check is reported as that
//! check failing.
//!
//! The expected commutator tables and adjoint closed forms live here as data
//! ([`expected_commutators`], [`expected_adjoint`]) so callers can diff
//! exported tables against them without rerunning the whole pass.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::family::{classify, generators, make_pde, CaseFamily, CaseId, Part};
use crate::jets::{
    determining_equations, implied_zero_atoms, invariance_residual, substitute_unknowns,
    VectorField,
};
use crate::liealg::{
    adjoint_move, normalize_element, AdjointMatrix, AlgebraElement, LieAlgError, RepLabel,
    StructureConstants,
};
use crate::numerics::{
    build_solution, evolve_pde, integrate_ode, residual_convergence, EvolveError, EvolveOptions,
    OdeProblem, StopReason,
};
use crate::reduction::{
    recipe, standard_test_functions, stationary_multiplier, theta_for, verify_reduction,
    verify_stationary_symbolic,
};
use crate::symexpr::{equivalent, rat, rat_to_f64, Expr, NumBindings, Rat, UnknownAtom,
    UnknownFunc, Var};

/// Weight of a finding: `Info` records a documented convention or behavior,
/// `Discrepancy` records a catalog statement the machine contradicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Info,
    Discrepancy,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Info => "info",
            Severity::Discrepancy => "discrepancy",
        }
    }
}

/// A delta between the catalog as documented and what verification
/// establishes. `anchor` names the object concerned in catalog terms.
#[derive(Debug, Clone)]
pub struct Finding {
    pub id: &'static str,
    pub area: &'static str,
    pub anchor: &'static str,
    pub summary: String,
    pub details: String,
    pub severity: Severity,
}

impl Finding {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "id": self.id,
            "area": self.area,
            "anchor": self.anchor,
            "summary": self.summary,
            "details": self.details,
            "severity": self.severity.as_str(),
        })
    }
}

/// One verification step: what ran, which case family it belongs to (None
/// for family-independent checks), and how it went.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub case: Option<CaseFamily>,
    pub passed: bool,
    pub detail: String,
}

fn family_tag(f: CaseFamily) -> &'static str {
    match f {
        CaseFamily::A => "A",
        CaseFamily::B => "B",
        CaseFamily::C => "C",
        CaseFamily::Generic => "generic",
    }
}

impl CheckResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "name": self.name,
            "case": self.case.map(family_tag),
            "passed": self.passed,
            "detail": self.detail,
        })
    }
}

/// Restricts a verification pass to the checks tagged with one case family.
/// Untagged (family-independent) checks run only in unfiltered passes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyFilter {
    pub case: Option<CaseFamily>,
}

impl VerifyFilter {
    pub fn none() -> Self {
        Self::default()
    }

    /// Parse a `key=value` filter; the only supported key is `case`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let Some((key, value)) = s.split_once('=') else {
            return Err(format!("expected key=value, got '{s}'"));
        };
        if key.trim() != "case" {
            return Err(format!("unknown filter key '{}' (expected 'case')", key.trim()));
        }
        let case = match value.trim() {
            "A" | "a" => CaseFamily::A,
            "B" | "b" => CaseFamily::B,
            "C" | "c" => CaseFamily::C,
            other => {
                return Err(format!(
                    "unknown case family '{other}' (expected A, B, or C)"
                ))
            }
        };
        Ok(Self { case: Some(case) })
    }

    pub fn admits(&self, tag: Option<CaseFamily>) -> bool {
        match (self.case, tag) {
            (None, _) => true,
            (Some(want), Some(got)) => want == got,
            (Some(_), None) => false,
        }
    }

    pub fn label(&self) -> Option<String> {
        self.case.map(|f| format!("case={}", family_tag(f)))
    }
}

/// Outcome of a verification pass: checks in run order, findings sorted by
/// id. Produced by [`verify_all`].
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub filter: VerifyFilter,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub findings: Vec<Finding>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "filter": self.filter.label(),
            "seed": self.seed,
            "checks": self.checks.iter().map(CheckResult::to_json).collect::<Vec<_>>(),
            "findings": self.findings.iter().map(Finding::to_json).collect::<Vec<_>>(),
            "all_passed": self.all_passed(),
            "counts": {
                "checks": self.checks.len(),
                "passed": self.passed_count(),
                "findings": self.findings.len(),
            },
        })
    }

    /// The findings alone, in the shape written to findings files.
    pub fn findings_json(&self) -> serde_json::Value {
        json!(self.findings.iter().map(Finding::to_json).collect::<Vec<_>>())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {} -- {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        writeln!(
            f,
            "{}/{} checks passed, {} findings",
            self.passed_count(),
            self.checks.len(),
            self.findings.len()
        )?;
        for finding in &self.findings {
            writeln!(
                f,
                "  [{}] {} ({}): {}",
                finding.severity.as_str(),
                finding.id,
                finding.anchor,
                finding.summary
            )?;
        }
        Ok(())
    }
}

fn algebra_dim(case: &CaseId) -> usize {
    match case.family() {
        CaseFamily::Generic => 2,
        CaseFamily::A => 5,
        CaseFamily::B | CaseFamily::C => 4,
    }
}

fn case_weight_q(case: &CaseId) -> Result<Rat, LieAlgError> {
    let delta = case
        .delta()
        .expect("case C identifier always carries delta")
        .clone();
    if delta == -Rat::one() {
        return Err(LieAlgError::DegenerateDelta);
    }
    Ok(rat(2, 1) * (Rat::one() + delta))
}

/// The expected structure constants of a case's symmetry algebra, as the
/// full antisymmetric table `c[i][j][m]` with `[Xi+1, Xj+1] = sum c Xm+1`.
/// Hand-derived from the generator components and frozen here.
pub fn expected_commutators(case: &CaseId) -> Result<Vec<Vec<Vec<Rat>>>, LieAlgError> {
    let n = algebra_dim(case);
    let mut c = vec![vec![vec![Rat::zero(); n]; n]; n];
    let set = |table: &mut Vec<Vec<Vec<Rat>>>, i: usize, j: usize, m: usize, v: Rat| {
        table[i][j][m] = v.clone();
        table[j][i][m] = -v;
    };
    set(&mut c, 0, 1, 1, -Rat::one());
    match case.family() {
        CaseFamily::Generic => {}
        CaseFamily::A => {
            set(&mut c, 0, 2, 2, rat(-2, 3));
            set(&mut c, 0, 3, 3, Rat::one());
            set(&mut c, 1, 3, 0, rat(2, 1));
            set(&mut c, 1, 3, 4, rat(2, 1));
            set(&mut c, 2, 4, 2, rat(-2, 3));
        }
        CaseFamily::B => {
            set(&mut c, 0, 3, 2, Rat::one());
            set(&mut c, 2, 3, 2, -Rat::one());
        }
        CaseFamily::C => {
            let q = case_weight_q(case)?;
            set(&mut c, 0, 2, 2, -q.clone());
            set(&mut c, 2, 3, 2, -q);
        }
    }
    Ok(c)
}

/// The expected adjoint action `Ad(exp(eps X_generator))` in closed form,
/// with column j holding the image of X(j+1). `generator` is 1-based.
pub fn expected_adjoint(
    case: &CaseId,
    generator: usize,
    eps: f64,
) -> Result<Vec<Vec<f64>>, LieAlgError> {
    let n = algebra_dim(case);
    assert!(
        (1..=n).contains(&generator),
        "generator index is 1-based and at most {n}"
    );
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    match case.family() {
        CaseFamily::Generic => match generator {
            1 => m[1][1] = eps.exp(),
            2 => m[1][0] = -eps,
            _ => unreachable!(),
        },
        CaseFamily::A => match generator {
            1 => {
                m[1][1] = eps.exp();
                m[2][2] = (2.0 * eps / 3.0).exp();
                m[3][3] = (-eps).exp();
            }
            2 => {
                m[1][0] = -eps;
                m[0][3] = -2.0 * eps;
                m[1][3] = eps * eps;
                m[4][3] = -2.0 * eps;
            }
            3 => {
                m[2][0] = -2.0 * eps / 3.0;
                m[2][4] = 2.0 * eps / 3.0;
            }
            4 => {
                m[3][0] = eps;
                m[0][1] = 2.0 * eps;
                m[3][1] = eps * eps;
                m[4][1] = 2.0 * eps;
            }
            5 => m[2][2] = (-2.0 * eps / 3.0).exp(),
            _ => unreachable!(),
        },
        CaseFamily::B => match generator {
            1 => {
                m[1][1] = eps.exp();
                m[2][3] = -eps;
            }
            2 => m[1][0] = -eps,
            3 => m[2][3] = eps,
            4 => {
                m[2][0] = 1.0 - (-eps).exp();
                m[2][2] = (-eps).exp();
            }
            _ => unreachable!(),
        },
        CaseFamily::C => {
            let q = rat_to_f64(&case_weight_q(case)?);
            match generator {
                1 => {
                    m[1][1] = eps.exp();
                    m[2][2] = (q * eps).exp();
                }
                2 => m[1][0] = -eps,
                3 => {
                    m[2][0] = -q * eps;
                    m[2][3] = q * eps;
                }
                4 => m[2][2] = (-q * eps).exp(),
                _ => unreachable!(),
            }
        }
    }
    Ok(m)
}

/// Instances of the catalogued one-dimensional subalgebra representatives
/// for one family, each with its case, coefficient vector, label, and the
/// adjoint generators that keep perturbations inside the catalogued strata.
pub fn optimal_system_representatives(
    family: CaseFamily,
) -> Vec<(CaseId, Vec<f64>, RepLabel, Vec<usize>)> {
    let a = CaseId::ab(CaseFamily::A, Part::I);
    let b = CaseId::ab(CaseFamily::B, Part::II);
    let c = CaseId::c_delta(rat(1, 1));
    match family {
        CaseFamily::A => vec![
            (
                a.clone(),
                vec![0.0, 1.7, 0.0, 1.0, -0.8],
                RepLabel::X2X4X5,
                vec![1, 2, 3, 4, 5],
            ),
            (
                a.clone(),
                vec![2.0, 0.3, 0.0, 1.0, 0.0],
                RepLabel::X1X2X4,
                vec![1, 2, 3, 4, 5],
            ),
            // Generator 4 maps these two strata off the catalogued set, so
            // perturbations stick to the other generators.
            (
                a.clone(),
                vec![1.0, 0.0, 1.0, 0.0, 0.0],
                RepLabel::X1X3,
                vec![1, 2, 3, 5],
            ),
            (a, vec![1.0, 0.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![1, 2, 3, 5]),
        ],
        CaseFamily::B => vec![
            (
                b.clone(),
                vec![-1.3, 0.0, 0.0, 1.0],
                RepLabel::X1X4,
                vec![1, 2, 3, 4],
            ),
            (
                b.clone(),
                vec![0.6, 0.0, 1.0, 0.0],
                RepLabel::X1X3,
                vec![1, 2, 3, 4],
            ),
            (b, vec![1.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![1, 2, 3, 4]),
        ],
        CaseFamily::C => vec![
            (
                c.clone(),
                vec![-2.0, 0.0, 0.0, 1.0],
                RepLabel::X1X4,
                vec![1, 2, 3, 4],
            ),
            (
                c.clone(),
                vec![1.0, 0.0, 1.0, 0.0],
                RepLabel::X1X3,
                vec![1, 2, 3, 4],
            ),
            (c, vec![1.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![1, 2, 3, 4]),
        ],
        CaseFamily::Generic => Vec::new(),
    }
}

/// The (case, representative) pairs whose reduction recipes get certified,
/// one concrete case line per pair, spread across line parts.
pub fn reduction_schedule() -> Vec<(CaseId, RepLabel)> {
    vec![
        (CaseId::ab(CaseFamily::A, Part::I), RepLabel::X2X4X5),
        (CaseId::ab(CaseFamily::A, Part::I), RepLabel::X1X2X4),
        (CaseId::ab(CaseFamily::A, Part::I), RepLabel::X1X3),
        (CaseId::ab(CaseFamily::A, Part::III), RepLabel::X1),
        (CaseId::ab(CaseFamily::B, Part::I), RepLabel::X1X4),
        (CaseId::ab(CaseFamily::B, Part::IV), RepLabel::X1X3),
        (CaseId::ab(CaseFamily::B, Part::II), RepLabel::X1),
        (CaseId::c(Part::I, rat(1, 1)), RepLabel::X1X4),
        (CaseId::c(Part::I, rat(1, 1)), RepLabel::X1X3),
        (CaseId::c(Part::II, rat(1, 3)), RepLabel::X1),
        (CaseId::c(Part::III, rat(1, 1)), RepLabel::X1X4),
        (CaseId::c(Part::III, rat(-3, 4)), RepLabel::X1X3),
        (CaseId::c(Part::IV, rat(1, 1)), RepLabel::X1),
    ]
}

const ADJOINT_EPS: [f64; 3] = [0.1, 0.5, 1.0];
const ADJOINT_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;
const RESIDUAL_POINTS: usize = 100;
const PERTURBATION_ROUNDS: usize = 100;

fn five_deltas() -> Vec<Rat> {
    vec![rat(1, 2), rat(-1, 2), rat(1, 1), rat(3, 2), rat(-1, 4)]
}

struct Runner {
    filter: VerifyFilter,
    rng: ChaCha8Rng,
    checks: Vec<CheckResult>,
    findings: Vec<Finding>,
}

impl Runner {
    fn check<F>(&mut self, name: &str, tag: Option<CaseFamily>, body: F)
    where
        F: FnOnce(&mut ChaCha8Rng, &mut Vec<Finding>) -> Result<String, String>,
    {
        if !self.filter.admits(tag) {
            return;
        }
        let (passed, detail) = match body(&mut self.rng, &mut self.findings) {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckResult {
            name: name.to_string(),
            case: tag,
            passed,
            detail,
        });
    }
}

/// Run the verification pass: every table diff, every invariance residual,
/// every reduction certificate, plus the numeric cross-checks, optionally
/// restricted to one case family. Random draws come from a stream seeded
/// with `seed`, so equal (filter, seed) pairs give identical reports.
pub fn verify_all(filter: &VerifyFilter, seed: u64) -> VerifyReport {
    let mut r = Runner {
        filter: filter.clone(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        checks: Vec::new(),
        findings: Vec::new(),
    };
    check_classification(&mut r);
    check_commutators(&mut r);
    check_adjoints(&mut r);
    check_generators(&mut r);
    check_determining(&mut r);
    check_reductions(&mut r);
    check_stationary(&mut r);
    check_numerics(&mut r);
    check_optimal_system(&mut r);
    let Runner {
        checks,
        mut findings,
        ..
    } = r;
    findings.sort_by(|a, b| a.id.cmp(b.id));
    VerifyReport {
        filter: filter.clone(),
        seed,
        checks,
        findings,
    }
}

fn check_classification(r: &mut Runner) {
    for family in [CaseFamily::A, CaseFamily::B] {
        let name = format!("classification: case {} lines", family_tag(family));
        r.check(&name, Some(family), move |_, _| {
            for part in Part::ALL {
                let case = CaseId::ab(family, part);
                let (rr, kk) = case.rk().expect("A and B lines pin (r, k)");
                let got = classify(&rr, &kk).map_err(|e| e.to_string())?;
                if got != case {
                    return Err(format!(
                        "({rr}, {kk}) classified as {}, expected {}",
                        got.label(),
                        case.label()
                    ));
                }
            }
            Ok("4 lines recover their case labels from (r, k)".into())
        });
    }
    r.check("classification: case C lines", Some(CaseFamily::C), |_, _| {
        let picks = [
            (Part::I, rat(1, 1)),
            (Part::II, rat(-1, 4)),
            (Part::III, rat(3, 2)),
            (Part::IV, rat(-5, 3)),
        ];
        for (part, delta) in picks {
            let case = CaseId::c(part, delta);
            let (rr, kk) = case.rk().expect("case C lines pin (r, k)");
            let got = classify(&rr, &kk).map_err(|e| e.to_string())?;
            if got != case {
                return Err(format!(
                    "({rr}, {kk}) classified as {}, expected {}",
                    got.label(),
                    case.label()
                ));
            }
        }
        Ok("4 lines recover their case labels at sample delta values".into())
    });
    r.check("classification: generic pair and parameter guards", None, |_, _| {
        let got = classify(&rat(3, 10), &rat(7, 10)).map_err(|e| e.to_string())?;
        if got != CaseId::generic() {
            return Err(format!("(3/10, 7/10) classified as {}", got.label()));
        }
        if make_pde(rat(-1, 2), rat(1, 2), 1.0).is_ok() {
            return Err("degenerate pair (-1/2, 1/2) accepted".into());
        }
        if make_pde(rat(1, 2), rat(0, 1), 1.0).is_ok() {
            return Err("k = 0 accepted".into());
        }
        Ok("generic pair keeps the principal algebra; degenerate and k = 0 pairs rejected".into())
    });
}

fn diff_commutators(case: &CaseId) -> Result<String, String> {
    let sc = StructureConstants::for_case(case).map_err(|e| e.to_string())?;
    let expected = expected_commutators(case).map_err(|e| e.to_string())?;
    let n = sc.n();
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                if *sc.c(i, j, m) != expected[i][j][m] {
                    return Err(format!(
                        "{}: c[{i}][{j}][{m}] = {}, expected {}",
                        case.label(),
                        sc.c(i, j, m),
                        expected[i][j][m]
                    ));
                }
            }
        }
    }
    if !sc.is_antisymmetric() {
        return Err(format!("{}: table is not antisymmetric", case.label()));
    }
    if !sc.satisfies_jacobi() {
        return Err(format!("{}: Jacobi identity fails", case.label()));
    }
    Ok(format!(
        "{}: {n}x{n} table matches exactly; antisymmetry and Jacobi hold",
        case.label()
    ))
}

fn check_commutators(r: &mut Runner) {
    r.check("commutators: case A table", Some(CaseFamily::A), |_, _| {
        diff_commutators(&CaseId::ab(CaseFamily::A, Part::I))
    });
    r.check("commutators: case B table", Some(CaseFamily::B), |_, _| {
        diff_commutators(&CaseId::ab(CaseFamily::B, Part::I))
    });
    r.check(
        "commutators: case C table at five deltas",
        Some(CaseFamily::C),
        |_, _| {
            for delta in five_deltas() {
                diff_commutators(&CaseId::c_delta(delta))?;
            }
            Ok("tables match exactly at delta = 1/2, -1/2, 1, 3/2, -1/4".into())
        },
    );
    r.check("commutators: generic pair table", None, |_, _| {
        diff_commutators(&CaseId::generic())
    });
    r.check(
        "commutators: case C rejects delta = -1",
        Some(CaseFamily::C),
        |_, _| match StructureConstants::for_case(&CaseId::c_delta(rat(-1, 1))) {
            Err(LieAlgError::DegenerateDelta) => {
                Ok("degenerate delta rejected with a dedicated error".into())
            }
            Ok(_) => Err("delta = -1 accepted".into()),
            Err(e) => Err(format!("unexpected error: {e}")),
        },
    );
}

fn diff_adjoints(case: &CaseId) -> Result<(usize, f64), String> {
    let sc = StructureConstants::for_case(case).map_err(|e| e.to_string())?;
    let n = sc.n();
    let mut worst = 0.0f64;
    for generator in 1..=n {
        for &eps in &ADJOINT_EPS {
            let got = AdjointMatrix::new(&sc, generator, eps);
            let want = expected_adjoint(case, generator, eps).map_err(|e| e.to_string())?;
            for row in 0..n {
                for col in 0..n {
                    let d = (got.entry(row, col) - want[row][col]).abs();
                    worst = worst.max(d);
                    if d > ADJOINT_TOL {
                        return Err(format!(
                            "{}: Ad(exp({eps} X{generator})) entry ({row},{col}) off by {d:.3e}",
                            case.label()
                        ));
                    }
                }
            }
        }
    }
    Ok((n * ADJOINT_EPS.len(), worst))
}

fn check_adjoints(r: &mut Runner) {
    r.check("adjoint: case A closed forms", Some(CaseFamily::A), |_, _| {
        let (count, worst) = diff_adjoints(&CaseId::ab(CaseFamily::A, Part::I))?;
        Ok(format!(
            "{count} matrices within {ADJOINT_TOL:.0e} of the closed forms (worst {worst:.1e})"
        ))
    });
    r.check("adjoint: case B closed forms", Some(CaseFamily::B), |_, _| {
        let (count, worst) = diff_adjoints(&CaseId::ab(CaseFamily::B, Part::I))?;
        Ok(format!(
            "{count} matrices within {ADJOINT_TOL:.0e} of the closed forms (worst {worst:.1e})"
        ))
    });
    r.check(
        "adjoint: case C closed forms at five deltas",
        Some(CaseFamily::C),
        |_, _| {
            let mut count = 0;
            let mut worst = 0.0f64;
            for delta in five_deltas() {
                let (c, w) = diff_adjoints(&CaseId::c_delta(delta))?;
                count += c;
                worst = worst.max(w);
            }
            Ok(format!(
                "{count} matrices within {ADJOINT_TOL:.0e} of the closed forms (worst {worst:.1e})"
            ))
        },
    );
    r.check("adjoint: generic pair closed forms", None, |_, _| {
        let (count, worst) = diff_adjoints(&CaseId::generic())?;
        Ok(format!(
            "{count} matrices within {ADJOINT_TOL:.0e} of the closed forms (worst {worst:.1e})"
        ))
    });
}

fn random_jet_point(res: &Expr, rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut nb = NumBindings::new();
    nb.insert(Var::x(), rng.random_range(-1.5..=1.5));
    nb.insert(Var::t(), rng.random_range(-1.0..=1.0));
    nb.insert(Var::u(), rng.random_range(0.3..=2.0));
    nb.insert(Var::jet(1, 0), rng.random_range(-1.5..=1.5));
    nb.insert(Var::jet(2, 0), rng.random_range(-1.5..=1.5));
    nb.insert(Var::jet(3, 0), rng.random_range(-1.5..=1.5));
    nb.insert(Var::sym("omega"), rng.random_range(0.3..=2.0));
    res.eval(&nb).map_err(|e| e.to_string())
}

fn generator_residuals(
    case: &CaseId,
    rk: (Rat, Rat),
    rng: &mut ChaCha8Rng,
) -> Result<String, String> {
    let pde = make_pde(rk.0, rk.1, 1.0).map_err(|e| e.to_string())?;
    let cat = generators(case);
    let mut worst = 0.0f64;
    for (idx, g) in cat.basis.iter().enumerate() {
        let res = invariance_residual(g, pde.rhs()).map_err(|e| e.to_string())?;
        if !equivalent(&res, &Expr::zero()).holds() {
            return Err(format!(
                "X{}: residual is not symbolically zero: {res}",
                idx + 1
            ));
        }
        for _ in 0..RESIDUAL_POINTS {
            let v = random_jet_point(&res, rng)?;
            worst = worst.max(v.abs());
            if v.abs() >= RESIDUAL_TOL {
                return Err(format!(
                    "X{}: |residual| = {:.3e} at a sampled jet point",
                    idx + 1,
                    v.abs()
                ));
            }
        }
    }
    Ok(format!(
        "{}: {} generators symbolically exact; max |residual| {:.1e} over {} jet points each",
        case.label(),
        cat.basis.len(),
        worst,
        RESIDUAL_POINTS
    ))
}

fn check_generators(r: &mut Runner) {
    r.check(
        "generators: case A invariance residuals",
        Some(CaseFamily::A),
        |rng, _| {
            let case = CaseId::ab(CaseFamily::A, Part::I);
            let rk = case.rk().expect("A lines pin (r, k)");
            generator_residuals(&case, rk, rng)
        },
    );
    r.check(
        "generators: case B invariance residuals",
        Some(CaseFamily::B),
        |rng, _| {
            let case = CaseId::ab(CaseFamily::B, Part::I);
            let rk = case.rk().expect("B lines pin (r, k)");
            generator_residuals(&case, rk, rng)
        },
    );
    r.check(
        "generators: case C invariance residuals",
        Some(CaseFamily::C),
        |rng, _| {
            let case = CaseId::c(Part::I, rat(1, 1));
            let rk = case.rk().expect("C lines pin (r, k)");
            generator_residuals(&case, rk, rng)
        },
    );
    r.check(
        "generators: generic pair invariance residuals",
        None,
        |rng, _| generator_residuals(&CaseId::generic(), (rat(3, 10), rat(7, 10)), rng),
    );
}

fn determining_system(case: &CaseId, rk: (Rat, Rat)) -> Result<String, String> {
    let pde = make_pde(rk.0, rk.1, 1.0).map_err(|e| e.to_string())?;
    let eqs = determining_equations(pde.rhs(), &VectorField::unknown_ansatz())
        .map_err(|e| e.to_string())?;
    let cat = generators(case);
    for (idx, g) in cat.basis.iter().enumerate() {
        for eq in &eqs {
            let val = substitute_unknowns(eq, g);
            if !equivalent(&val, &Expr::zero()).holds() {
                return Err(format!(
                    "X{} violates a determining equation: residue {val}",
                    idx + 1
                ));
            }
        }
    }
    let zeros = implied_zero_atoms(&eqs);
    for (name, atom) in [
        ("xi_u", UnknownAtom { func: UnknownFunc::Xi, dx: 0, dt: 0, du: 1 }),
        ("tau_u", UnknownAtom { func: UnknownFunc::Tau, dx: 0, dt: 0, du: 1 }),
        ("tau_x", UnknownAtom { func: UnknownFunc::Tau, dx: 1, dt: 0, du: 0 }),
    ] {
        if !zeros.contains(&atom) {
            return Err(format!("system does not force {name} = 0"));
        }
    }
    Ok(format!(
        "{}: {} equations vanish on all {} generators; xi_u, tau_u, tau_x forced to zero",
        case.label(),
        eqs.len(),
        cat.basis.len()
    ))
}

fn check_determining(r: &mut Runner) {
    r.check("determining system: case A", Some(CaseFamily::A), |_, _| {
        let case = CaseId::ab(CaseFamily::A, Part::I);
        let rk = case.rk().expect("A lines pin (r, k)");
        determining_system(&case, rk)
    });
    r.check("determining system: case B", Some(CaseFamily::B), |_, _| {
        let case = CaseId::ab(CaseFamily::B, Part::I);
        let rk = case.rk().expect("B lines pin (r, k)");
        determining_system(&case, rk)
    });
    r.check("determining system: case C", Some(CaseFamily::C), |_, _| {
        let case = CaseId::c(Part::I, rat(1, 1));
        let rk = case.rk().expect("C lines pin (r, k)");
        determining_system(&case, rk)
    });
    r.check("determining system: generic pair", None, |_, _| {
        determining_system(&CaseId::generic(), (rat(3, 10), rat(7, 10)))
    });
}

fn draw_reduction_params(
    label: RepLabel,
    family: CaseFamily,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, f64> {
    let mut p = BTreeMap::new();
    let sign = |rng: &mut ChaCha8Rng| if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };
    match label {
        RepLabel::X2X4X5 => {
            p.insert("beta".to_string(), rng.random_range(0.5..=3.0));
            p.insert("gamma".to_string(), sign(rng) * rng.random_range(0.5..=2.0));
        }
        RepLabel::X1X2X4 => {
            // beta is drawn as a fraction of alpha^2/4 so the discriminant
            // alpha^2 - 4 beta stays strictly positive.
            let alpha = sign(rng) * rng.random_range(1.5..=3.0);
            let s: f64 = rng.random_range(-1.0..=0.8);
            p.insert("alpha".to_string(), alpha);
            p.insert("beta".to_string(), s * alpha * alpha / 4.0);
        }
        RepLabel::X1X4 => {
            p.insert("alpha".to_string(), sign(rng) * rng.random_range(0.4..=2.5));
        }
        RepLabel::X1X3 if family == CaseFamily::B => {
            p.insert("alpha".to_string(), rng.random_range(-0.8..=0.8));
        }
        _ => {}
    }
    p
}

fn certify_reduction(
    case: &CaseId,
    label: RepLabel,
    rng: &mut ChaCha8Rng,
) -> Result<String, String> {
    let testfns = standard_test_functions();
    let mut worst_spread = 0.0f64;
    let mut worst_isc = 0.0f64;
    for draw in 1..=2 {
        let params = draw_reduction_params(label, case.family(), rng);
        let omega = rng.random_range(0.4..=1.6);
        let rep = verify_reduction(case, label, &params, &testfns, omega)
            .map_err(|e| format!("draw {draw}: {e}"))?;
        if !(rep.certified && rep.isc_ok()) {
            return Err(format!(
                "draw {draw}: not certified (ratio spread {:.3e}, surface residual {:.3e}, params {:?}, Omega {omega:.3})",
                rep.max_spread, rep.isc_max, params
            ));
        }
        worst_spread = worst_spread.max(rep.max_spread);
        worst_isc = worst_isc.max(rep.isc_max);
    }
    Ok(format!(
        "2 draws certified; worst ratio spread {worst_spread:.1e}, worst surface residual {worst_isc:.1e}"
    ))
}

fn check_reductions(r: &mut Runner) {
    for (case, label) in reduction_schedule() {
        let name = format!("reduction: {} representative {}", case.label(), label.as_str());
        let tag = Some(case.family());
        let is_a_stationary = case.family() == CaseFamily::A && label == RepLabel::X1;
        let is_c34_lead =
            case.family() == CaseFamily::C && label == RepLabel::X1X4 && case.rk().map_or(false, |(rr, kk)| rr == kk.clone() - Rat::one());
        r.check(&name, tag, move |rng, findings| {
            let detail = certify_reduction(&case, label, rng)?;
            if is_a_stationary {
                let theta = theta_for(&case);
                findings.push(Finding {
                    id: "theta-case-a-stationary",
                    area: "reduction",
                    anchor: "case A stationary representative, parts iii-iv",
                    summary: "the theta table value 4 disagrees with the prose claim theta = 1 next to the stationary reduction".to_string(),
                    details: format!(
                        "the {} recipe carries theta = {theta} from the theta table and its reduced equation verifies; with theta = 1 the substitution does not reproduce the catalogued equation",
                        case.label()
                    ),
                    severity: Severity::Discrepancy,
                });
            }
            if is_c34_lead {
                findings.push(Finding {
                    id: "delta-convention-c-iii-iv",
                    area: "classification",
                    anchor: "case C parts iii-iv",
                    summary: "two delta conventions are in circulation for parts iii-iv; the classification table value is authoritative for generators".to_string(),
                    details: "the reduced equations of parts iii-iv use delta + 1/2 relative to the classification table's delta; generators, commutators, and adjoints all verify against the table value, and the recipes apply the shift internally".to_string(),
                    severity: Severity::Info,
                });
            }
            Ok(detail)
        });
    }
}

fn stationary_symbolic(case: &CaseId) -> Result<String, String> {
    let mult = verify_stationary_symbolic(case).map_err(|e| e.to_string())?;
    let want = stationary_multiplier(case);
    if mult != want {
        return Err(format!(
            "{}: multiplier {mult} differs from the frozen {want}",
            case.label()
        ));
    }
    Ok(format!(
        "{}: substitution reproduces the catalogued stationary equation (multiplier {mult})",
        case.label()
    ))
}

fn check_stationary(r: &mut Runner) {
    r.check(
        "reduction: stationary equation, case A",
        Some(CaseFamily::A),
        |_, _| stationary_symbolic(&CaseId::ab(CaseFamily::A, Part::I)),
    );
    r.check(
        "reduction: stationary equation, case B",
        Some(CaseFamily::B),
        |_, _| stationary_symbolic(&CaseId::ab(CaseFamily::B, Part::I)),
    );
    r.check(
        "reduction: stationary equation, case C",
        Some(CaseFamily::C),
        |_, _| {
            let first = stationary_symbolic(&CaseId::c(Part::I, rat(1, 1)))?;
            let second = stationary_symbolic(&CaseId::c(Part::III, rat(1, 1)))?;
            Ok(format!("{first}; {second}"))
        },
    );
}

fn stationary_profile_check() -> Result<String, String> {
    let case = CaseId::c(Part::I, rat(1, 1));
    let rec = recipe(&case, RepLabel::X1, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let omega = 1.0f64;
    let x0 = 1.0f64;
    let y0 = x0 / (3.0 * omega).sqrt();
    let problem =
        OdeProblem::from_recipe(&rec, omega, 0.0, y0, 0.0, 0.9 * x0).with_max_step(5e-4);
    let sol = integrate_ode(&problem).map_err(|e| e.to_string())?;
    if !matches!(sol.outcome, StopReason::SpanCompleted) {
        return Err(format!("integration stopped early: {:?}", sol.outcome));
    }
    let mut worst = 0.0f64;
    for i in 0..=180 {
        let z = 0.9 * x0 * i as f64 / 180.0;
        let (y, _) = sol.sample(z).map_err(|e| e.to_string())?;
        let want = ((x0 * x0 - z * z) / (3.0 * omega)).sqrt();
        worst = worst.max((y - want).abs());
    }
    if worst >= 1e-7 {
        return Err(format!("max deviation {worst:.3e} from the closed form"));
    }
    Ok(format!(
        "closed-form profile reproduced to {worst:.1e} on 0 <= zeta <= 0.9 x0"
    ))
}

fn invariant_evolution_check() -> Result<String, String> {
    let case = CaseId::c(Part::I, rat(1, 1));
    let rec = recipe(&case, RepLabel::X1X3, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let omega = 0.2;
    let (rr, kk) = case.rk().expect("C lines pin (r, k)");
    let pde = make_pde(rr, kk, omega).map_err(|e| e.to_string())?;
    let (t_lo, t_hi) = (0.3, 0.32);
    let problem = OdeProblem::from_recipe(&rec, omega, 0.0, 0.4, 0.0, 2.5).with_max_step(1e-3);
    let sol = integrate_ode(&problem).map_err(|e| e.to_string())?;
    let reach = sol.span().1;
    let g_max = rec.zeta_at(1.0, t_lo).v.max(rec.zeta_at(1.0, t_hi).v);
    if !(g_max > 0.0 && reach > 0.0) {
        return Err("degenerate evaluation window".into());
    }
    let x_last = 0.8 * reach / g_max;
    let n = 120usize;
    let x_first = x_last / (2 * n - 1) as f64;
    let exact = build_solution(&rec, &sol, (x_first, x_last), n, (t_lo, t_hi), 2)
        .map_err(|e| e.to_string())?;
    let run = evolve_pde(
        exact.level(0),
        (x_first, x_last),
        &pde,
        (t_lo, t_hi),
        &EvolveOptions {
            n_saves: 2,
            ..EvolveOptions::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let got = run.field.level(1);
    let want = exact.level(1);
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..n {
        if exact.xs()[i] > 0.6 * x_last {
            continue;
        }
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    let rel = (num / den).sqrt();
    if rel >= 1e-2 {
        return Err(format!("invariant-solution mismatch, rel L2 {rel:.3e}"));
    }
    let mass_rel = (run.mass_drift / run.mass_initial).abs();
    if mass_rel >= 1e-6 {
        return Err(format!("relative mass drift {mass_rel:.3e}"));
    }
    Ok(format!(
        "reduced-equation solution reproduced to rel L2 {rel:.1e}; relative mass drift {mass_rel:.1e}"
    ))
}

fn mass_conservation_check(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let pde = make_pde(rat(1, 1), rat(1, 1), 0.7).map_err(|e| e.to_string())?;
    let u0: Vec<f64> = (0..64).map(|_| rng.random_range(0.5..=1.1)).collect();
    let run = evolve_pde(
        &u0,
        (-0.9, 0.9),
        &pde,
        (0.0, 0.02),
        &EvolveOptions {
            n_saves: 3,
            ..EvolveOptions::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let rel = (run.mass_drift / run.mass_initial).abs();
    if rel >= 1e-6 {
        return Err(format!("relative mass drift {rel:.3e}"));
    }
    Ok(format!(
        "relative mass drift {rel:.1e} over {} accepted steps",
        run.steps
    ))
}

fn residual_slope_check(findings: &mut Vec<Finding>) -> Result<String, String> {
    let pde = make_pde(rat(1, 1), rat(1, 1), 1.0).map_err(|e| e.to_string())?;
    let u = |x: f64, _t: f64| ((1.0 - x * x) / 3.0).sqrt();
    let rep = residual_convergence(u, &pde, (-0.8, 0.8), (0.0, 0.5), 101, 7)
        .map_err(|e| e.to_string())?;
    let slope = rep.sup_slope.ok_or("no refinement slope computed")?;
    let finest = &rep.finest;
    findings.push(Finding {
        id: "residual-example-magnitude",
        area: "numerics",
        anchor: "stationary benchmark residual",
        summary: "one-sided edge stencils floor the stationary benchmark sup residual near 2e-4".to_string(),
        details: format!(
            "finest grid ({} x {}) sup residual {:.3e} with refinement slope {:.2}; sup tolerances below ~1e-4 are not reachable with second-order stencils on this benchmark",
            finest.n_x, finest.n_t, finest.sup_norm, slope
        ),
        severity: Severity::Info,
    });
    if !(1.7..=2.3).contains(&slope) {
        return Err(format!("sup-norm slope {slope:.3} outside 2.0 +/- 0.3"));
    }
    Ok(format!(
        "sup-norm refinement slope {slope:.2} within 2.0 +/- 0.3 (finest sup {:.1e})",
        finest.sup_norm
    ))
}

fn backward_parabolic_check(findings: &mut Vec<Finding>) -> Result<String, String> {
    let pde = make_pde(rat(-1, 1), rat(-1, 1), 1.0).map_err(|e| e.to_string())?;
    let n = 64usize;
    let u0: Vec<f64> = (0..n)
        .map(|i| {
            let x = -0.5 + (i as f64 + 0.5) / n as f64;
            1.0 + 0.5 * (6.0 * std::f64::consts::PI * x).sin()
        })
        .collect();
    findings.push(Finding {
        id: "case-b-backward-parabolic",
        area: "numerics",
        anchor: "case B nonlinearity",
        summary: "every case B line has a decreasing flux potential, so forward initial-value evolution is ill-posed".to_string(),
        details: "Lambda'(u) < 0 for u > 0 on the B lines (part i gives Lambda = 1/u); grid modes grow without bound and the stepper halts with an explicit stop instead of returning polluted fields".to_string(),
        severity: Severity::Info,
    });
    match evolve_pde(&u0, (-0.5, 0.5), &pde, (0.0, 0.05), &EvolveOptions::default()) {
        Err(EvolveError::PositivityLoss { t }) => {
            Ok(format!("ill-posed run stopped by positivity loss at t = {t:.2e}"))
        }
        Err(EvolveError::NonFinite { t }) => {
            Ok(format!("ill-posed run stopped by non-finite values at t = {t:.2e}"))
        }
        Err(EvolveError::CflUnderflow { t, .. }) => {
            Ok(format!("ill-posed run stopped by step-size collapse at t = {t:.2e}"))
        }
        Ok(_) => Err("ill-posed run completed without a stop".into()),
        Err(e) => Err(format!("unexpected failure mode: {e}")),
    }
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Expr {
    let mut num = rng.random_range(-3i64..=3);
    if num == 0 {
        num = 1;
    }
    Expr::rational(rat(num, rng.random_range(1i64..=3)))
}

/// An expression bounded away from zero on |x| <= 1, safe under ln and
/// fractional powers.
fn positive_expr(rng: &mut ChaCha8Rng) -> Expr {
    match rng.random_range(0..3) {
        0 => Expr::int(2) + Expr::x() * Expr::x(),
        1 => Expr::exp(random_coeff(rng) * Expr::x()),
        _ => Expr::int(5) + random_coeff(rng) * Expr::x(),
    }
}

fn random_safe_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 {
        return match rng.random_range(0..3) {
            0 => Expr::x(),
            1 => random_coeff(rng),
            _ => random_coeff(rng) * Expr::x(),
        };
    }
    match rng.random_range(0..6) {
        0 => random_safe_expr(rng, depth - 1) + random_safe_expr(rng, depth - 1),
        1 => random_safe_expr(rng, depth - 1) - random_safe_expr(rng, depth - 1),
        2 => random_safe_expr(rng, depth - 1) * random_safe_expr(rng, depth - 1),
        3 => Expr::exp(random_coeff(rng) * Expr::x()),
        4 => Expr::ln(positive_expr(rng)),
        _ => Expr::pow(
            positive_expr(rng),
            Expr::rational(rat(rng.random_range(-3i64..=3), rng.random_range(2i64..=3))),
        ),
    }
}

fn fd_derivative_check(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut used = 0usize;
    let total = 30usize;
    for idx in 0..total {
        let e = random_safe_expr(rng, 3);
        let de = e.diff(&Var::x());
        let value_at = |expr: &Expr, z: f64| -> Option<f64> {
            let mut nb = NumBindings::new();
            nb.insert(Var::x(), z);
            expr.eval(&nb).ok().filter(|v| v.is_finite() && v.abs() < 1e6)
        };
        let mut points = 0usize;
        for _ in 0..5 {
            if points >= 3 {
                break;
            }
            let x = rng.random_range(-1.0..=1.0);
            let h = 1e-3;
            let (Some(f1), Some(f2), Some(f3), Some(f4)) = (
                value_at(&e, x + h),
                value_at(&e, x - h),
                value_at(&e, x + 2.0 * h),
                value_at(&e, x - 2.0 * h),
            ) else {
                continue;
            };
            let Some(sym) = value_at(&de, x) else { continue };
            let fd = (8.0 * (f1 - f2) - (f3 - f4)) / (12.0 * h);
            let rel = (fd - sym).abs() / (1.0 + sym.abs());
            worst = worst.max(rel);
            if rel >= 1e-5 {
                return Err(format!(
                    "expression {idx}: relative derivative error {rel:.3e} at x = {x:.3}"
                ));
            }
            points += 1;
        }
        if points > 0 {
            used += 1;
        }
    }
    if used < 25 {
        return Err(format!("only {used} of {total} expressions were evaluable"));
    }
    Ok(format!(
        "{used} random expressions differentiate within 1e-5 of finite differences (worst {worst:.1e})"
    ))
}

fn check_numerics(r: &mut Runner) {
    r.check(
        "numerics: stationary profile closed form",
        Some(CaseFamily::C),
        |_, _| stationary_profile_check(),
    );
    r.check(
        "numerics: invariant solution time-stepping",
        Some(CaseFamily::C),
        |_, _| invariant_evolution_check(),
    );
    r.check(
        "numerics: cell-mass conservation",
        Some(CaseFamily::C),
        |rng, _| mass_conservation_check(rng),
    );
    r.check(
        "numerics: residual refinement slope",
        Some(CaseFamily::C),
        |_, findings| residual_slope_check(findings),
    );
    r.check(
        "numerics: case B evolution stops honestly",
        Some(CaseFamily::B),
        |_, findings| backward_parabolic_check(findings),
    );
    r.check(
        "numerics: symbolic vs finite-difference derivatives",
        None,
        |rng, _| fd_derivative_check(rng),
    );
}

fn fixed_point_check(family: CaseFamily) -> Result<String, String> {
    let reps = optimal_system_representatives(family);
    for (case, coeffs, label, _) in &reps {
        let n = normalize_element(&AlgebraElement::new(coeffs.clone()), case)
            .map_err(|e| format!("{}: {e}", label.as_str()))?;
        if n.label != *label {
            return Err(format!(
                "{} normalized to {} instead of itself",
                label.as_str(),
                n.label.as_str()
            ));
        }
        if !n.moves.is_empty() {
            return Err(format!(
                "{} needed {} moves to reach itself",
                label.as_str(),
                n.moves.len()
            ));
        }
    }
    Ok(format!(
        "{} representatives are normalization fixed points with empty move logs",
        reps.len()
    ))
}

fn label_stability_check(
    family: CaseFamily,
    rounds: usize,
    rng: &mut ChaCha8Rng,
) -> Result<String, String> {
    let reps = optimal_system_representatives(family);
    let mut total = 0usize;
    for (case, rep, label, movable) in &reps {
        for _ in 0..rounds {
            let mut coeffs = rep.clone();
            for _ in 0..rng.random_range(1..=2) {
                let generator = movable[rng.random_range(0..movable.len())];
                let eps: f64 = rng.random_range(-0.05..=0.05);
                coeffs = adjoint_move(case, &coeffs, generator, eps);
            }
            let factor: f64 = rng.random_range(0.5..=2.0);
            for x in coeffs.iter_mut() {
                *x *= factor;
            }
            let n = normalize_element(&AlgebraElement::new(coeffs.clone()), case)
                .map_err(|e| format!("{}: {coeffs:?}: {e}", label.as_str()))?;
            if n.label != *label {
                return Err(format!(
                    "{}: perturbation normalized to {} ({coeffs:?})",
                    label.as_str(),
                    n.label.as_str()
                ));
            }
            total += 1;
        }
    }
    Ok(format!(
        "{total} perturbed elements recover their labels ({} representatives x {rounds} draws)",
        reps.len()
    ))
}

fn check_optimal_system(r: &mut Runner) {
    for family in [CaseFamily::A, CaseFamily::B, CaseFamily::C] {
        let name = format!("optimal system: case {} fixed points", family_tag(family));
        r.check(&name, Some(family), move |_, _| fixed_point_check(family));
    }
    r.check(
        "optimal system: case A label stability",
        Some(CaseFamily::A),
        |rng, findings| {
            findings.push(Finding {
                id: "optimal-system-a-strata-not-closed",
                area: "optimal-system",
                anchor: "case A adjoint action of X4",
                summary: "the catalogued case A strata are not closed under the full adjoint group".to_string(),
                details: "Ad(exp(eps X4)) maps X1 to X1 + eps X4 and moves any element with a nonzero X2 coefficient off the a4 = 0 stratum, so elements of the alpha X1 + X3 and X1 families escape the catalog under generator 4; normalization therefore uses the documented move set without generator 4 and reports elements reachable only through it as outside the optimal system".to_string(),
                severity: Severity::Discrepancy,
            });
            findings.push(Finding {
                id: "optimal-system-a-overlapping-families",
                area: "optimal-system",
                anchor: "case A representatives",
                summary: "the catalogued case A families overlap as adjoint orbits".to_string(),
                details: "Ad(exp(3/2 X3)) maps X1 + X3 to X1, so those two catalogued families describe one orbit, and the beta X2 + X4 + gamma X5 and alpha X1 + beta X2 + X4 families meet on a parameter set; normalization keeps the labels distinct by deterministic tie-breaking (smaller group parameter first)".to_string(),
                severity: Severity::Discrepancy,
            });
            label_stability_check(CaseFamily::A, PERTURBATION_ROUNDS, rng)
        },
    );
    r.check(
        "optimal system: case B label stability",
        Some(CaseFamily::B),
        |rng, findings| {
            findings.push(Finding {
                id: "optimal-system-b-alpha-range",
                area: "optimal-system",
                anchor: "case B representative alpha X1 + X3",
                summary: "alpha X1 + X3 reduces to X1 for alpha outside (0, 1]".to_string(),
                details: "Ad(exp(eps X4)) sends alpha X1 + X3 to alpha X1 + (alpha + (1 - alpha) exp(-eps)) X3, so the X3 component is removable exactly when alpha/(alpha - 1) > 0; the catalogued family is a genuine stratum only for alpha in (0, 1]".to_string(),
                severity: Severity::Discrepancy,
            });
            label_stability_check(CaseFamily::B, PERTURBATION_ROUNDS, rng)
        },
    );
    r.check(
        "optimal system: case C label stability",
        Some(CaseFamily::C),
        |rng, findings| {
            findings.push(Finding {
                id: "optimal-system-c-collapsible-representative",
                area: "optimal-system",
                anchor: "case C representative alpha X1 + X3",
                summary: "alpha X1 + X3 reduces to X1 for every alpha != 0".to_string(),
                details: "with q = 2(1 + delta) != 0, Ad(exp(eps X3)) shifts the X3 coefficient of alpha X1 + X3 by -alpha q eps, so eps = 1/(alpha q) removes it entirely; only alpha = 0 (X3 alone) is irreducible in that family".to_string(),
                severity: Severity::Discrepancy,
            });
            label_stability_check(CaseFamily::C, PERTURBATION_ROUNDS, rng)
        },
    );
}
