//! The STM-NFPE family: PDE construction for given (r, k, Ω), exact
//! parameter-case classification, and the symmetry generator catalog.
//!
//! The equation is
//!
//! ```text
//! u_t = D_x(x u) + Ω D_x²[Λ(u)],
//! Λ(u) = (r+k)/(2k) u^(1+r+k) − (r−k)/(2k) u^(1+r−k),   k ≠ 0.
//! ```
//!
//! Every (r, k) admits the principal algebra spanned by X₁ = ∂t and
//! X₂ = e^(−t)∂x. Along the four lines r = ±k and r = −1 ± k the algebra
//! extends; the extended cases split into families A (dimension 5), B
//! (dimension 4), and C (dimension 4, parametrized by δ) at the specific
//! k values encoded below.

use crate::jets::{total_x, EvolutionPde, VectorField};
use crate::symexpr::{rat, Expr, Rat};
use num_traits::{One, Zero};
use serde_json::json;
use std::fmt;

/// Errors from family construction and classification.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("k = 0 is outside the entropy parameter domain")]
    ZeroK,
    #[error(
        "(r, k) = (-1/2, \u{b1}1/2) degenerates to a first-order linear equation \
         with an infinite-dimensional symmetry algebra"
    )]
    Degenerate,
}

/// Symmetry family a parameter pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CaseFamily {
    Generic,
    A,
    B,
    C,
}

impl fmt::Display for CaseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseFamily::Generic => "Generic",
            CaseFamily::A => "A",
            CaseFamily::B => "B",
            CaseFamily::C => "C",
        };
        f.write_str(s)
    }
}

/// Which of the four parameter lines an extended case sits on:
/// (i) r = k, (ii) r = −k, (iii) r = −1 + k, (iv) r = −1 − k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Part {
    I,
    II,
    III,
    IV,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::I, Part::II, Part::III, Part::IV];

    /// The defining line as a human-readable constraint.
    pub fn constraint(&self) -> &'static str {
        match self {
            Part::I => "r = k",
            Part::II => "r = -k",
            Part::III => "r = -1 + k",
            Part::IV => "r = -1 - k",
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Part::I => "i",
            Part::II => "ii",
            Part::III => "iii",
            Part::IV => "iv",
        };
        f.write_str(s)
    }
}

/// Identifier of a symmetry case: family, optional line part, and the δ
/// value for family C.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseId {
    family: CaseFamily,
    part: Option<Part>,
    delta: Option<Rat>,
}

impl CaseId {
    /// The principal-algebra-only case.
    pub fn generic() -> Self {
        CaseId {
            family: CaseFamily::Generic,
            part: None,
            delta: None,
        }
    }

    /// A case-A or case-B identifier.
    pub fn ab(family: CaseFamily, part: Part) -> Self {
        assert!(
            matches!(family, CaseFamily::A | CaseFamily::B),
            "use CaseId::c or CaseId::generic for other families"
        );
        CaseId {
            family,
            part: Some(part),
            delta: None,
        }
    }

    /// A case-C identifier on a specific line with its δ.
    pub fn c(part: Part, delta: Rat) -> Self {
        assert!(!delta.is_zero(), "case C is undefined at delta = 0");
        CaseId {
            family: CaseFamily::C,
            part: Some(part),
            delta: Some(delta),
        }
    }

    /// A case-C identifier by δ alone, for algebra-level work at δ values no
    /// parameter pair reaches.
    pub fn c_delta(delta: Rat) -> Self {
        assert!(!delta.is_zero(), "case C is undefined at delta = 0");
        CaseId {
            family: CaseFamily::C,
            part: None,
            delta: Some(delta),
        }
    }

    pub fn family(&self) -> CaseFamily {
        self.family
    }

    pub fn part(&self) -> Option<Part> {
        self.part
    }

    /// The stored δ (family C only).
    pub fn delta(&self) -> Option<&Rat> {
        self.delta.as_ref()
    }

    /// The table δ of the case: −2/3 for A, −1 for B, stored value for C.
    pub fn delta_value(&self) -> Option<Rat> {
        match self.family {
            CaseFamily::Generic => None,
            CaseFamily::A => Some(rat(-2, 3)),
            CaseFamily::B => Some(rat(-1, 1)),
            CaseFamily::C => self.delta.clone(),
        }
    }

    /// The exact (r, k) this case identifies, when determined.
    pub fn rk(&self) -> Option<(Rat, Rat)> {
        let part = self.part?;
        let k: Rat = match self.family {
            CaseFamily::Generic => return None,
            CaseFamily::A => match part {
                Part::I => rat(-2, 3),
                Part::II => rat(2, 3),
                Part::III => rat(-1, 6),
                Part::IV => rat(1, 6),
            },
            CaseFamily::B => match part {
                Part::I => rat(-1, 1),
                Part::II => rat(1, 1),
                Part::III => rat(-1, 2),
                Part::IV => rat(1, 2),
            },
            CaseFamily::C => {
                let d = self.delta.clone()?;
                match part {
                    Part::I => d,
                    Part::II => -d,
                    Part::III => d + rat(1, 2),
                    Part::IV => -(d + rat(1, 2)),
                }
            }
        };
        let r = match part {
            Part::I => k.clone(),
            Part::II => -k.clone(),
            Part::III => k.clone() - Rat::one(),
            Part::IV => -k.clone() - Rat::one(),
        };
        Some((r, k))
    }

    /// Short label like "A(i)" or "C(iii)".
    pub fn label(&self) -> String {
        match (self.family, self.part) {
            (CaseFamily::Generic, _) => "Generic".to_string(),
            (f, Some(p)) => format!("{f}({p})"),
            (f, None) => f.to_string(),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())?;
        if let Some(d) = &self.delta {
            write!(f, ", delta = {d}")?;
        }
        Ok(())
    }
}

/// One member of the equation family with exact parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeInstance {
    pub r: Rat,
    pub k: Rat,
    pub omega: f64,
    rhs: EvolutionPde,
}

impl PdeInstance {
    /// The evolution right-hand side F with Ω kept as the symbol `omega`.
    pub fn rhs(&self) -> &EvolutionPde {
        &self.rhs
    }

    /// The nonlinearity Λ(u) of this instance.
    pub fn lambda(&self) -> Expr {
        lambda_expr(&self.r, &self.k)
    }
}

fn check_parameters(r: &Rat, k: &Rat) -> Result<(), FamilyError> {
    if k.is_zero() {
        return Err(FamilyError::ZeroK);
    }
    let half = rat(1, 2);
    if *r == -half.clone() && (*k == half || *k == -half) {
        return Err(FamilyError::Degenerate);
    }
    Ok(())
}

fn lambda_expr(r: &Rat, k: &Rat) -> Expr {
    let two_k = rat(2, 1) * k.clone();
    let c_plus = (r.clone() + k.clone()) / two_k.clone();
    let c_minus = (r.clone() - k.clone()) / two_k;
    let e_plus = Rat::one() + r.clone() + k.clone();
    let e_minus = Rat::one() + r.clone() - k.clone();
    let term = |c: Rat, e: Rat| {
        Expr::rational(c) * Expr::pow(Expr::u(), Expr::rational(e))
    };
    term(c_plus, e_plus) - term(c_minus, e_minus)
}

/// Build the family member for exact (r, k) and diffusion coefficient Ω.
pub fn make_pde(r: Rat, k: Rat, omega: f64) -> Result<PdeInstance, FamilyError> {
    assert!(omega > 0.0, "diffusion coefficient must be positive");
    check_parameters(&r, &k)?;
    let lambda = lambda_expr(&r, &k);
    let diffusion = total_x(&total_x(&lambda).unwrap()).unwrap();
    let rhs = total_x(&(Expr::x() * Expr::u())).unwrap() + Expr::symbol("omega") * diffusion;
    Ok(PdeInstance {
        r,
        k,
        omega,
        rhs: EvolutionPde::new(rhs),
    })
}

/// Classify a parameter pair by the symmetry algebra it admits.
pub fn classify(r: &Rat, k: &Rat) -> Result<CaseId, FamilyError> {
    check_parameters(r, k)?;
    let minus_one = -Rat::one();
    let on_i = *r == *k;
    let on_ii = *r == -k.clone();
    let on_iii = *r == minus_one.clone() + k.clone();
    let on_iv = *r == minus_one - k.clone();
    let id = if on_i {
        if *k == rat(-2, 3) {
            CaseId::ab(CaseFamily::A, Part::I)
        } else if *k == rat(-1, 1) {
            CaseId::ab(CaseFamily::B, Part::I)
        } else {
            CaseId::c(Part::I, k.clone())
        }
    } else if on_ii {
        if *k == rat(2, 3) {
            CaseId::ab(CaseFamily::A, Part::II)
        } else if *k == rat(1, 1) {
            CaseId::ab(CaseFamily::B, Part::II)
        } else {
            CaseId::c(Part::II, -k.clone())
        }
    } else if on_iii {
        if *k == rat(-1, 6) {
            CaseId::ab(CaseFamily::A, Part::III)
        } else if *k == rat(-1, 2) {
            CaseId::ab(CaseFamily::B, Part::III)
        } else {
            CaseId::c(Part::III, k.clone() - rat(1, 2))
        }
    } else if on_iv {
        if *k == rat(1, 6) {
            CaseId::ab(CaseFamily::A, Part::IV)
        } else if *k == rat(1, 2) {
            CaseId::ab(CaseFamily::B, Part::IV)
        } else {
            CaseId::c(Part::IV, -k.clone() - rat(1, 2))
        }
    } else {
        CaseId::generic()
    };
    Ok(id)
}

/// The ordered generator basis a case admits.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorCatalog {
    pub case: CaseId,
    pub basis: Vec<VectorField>,
}

/// Build the generator catalog of a case. The basis always starts with the
/// principal pair X₁ = ∂t, X₂ = e^(−t)∂x.
pub fn generators(case: &CaseId) -> GeneratorCatalog {
    let x = Expr::x();
    let t = Expr::t();
    let u = Expr::u();
    let x1 = VectorField::new(Expr::zero(), Expr::one(), Expr::zero());
    let x2 = VectorField::new(Expr::exp(-t.clone()), Expr::zero(), Expr::zero());
    let mut basis = vec![x1, x2];
    match case.family() {
        CaseFamily::Generic => {}
        CaseFamily::A => {
            let decay = Expr::exp(Expr::ratio(-2, 3) * t.clone());
            basis.push(VectorField::new(
                decay.clone() * x.clone(),
                -decay.clone(),
                -(decay * u.clone()),
            ));
            let grow = Expr::exp(t.clone());
            basis.push(VectorField::new(
                x.clone() * x.clone() * grow.clone(),
                Expr::zero(),
                Expr::int(-3) * x.clone() * u.clone() * grow,
            ));
            basis.push(VectorField::new(
                x,
                Expr::int(-1),
                Expr::ratio(-3, 2) * u,
            ));
        }
        CaseFamily::B => {
            basis.push(VectorField::new(x.clone(), Expr::int(-1), -u.clone()));
            basis.push(VectorField::new(
                t.clone() * x,
                -t.clone(),
                -(u * (t + Expr::ratio(1, 2))),
            ));
        }
        CaseFamily::C => {
            let delta = case
                .delta()
                .expect("case C identifier always carries delta")
                .clone();
            let q = rat(2, 1) * (Rat::one() + delta.clone());
            let decay = Expr::exp(Expr::rational(-q) * t);
            basis.push(VectorField::new(
                decay.clone() * x.clone(),
                -decay.clone(),
                -(decay * u.clone()),
            ));
            basis.push(VectorField::new(
                x,
                Expr::int(-1),
                Expr::rational(delta.recip()) * u,
            ));
        }
    }
    GeneratorCatalog {
        case: case.clone(),
        basis,
    }
}

/// The k values family C excludes on each line (degenerate or claimed by
/// families A and B).
pub fn case_c_excluded_k(part: Part) -> Vec<Rat> {
    match part {
        Part::I => vec![rat(-1, 2), rat(-2, 3), rat(-1, 1)],
        Part::II => vec![rat(1, 2), rat(2, 3), rat(1, 1)],
        Part::III => vec![rat(-1, 2), rat(1, 2), rat(-1, 6)],
        Part::IV => vec![rat(-1, 2), rat(1, 2), rat(1, 6)],
    }
}

impl GeneratorCatalog {
    /// Structured export: case label, parameter constraints, and generator
    /// components as grammar strings.
    pub fn to_json(&self) -> serde_json::Value {
        let case = &self.case;
        let rk = case.rk();
        let gens: Vec<serde_json::Value> = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, g)| {
                json!({
                    "name": format!("X{}", i + 1),
                    "xi": g.xi.to_string(),
                    "tau": g.tau.to_string(),
                    "eta": g.eta.to_string(),
                })
            })
            .collect();
        json!({
            "case": case.label(),
            "family": case.family().to_string(),
            "part": case.part().map(|p| p.to_string()),
            "constraint": case.part().map(|p| p.constraint()),
            "delta": case.delta_value().map(|d| d.to_string()),
            "excluded_k": match case.family() {
                CaseFamily::C => case.part().map(|p| {
                    case_c_excluded_k(p)
                        .iter()
                        .map(Rat::to_string)
                        .collect::<Vec<_>>()
                }),
                _ => None,
            },
            "r": rk.as_ref().map(|(r, _)| r.to_string()),
            "k": rk.as_ref().map(|(_, k)| k.to_string()),
            "generators": gens,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::invariance_residual;
    use crate::symexpr::{equivalent, parse};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn make_pde_cubic_case() {
        let pde = make_pde(rat(1, 1), rat(1, 1), 1.0).unwrap();
        let want = p("u + x*u_x + omega*(3*u^2*u_xx + 6*u*u_x^2)");
        assert_eq!(*pde.rhs().rhs(), want);
        assert_eq!(pde.lambda(), p("u^3"));
    }

    #[test]
    fn make_pde_constant_part_of_lambda_drops() {
        let pde = make_pde(rat(0, 1), rat(1, 1), 1.0).unwrap();
        let want = p("u + x*u_x + omega*(u*u_xx + u_x^2)");
        assert_eq!(*pde.rhs().rhs(), want);
        assert_eq!(pde.lambda(), p("1/2*u^2 + 1/2"));
    }

    #[test]
    fn make_pde_rejects_bad_parameters() {
        assert_eq!(
            make_pde(rat(-1, 2), rat(1, 2), 1.0).unwrap_err(),
            FamilyError::Degenerate
        );
        assert_eq!(
            make_pde(rat(-1, 2), rat(-1, 2), 1.0).unwrap_err(),
            FamilyError::Degenerate
        );
        assert_eq!(make_pde(rat(1, 1), rat(0, 1), 1.0).unwrap_err(), FamilyError::ZeroK);
    }

    #[test]
    fn lambda_is_even_in_k() {
        for (r, k) in [(rat(1, 3), rat(5, 6)), (rat(-7, 6), rat(1, 6))] {
            let a = make_pde(r.clone(), k.clone(), 1.0).unwrap();
            let b = make_pde(r, -k, 1.0).unwrap();
            assert_eq!(a.rhs(), b.rhs());
        }
    }

    #[test]
    fn classify_examples() {
        let a = classify(&rat(-2, 3), &rat(-2, 3)).unwrap();
        assert_eq!(a, CaseId::ab(CaseFamily::A, Part::I));
        let b = classify(&rat(-1, 1), &rat(-1, 1)).unwrap();
        assert_eq!(b, CaseId::ab(CaseFamily::B, Part::I));
        let c = classify(&rat(1, 1), &rat(1, 1)).unwrap();
        assert_eq!(c, CaseId::c(Part::I, rat(1, 1)));
        let g = classify(&rat(3, 10), &rat(7, 10)).unwrap();
        assert_eq!(g, CaseId::generic());
    }

    #[test]
    fn classify_all_parts() {
        assert_eq!(
            classify(&rat(-2, 3), &rat(2, 3)).unwrap(),
            CaseId::ab(CaseFamily::A, Part::II)
        );
        assert_eq!(
            classify(&rat(-7, 6), &rat(-1, 6)).unwrap(),
            CaseId::ab(CaseFamily::A, Part::III)
        );
        assert_eq!(
            classify(&rat(-7, 6), &rat(1, 6)).unwrap(),
            CaseId::ab(CaseFamily::A, Part::IV)
        );
        assert_eq!(
            classify(&rat(-1, 1), &rat(1, 1)).unwrap(),
            CaseId::ab(CaseFamily::B, Part::II)
        );
        assert_eq!(
            classify(&rat(-3, 2), &rat(-1, 2)).unwrap(),
            CaseId::ab(CaseFamily::B, Part::III)
        );
        assert_eq!(
            classify(&rat(-3, 2), &rat(1, 2)).unwrap(),
            CaseId::ab(CaseFamily::B, Part::IV)
        );
        assert_eq!(
            classify(&rat(-1, 2), &rat(1, 2)).unwrap_err(),
            FamilyError::Degenerate
        );
        assert_eq!(
            classify(&rat(1, 2), &rat(3, 2)).unwrap(),
            CaseId::c(Part::III, rat(1, 1))
        );
        assert_eq!(
            classify(&rat(-5, 2), &rat(3, 2)).unwrap(),
            CaseId::c(Part::IV, rat(-2, 1))
        );
    }

    #[test]
    fn case_id_recovers_parameters() {
        let grid: Vec<Rat> = {
            let mut v = Vec::new();
            for num in -6i64..=6 {
                for den in 1i64..=6 {
                    let q = rat(num, den);
                    if !v.contains(&q) {
                        v.push(q);
                    }
                }
            }
            v
        };
        for r in &grid {
            for k in &grid {
                let Ok(case) = classify(r, k) else { continue };
                if case.family() == CaseFamily::Generic {
                    continue;
                }
                let (rr, kk) = case.rk().expect("extended case determines (r, k)");
                assert_eq!((&rr, &kk), (r, k), "case {case}");
            }
        }
    }

    #[test]
    fn classification_mirrors_under_k_negation() {
        let mirror = |p: Part| match p {
            Part::I => Part::II,
            Part::II => Part::I,
            Part::III => Part::IV,
            Part::IV => Part::III,
        };
        let mut checked = 0;
        for num in -6i64..=6 {
            for den in 1i64..=6 {
                let k = rat(num, den);
                if k.is_zero() {
                    continue;
                }
                for r_line in [k.clone(), -k.clone(), k.clone() - Rat::one()] {
                    let (Ok(a), Ok(b)) = (classify(&r_line, &k), classify(&r_line, &-k.clone()))
                    else {
                        continue;
                    };
                    assert_eq!(a.family(), b.family(), "family at r={r_line}, k={k}");
                    if a.family() != CaseFamily::Generic {
                        assert_eq!(b.part(), a.part().map(mirror));
                        assert_eq!(a.delta(), b.delta(), "delta preserved under mirror");
                    }
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn catalog_shapes() {
        assert_eq!(generators(&CaseId::generic()).basis.len(), 2);
        assert_eq!(generators(&CaseId::ab(CaseFamily::A, Part::I)).basis.len(), 5);
        assert_eq!(generators(&CaseId::ab(CaseFamily::B, Part::II)).basis.len(), 4);
        assert_eq!(generators(&CaseId::c(Part::I, rat(1, 1))).basis.len(), 4);
        for case in [
            CaseId::generic(),
            CaseId::ab(CaseFamily::A, Part::III),
            CaseId::c_delta(rat(-1, 2)),
        ] {
            let cat = generators(&case);
            assert_eq!(cat.basis[0], VectorField::new(p("0"), p("1"), p("0")));
            assert_eq!(cat.basis[1], VectorField::new(p("exp(-t)"), p("0"), p("0")));
        }
    }

    #[test]
    fn catalog_c_matches_stated_forms() {
        let cat = generators(&CaseId::c(Part::III, rat(1, 2)));
        let x4 = &cat.basis[3];
        assert_eq!(x4.xi, p("x"));
        assert_eq!(x4.tau, p("-1"));
        assert_eq!(x4.eta, p("2*u"));
        let x3 = &cat.basis[2];
        assert_eq!(x3.xi, p("exp(-3*t)*x"));
        assert_eq!(x3.tau, p("-exp(-3*t)"));
        assert_eq!(x3.eta, p("-exp(-3*t)*u"));
    }

    #[test]
    fn catalog_a_matches_stated_forms() {
        let cat = generators(&CaseId::ab(CaseFamily::A, Part::I));
        assert_eq!(cat.basis[3].xi, p("x^2*exp(t)"));
        assert_eq!(cat.basis[3].tau, p("0"));
        assert_eq!(cat.basis[3].eta, p("-3*x*u*exp(t)"));
        assert_eq!(cat.basis[4].eta, p("-3/2*u"));
    }

    /// Residual check for the concrete A and B cases: every cataloged
    /// generator is admitted by the matching equation, with Ω symbolic.
    #[test]
    fn generators_admitted_cases_a_b() {
        for family in [CaseFamily::A, CaseFamily::B] {
            for part in Part::ALL {
                let case = CaseId::ab(family, part);
                let (r, k) = case.rk().unwrap();
                let pde = make_pde(r, k, 1.0).unwrap();
                let cat = generators(&case);
                for (i, g) in cat.basis.iter().enumerate() {
                    let res = invariance_residual(g, pde.rhs()).unwrap();
                    assert!(
                        equivalent(&res, &Expr::zero()).holds(),
                        "X{} of {case}: residual {res}",
                        i + 1
                    );
                }
            }
        }
    }

    /// Residual check for family C with δ symbolic: one check per line part
    /// covers every δ at once (the concrete instances reachable from any
    /// rational (r, k) are substitutions of these identities).
    #[test]
    fn generators_admitted_case_c_symbolic_delta() {
        for part in Part::ALL {
            // k and r expressed through δ on each line.
            let (r, k) = match part {
                Part::I => (p("delta"), p("delta")),
                Part::II => (p("delta"), p("-delta")),
                Part::III => (p("delta - 1/2"), p("delta + 1/2")),
                Part::IV => (p("delta - 1/2"), p("-delta - 1/2")),
            };
            let lambda = {
                let two_k = p("2") * k.clone();
                let c_plus = (r.clone() + k.clone()) / two_k.clone();
                let c_minus = (r.clone() - k.clone()) / two_k;
                let e_plus = p("1") + r.clone() + k.clone();
                let e_minus = p("1") + r - k;
                c_plus * Expr::pow(Expr::u(), e_plus) - c_minus * Expr::pow(Expr::u(), e_minus)
            };
            let rhs = total_x(&p("x*u")).unwrap()
                + p("omega") * total_x(&total_x(&lambda).unwrap()).unwrap();
            let pde = EvolutionPde::new(rhs);
            let x3 = VectorField::new(
                p("exp(-2*(1+delta)*t)*x"),
                p("-exp(-2*(1+delta)*t)"),
                p("-exp(-2*(1+delta)*t)*u"),
            );
            let x4 = VectorField::new(p("x"), p("-1"), p("u/delta"));
            for (name, g) in [("X3", &x3), ("X4", &x4)] {
                let res = invariance_residual(g, &pde).unwrap();
                assert!(
                    equivalent(&res, &Expr::zero()).holds(),
                    "{name} of C({part}): residual {res}"
                );
            }
        }
    }

    /// Concrete spot checks that the cataloged C generators (built from a
    /// CaseId) are admitted, tying `generators` to the symbolic identity.
    #[test]
    fn generators_admitted_case_c_concrete() {
        for (part, delta) in [
            (Part::I, rat(1, 1)),
            (Part::II, rat(-1, 4)),
            (Part::III, rat(3, 2)),
            (Part::IV, rat(-5, 3)),
        ] {
            let case = CaseId::c(part, delta);
            let (r, k) = case.rk().unwrap();
            let pde = make_pde(r, k, 1.0).unwrap();
            for (i, g) in generators(&case).basis.iter().enumerate() {
                let res = invariance_residual(g, pde.rhs()).unwrap();
                assert!(
                    equivalent(&res, &Expr::zero()).holds(),
                    "X{} of {case}: residual {res}",
                    i + 1
                );
            }
        }
    }

    /// The two δ conventions in circulation for line (iii) disagree; the
    /// residual test adjudicates in favor of δ = k − 1/2.
    #[test]
    fn delta_convention_for_line_iii_adjudicated() {
        let k = rat(1, 1);
        let case = classify(&(k.clone() - Rat::one()), &k).unwrap();
        assert_eq!(case, CaseId::c(Part::III, rat(1, 2)));
        let pde = make_pde(k.clone() - Rat::one(), k, 1.0).unwrap();

        let table = generators(&case);
        let res = invariance_residual(&table.basis[3], pde.rhs()).unwrap();
        assert!(equivalent(&res, &Expr::zero()).holds());

        // The alternative convention δ = k would give X₄ = x∂x − ∂t + u∂u,
        // which the equation does not admit.
        let alt = generators(&CaseId::c(Part::III, rat(1, 1)));
        let res_alt = invariance_residual(&alt.basis[3], pde.rhs()).unwrap();
        assert!(!equivalent(&res_alt, &Expr::zero()).holds());
    }

    #[test]
    fn json_export_shape() {
        let cat = generators(&CaseId::c(Part::I, rat(1, 1)));
        let v = cat.to_json();
        assert_eq!(v["case"], "C(i)");
        assert_eq!(v["delta"], "1");
        assert_eq!(v["constraint"], "r = k");
        assert_eq!(v["r"], "1");
        assert_eq!(v["k"], "1");
        assert_eq!(v["generators"].as_array().unwrap().len(), 4);
        assert_eq!(v["generators"][1]["xi"], "exp(-t)");
        assert_eq!(
            v["excluded_k"].as_array().unwrap(),
            &["-1/2", "-2/3", "-1"]
        );
        let generic = generators(&CaseId::generic()).to_json();
        assert_eq!(generic["case"], "Generic");
        assert!(generic["delta"].is_null());
    }
}
