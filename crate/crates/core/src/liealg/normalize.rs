//! Normalization of algebra elements onto the optimal system of
//! one-dimensional subalgebras.
//!
//! Every element is driven to a catalogued representative by a deterministic,
//! case-specific sequence of adjoint maps and scalings (a one-dimensional
//! subalgebra is unchanged under scaling its generator, so scale factors of
//! either sign are legitimate moves). The move order per case is: make the
//! highest-index "anchor" coefficient one, remove the X2 component, then
//! remove or rescale the X3 component, preferring the move with the smaller
//! group parameter when two moves reach a representative. Elements whose
//! strata the catalog does not cover are reported as
//! [`NormalizeError::OutsideOptimalSystem`] together with the cleanest normal
//! form the documented moves reach; callers surface those as findings.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::family::{CaseFamily, CaseId};
use crate::symexpr::{rat, rat_to_f64};

use super::combo_f64;

/// Relative threshold below which a coefficient is treated as zero noise.
const REL_ZERO: f64 = 1e-9;
/// Group parameters and scale offsets smaller than this are identity moves
/// and are neither applied nor logged.
const MOVE_EPS: f64 = 1e-14;
/// Relative width of the branch deciding that the X3/X1 ratio equals one.
const RATIO_ONE_TOL: f64 = 1e-9;

/// An element of a case's symmetry algebra in basis coordinates: the k-th
/// entry is the coefficient of X(k+1).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub coeffs: Vec<f64>,
}

impl AlgebraElement {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }
}

/// A single normalization step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Move {
    /// Apply `Ad(exp(eps X_generator))`; `generator` is 1-based to match the
    /// basis naming.
    Adjoint { generator: usize, eps: f64 },
    /// Multiply the whole element by a nonzero factor.
    Scale { factor: f64 },
}

impl std::fmt::Display for Move {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Move::Adjoint { generator, eps } => write!(f, "Ad(exp({eps} X{generator}))"),
            Move::Scale { factor } => write!(f, "scale by {factor}"),
        }
    }
}

/// The catalogued representative families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepLabel {
    /// beta X2 + X4 + gamma X5 (five-generator case only).
    X2X4X5,
    /// alpha X1 + beta X2 + X4 (five-generator case only).
    X1X2X4,
    /// alpha X1 + X3 (alpha fixed to 1 in the five-generator case).
    X1X3,
    /// alpha X1 + X4 (four-generator cases only).
    X1X4,
    /// X1 alone.
    X1,
}

impl RepLabel {
    /// Template of the representative with named parameters.
    pub fn as_str(&self) -> &'static str {
        match self {
            RepLabel::X2X4X5 => "beta X2 + X4 + gamma X5",
            RepLabel::X1X2X4 => "alpha X1 + beta X2 + X4",
            RepLabel::X1X3 => "alpha X1 + X3",
            RepLabel::X1X4 => "alpha X1 + X4",
            RepLabel::X1 => "X1",
        }
    }

    /// Coefficient vector of the representative for the given parameter
    /// values, in a basis of dimension `dim`.
    pub fn template_coeffs(&self, params: &BTreeMap<String, f64>, dim: usize) -> Vec<f64> {
        let get = |k: &str| params.get(k).copied().unwrap_or(0.0);
        let mut out = vec![0.0; dim];
        match self {
            RepLabel::X2X4X5 => {
                out[1] = get("beta");
                out[3] = 1.0;
                out[4] = get("gamma");
            }
            RepLabel::X1X2X4 => {
                out[0] = get("alpha");
                out[1] = get("beta");
                out[3] = 1.0;
            }
            RepLabel::X1X3 => {
                out[0] = get("alpha");
                out[2] = 1.0;
            }
            RepLabel::X1X4 => {
                out[0] = get("alpha");
                out[3] = 1.0;
            }
            RepLabel::X1 => {
                out[0] = 1.0;
            }
        }
        out
    }
}

impl std::fmt::Display for RepLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of a successful normalization.
#[derive(Debug, Clone)]
pub struct Normalization {
    pub label: RepLabel,
    /// Surviving parameter values keyed by name (alpha, beta, gamma).
    pub params: BTreeMap<String, f64>,
    /// Moves applied, in order, to the (noise-stripped) input.
    pub moves: Vec<Move>,
    /// Coefficients of the reached representative.
    pub normal_form: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("cannot normalize the zero element")]
    ZeroElement,
    #[error("case {case} expects {expected} coefficients, got {got}")]
    DimensionMismatch {
        case: String,
        expected: usize,
        got: usize,
    },
    #[error("delta = -1 degenerates the case C adjoint action")]
    DegenerateDelta,
    #[error("case {0} has no catalogued optimal system")]
    NoOptimalSystem(String),
    /// The element's stratum is not covered by the catalogued
    /// representatives under the documented moves. Carries the cleanest
    /// reachable normal form and the moves that led there.
    #[error("element normalizes to {}, outside the catalogued representatives", combo_f64(normal_form))]
    OutsideOptimalSystem {
        normal_form: Vec<f64>,
        moves: Vec<Move>,
    },
}

/// Coefficient action of `Ad(exp(eps X_generator))` for the given case,
/// in closed form. Agrees with [`super::AdjointMatrix`] applied to `coeffs`.
pub fn adjoint_move(case: &CaseId, coeffs: &[f64], generator: usize, eps: f64) -> Vec<f64> {
    let family = case.family();
    let q = case_weight(case);
    apply_move(family, q, coeffs, generator, eps)
}

/// The exponential weight of the case: 2(1 + delta) for case C, unused
/// elsewhere.
fn case_weight(case: &CaseId) -> f64 {
    match case.delta_value() {
        Some(d) if case.family() == CaseFamily::C => 2.0 * (1.0 + rat_to_f64(&d)),
        _ => 0.0,
    }
}

fn apply_move(family: CaseFamily, q: f64, a: &[f64], generator: usize, eps: f64) -> Vec<f64> {
    let mut b = a.to_vec();
    match family {
        CaseFamily::A => {
            assert_eq!(a.len(), 5, "five coefficients expected");
            match generator {
                1 => {
                    b[1] *= eps.exp();
                    b[2] *= (2.0 * eps / 3.0).exp();
                    b[3] *= (-eps).exp();
                }
                2 => {
                    b[0] = a[0] - 2.0 * eps * a[3];
                    b[1] = a[1] - eps * a[0] + eps * eps * a[3];
                    b[4] = a[4] - 2.0 * eps * a[3];
                }
                3 => {
                    b[2] = a[2] + (2.0 * eps / 3.0) * (a[4] - a[0]);
                }
                4 => {
                    b[0] = a[0] + 2.0 * eps * a[1];
                    b[3] = a[3] + eps * a[0] + eps * eps * a[1];
                    b[4] = a[4] + 2.0 * eps * a[1];
                }
                5 => {
                    b[2] *= (-2.0 * eps / 3.0).exp();
                }
                g => panic!("generator index {g} out of range 1..=5"),
            }
        }
        CaseFamily::B => {
            assert_eq!(a.len(), 4, "four coefficients expected");
            match generator {
                1 => {
                    b[1] *= eps.exp();
                    b[2] = a[2] - eps * a[3];
                }
                2 => {
                    b[1] = a[1] - eps * a[0];
                }
                3 => {
                    b[2] = a[2] + eps * a[3];
                }
                4 => {
                    b[2] = (1.0 - (-eps).exp()) * a[0] + (-eps).exp() * a[2];
                }
                g => panic!("generator index {g} out of range 1..=4"),
            }
        }
        CaseFamily::C => {
            assert_eq!(a.len(), 4, "four coefficients expected");
            match generator {
                1 => {
                    b[1] *= eps.exp();
                    b[2] *= (q * eps).exp();
                }
                2 => {
                    b[1] = a[1] - eps * a[0];
                }
                3 => {
                    b[2] = a[2] + q * eps * (a[3] - a[0]);
                }
                4 => {
                    b[2] *= (-q * eps).exp();
                }
                g => panic!("generator index {g} out of range 1..=4"),
            }
        }
        CaseFamily::Generic => panic!("no adjoint move table for the generic case"),
    }
    b
}

fn tol_zero(a: &mut [f64]) {
    let max = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if max == 0.0 {
        return;
    }
    for x in a.iter_mut() {
        if x.abs() < REL_ZERO * max {
            *x = 0.0;
        }
    }
}

struct Engine {
    family: CaseFamily,
    q: f64,
    a: Vec<f64>,
    moves: Vec<Move>,
}

impl Engine {
    fn adjoint(&mut self, generator: usize, eps: f64) {
        if eps.abs() < MOVE_EPS {
            return;
        }
        self.a = apply_move(self.family, self.q, &self.a, generator, eps);
        self.moves.push(Move::Adjoint { generator, eps });
    }

    /// Adjoint move chosen to annihilate `slot`; the slot is set to exactly
    /// zero afterwards to keep later branches noise-free.
    fn adjoint_kill(&mut self, generator: usize, eps: f64, slot: usize) {
        self.adjoint(generator, eps);
        self.a[slot] = 0.0;
    }

    fn scale(&mut self, factor: f64) {
        if (factor - 1.0).abs() < MOVE_EPS {
            return;
        }
        for x in self.a.iter_mut() {
            *x *= factor;
        }
        self.moves.push(Move::Scale { factor });
    }

    /// Scales the whole element so the coefficient in `slot` becomes one.
    fn scale_to_unit(&mut self, slot: usize) {
        let factor = 1.0 / self.a[slot];
        self.scale(factor);
        self.a[slot] = 1.0;
    }

    fn finish(self, label: RepLabel, params: &[(&str, f64)]) -> Normalization {
        Normalization {
            label,
            params: params
                .iter()
                .map(|(k, v)| ((*k).to_string(), *v))
                .collect(),
            moves: self.moves,
            normal_form: self.a,
        }
    }

    fn outside(self) -> NormalizeError {
        NormalizeError::OutsideOptimalSystem {
            normal_form: self.a,
            moves: self.moves,
        }
    }
}

/// Drives `elem` to a representative of the optimal system of the case.
///
/// Returns the representative label, its surviving parameters, the moves
/// used, and the reached coefficient vector. Representatives themselves are
/// fixed points with an empty move log.
pub fn normalize_element(
    elem: &AlgebraElement,
    case: &CaseId,
) -> Result<Normalization, NormalizeError> {
    let family = case.family();
    let expected = match family {
        CaseFamily::Generic => return Err(NormalizeError::NoOptimalSystem(case.label())),
        CaseFamily::A => 5,
        CaseFamily::B | CaseFamily::C => 4,
    };
    if elem.coeffs.len() != expected {
        return Err(NormalizeError::DimensionMismatch {
            case: case.label(),
            expected,
            got: elem.coeffs.len(),
        });
    }
    if family == CaseFamily::C && case.delta_value() == Some(rat(-1, 1)) {
        return Err(NormalizeError::DegenerateDelta);
    }
    let mut a = elem.coeffs.clone();
    tol_zero(&mut a);
    if a.iter().all(|x| *x == 0.0) {
        return Err(NormalizeError::ZeroElement);
    }
    let engine = Engine {
        family,
        q: case_weight(case),
        a,
        moves: Vec::new(),
    };
    match family {
        CaseFamily::A => normalize_a(engine),
        CaseFamily::B => normalize_b(engine),
        CaseFamily::C => normalize_c(engine),
        CaseFamily::Generic => unreachable!(),
    }
}

fn normalize_a(mut e: Engine) -> Result<Normalization, NormalizeError> {
    // An exact alpha X1 + beta X2 + X4 form with positive discriminant is
    // already a representative; the general path below would walk it through
    // two mutually inverse moves, so return it directly.
    if e.a[0] != 0.0
        && e.a[2] == 0.0
        && e.a[4] == 0.0
        && e.a[3] == 1.0
        && e.a[0] * e.a[0] - 4.0 * e.a[1] > 0.0
    {
        let (alpha, beta) = (e.a[0], e.a[1]);
        return Ok(e.finish(RepLabel::X1X2X4, &[("alpha", alpha), ("beta", beta)]));
    }
    if e.a[3] != 0.0 {
        e.scale_to_unit(3);
        // Remove X1; this shears X2 and X5, and a4 - a1 stays invariant.
        e.adjoint_kill(2, e.a[0] / 2.0, 0);
        let gamma = e.a[4];
        if e.a[2] != 0.0 {
            if gamma == 0.0 {
                // The X3 move shifts a3 by a multiple of a5 - a1 = gamma,
                // so X3 cannot be removed on this stratum.
                return Err(e.outside());
            }
            e.adjoint_kill(3, -1.5 * e.a[2] / gamma, 2);
        }
        let beta = e.a[1];
        if beta < 0.0 {
            // A negative X2 coefficient trades the X5 component for an X1
            // one; the discriminant alpha^2 - 4 beta of the target comes out
            // as -4 beta > 0.
            e.adjoint(2, gamma / 2.0);
            e.a[4] = 0.0;
            let (alpha, beta) = (e.a[0], e.a[1]);
            return Ok(e.finish(RepLabel::X1X2X4, &[("alpha", alpha), ("beta", beta)]));
        }
        return Ok(e.finish(RepLabel::X2X4X5, &[("beta", beta), ("gamma", gamma)]));
    }
    if e.a[0] != 0.0 {
        e.adjoint_kill(2, e.a[1] / e.a[0], 1);
        if e.a[4] != 0.0 {
            // No move on this stratum changes the X5 coefficient.
            if e.a[2] != 0.0 && e.a[4] != e.a[0] {
                e.adjoint_kill(3, -1.5 * e.a[2] / (e.a[4] - e.a[0]), 2);
            }
            e.scale_to_unit(0);
            return Err(e.outside());
        }
        let c = e.a[2] / e.a[0];
        if c > 0.5 {
            // Closer to the X1 + X3 representative than to X1: shift the X3
            // coefficient onto the X1 one instead of killing it.
            e.adjoint(3, 1.5 * (c - 1.0));
            e.a[2] = e.a[0];
            e.scale_to_unit(0);
            return Ok(e.finish(RepLabel::X1X3, &[("alpha", 1.0)]));
        }
        e.adjoint_kill(3, 1.5 * c, 2);
        e.scale_to_unit(0);
        return Ok(e.finish(RepLabel::X1, &[]));
    }
    // Neither X1 nor X4 present: the span of {X2, X3, X5} lies outside the
    // catalog. Reach the cleanest form for the report.
    if e.a[1] != 0.0 {
        if e.a[4] != 0.0 && e.a[2] != 0.0 {
            e.adjoint_kill(3, -1.5 * e.a[2] / e.a[4], 2);
        }
        e.scale_to_unit(1);
    } else if e.a[4] != 0.0 {
        if e.a[2] != 0.0 {
            e.adjoint_kill(3, -1.5 * e.a[2] / e.a[4], 2);
        }
        e.scale_to_unit(4);
    } else {
        e.scale_to_unit(2);
    }
    Err(e.outside())
}

fn normalize_b(mut e: Engine) -> Result<Normalization, NormalizeError> {
    if e.a[3] != 0.0 {
        e.scale_to_unit(3);
        if e.a[2] != 0.0 {
            // Ad(exp(eps X3)) X4 = X4 + eps X3, so eps = -a3 removes X3.
            e.adjoint_kill(3, -e.a[2], 2);
        }
        if e.a[1] != 0.0 {
            if e.a[0] == 0.0 {
                // X2 is only movable against an X1 component.
                return Err(e.outside());
            }
            e.adjoint_kill(2, e.a[1] / e.a[0], 1);
        }
        let alpha = e.a[0];
        return Ok(e.finish(RepLabel::X1X4, &[("alpha", alpha)]));
    }
    if e.a[0] != 0.0 {
        if e.a[1] != 0.0 {
            e.adjoint_kill(2, e.a[1] / e.a[0], 1);
        }
        let rho = e.a[2] / e.a[0];
        if (rho - 1.0).abs() <= RATIO_ONE_TOL {
            e.a[2] = e.a[0];
            e.scale_to_unit(0);
            return Ok(e.finish(RepLabel::X1X3, &[("alpha", 1.0)]));
        }
        if rho > 1.0 {
            e.scale_to_unit(2);
            let alpha = e.a[0];
            return Ok(e.finish(RepLabel::X1X3, &[("alpha", alpha)]));
        }
        if e.a[2] != 0.0 {
            // Ad(exp(s X4)) sends a3 to (1 - e^-s) a1 + e^-s a3, which
            // vanishes at e^-s = 1/(1 - rho); solvable exactly when rho < 1.
            e.adjoint_kill(4, (1.0 - rho).ln(), 2);
        }
        e.scale_to_unit(0);
        return Ok(e.finish(RepLabel::X1, &[]));
    }
    if e.a[1] == 0.0 {
        e.scale_to_unit(2);
        return Ok(e.finish(RepLabel::X1X3, &[("alpha", 0.0)]));
    }
    // X2 (+- X3) classes are not catalogued; normalize the X3 magnitude for
    // the report.
    e.scale_to_unit(1);
    if e.a[2] != 0.0 {
        let sign = e.a[2].signum();
        e.adjoint(4, e.a[2].abs().ln());
        e.a[2] = sign;
    }
    Err(e.outside())
}

fn normalize_c(mut e: Engine) -> Result<Normalization, NormalizeError> {
    let q = e.q;
    if e.a[3] != 0.0 {
        e.scale_to_unit(3);
        if e.a[2] != 0.0 {
            let d = 1.0 - e.a[0];
            if d == 0.0 {
                // The X3 move shifts a3 by q eps (a4 - a1), which vanishes
                // here, and no other move reaches X3 on this stratum.
                return Err(e.outside());
            }
            e.adjoint_kill(3, -e.a[2] / (q * d), 2);
        }
        if e.a[1] != 0.0 {
            if e.a[0] == 0.0 {
                return Err(e.outside());
            }
            e.adjoint_kill(2, e.a[1] / e.a[0], 1);
        }
        let alpha = e.a[0];
        return Ok(e.finish(RepLabel::X1X4, &[("alpha", alpha)]));
    }
    if e.a[0] != 0.0 {
        if e.a[1] != 0.0 {
            e.adjoint_kill(2, e.a[1] / e.a[0], 1);
        }
        let c = e.a[2] / e.a[0];
        if c == 0.0 {
            e.scale_to_unit(0);
            return Ok(e.finish(RepLabel::X1, &[]));
        }
        if c > 0.0 && c.ln().abs() < c.abs() {
            // Rescaling X3 onto X1 (group parameter ln(c)/q) is the shorter
            // move; killing X3 would need eps = c/q.
            e.adjoint(4, c.ln() / q);
            e.a[2] = e.a[0];
            e.scale_to_unit(0);
            return Ok(e.finish(RepLabel::X1X3, &[("alpha", 1.0)]));
        }
        e.adjoint_kill(3, c / q, 2);
        e.scale_to_unit(0);
        return Ok(e.finish(RepLabel::X1, &[]));
    }
    if e.a[1] == 0.0 {
        e.scale_to_unit(2);
        return Ok(e.finish(RepLabel::X1X3, &[("alpha", 0.0)]));
    }
    e.scale_to_unit(1);
    if e.a[2] != 0.0 {
        let sign = e.a[2].signum();
        e.adjoint(4, e.a[2].abs().ln() / q);
        e.a[2] = sign;
    }
    Err(e.outside())
}

#[cfg(test)]
mod tests {
    use super::super::{AdjointMatrix, StructureConstants};
    use super::*;
    use crate::family::Part;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn case_a() -> CaseId {
        CaseId::ab(CaseFamily::A, Part::I)
    }

    fn case_b() -> CaseId {
        CaseId::ab(CaseFamily::B, Part::II)
    }

    fn case_c1() -> CaseId {
        CaseId::c_delta(rat(1, 1))
    }

    fn norm(coeffs: &[f64], case: &CaseId) -> Result<Normalization, NormalizeError> {
        normalize_element(&AlgebraElement::new(coeffs.to_vec()), case)
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64, tag: &str) {
        assert_eq!(a.len(), b.len(), "{tag}: length");
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).abs() <= tol, "{tag}: slot {i}: {x} vs {y}");
        }
    }

    #[test]
    fn rejects_zero_dimension_and_degenerate_delta() {
        match norm(&[0.0; 5], &case_a()) {
            Err(NormalizeError::ZeroElement) => {}
            other => panic!("expected ZeroElement, got {other:?}"),
        }
        match norm(&[1e-12, 0.0, 1.0e-13, 0.0, 0.0], &case_a()) {
            Err(NormalizeError::ZeroElement) => {
                panic!("relative noise threshold must not zero a pure small element")
            }
            Ok(n) => assert_eq!(n.label, RepLabel::X1),
            other => panic!("unexpected {other:?}"),
        }
        match norm(&[1.0, 0.0, 0.0], &case_a()) {
            Err(NormalizeError::DimensionMismatch { expected: 5, got: 3, .. }) => {}
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
        match norm(&[1.0, 0.0, 0.0, 0.0], &CaseId::c_delta(rat(-1, 1))) {
            Err(NormalizeError::DegenerateDelta) => {}
            other => panic!("expected DegenerateDelta, got {other:?}"),
        }
        match norm(&[1.0, 1.0], &CaseId::generic()) {
            Err(NormalizeError::NoOptimalSystem(_)) => {}
            other => panic!("expected NoOptimalSystem, got {other:?}"),
        }
    }

    #[test]
    fn representatives_are_fixed_points_with_empty_logs() {
        let a = case_a();
        let cases: Vec<(CaseId, Vec<f64>, RepLabel, Vec<(&str, f64)>)> = vec![
            (a.clone(), vec![0.0, 1.0, 0.0, 1.0, -1.0], RepLabel::X2X4X5,
             vec![("beta", 1.0), ("gamma", -1.0)]),
            (a.clone(), vec![0.0, 2.5, 0.0, 1.0, 2.0], RepLabel::X2X4X5,
             vec![("beta", 2.5), ("gamma", 2.0)]),
            (a.clone(), vec![0.0, 0.0, 0.0, 1.0, 2.0], RepLabel::X2X4X5,
             vec![("beta", 0.0), ("gamma", 2.0)]),
            (a.clone(), vec![2.0, 0.5, 0.0, 1.0, 0.0], RepLabel::X1X2X4,
             vec![("alpha", 2.0), ("beta", 0.5)]),
            (a.clone(), vec![1.0, -1.0, 0.0, 1.0, 0.0], RepLabel::X1X2X4,
             vec![("alpha", 1.0), ("beta", -1.0)]),
            (a.clone(), vec![-1.0, 0.2, 0.0, 1.0, 0.0], RepLabel::X1X2X4,
             vec![("alpha", -1.0), ("beta", 0.2)]),
            (a.clone(), vec![1.0, 0.0, 1.0, 0.0, 0.0], RepLabel::X1X3,
             vec![("alpha", 1.0)]),
            (a.clone(), vec![1.0, 0.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![]),
            (case_b(), vec![-1.0, 0.0, 0.0, 1.0], RepLabel::X1X4, vec![("alpha", -1.0)]),
            (case_b(), vec![0.0, 0.0, 0.0, 1.0], RepLabel::X1X4, vec![("alpha", 0.0)]),
            (case_b(), vec![1.0, 0.0, 0.0, 1.0], RepLabel::X1X4, vec![("alpha", 1.0)]),
            (case_b(), vec![0.5, 0.0, 1.0, 0.0], RepLabel::X1X3, vec![("alpha", 0.5)]),
            (case_b(), vec![1.0, 0.0, 1.0, 0.0], RepLabel::X1X3, vec![("alpha", 1.0)]),
            (case_b(), vec![0.0, 0.0, 1.0, 0.0], RepLabel::X1X3, vec![("alpha", 0.0)]),
            (case_b(), vec![1.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![]),
            (case_c1(), vec![-2.0, 0.0, 0.0, 1.0], RepLabel::X1X4, vec![("alpha", -2.0)]),
            (case_c1(), vec![1.0, 0.0, 0.0, 1.0], RepLabel::X1X4, vec![("alpha", 1.0)]),
            (case_c1(), vec![1.0, 0.0, 1.0, 0.0], RepLabel::X1X3, vec![("alpha", 1.0)]),
            (case_c1(), vec![0.0, 0.0, 1.0, 0.0], RepLabel::X1X3, vec![("alpha", 0.0)]),
            (case_c1(), vec![1.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![]),
        ];
        for (case, coeffs, label, params) in cases {
            let n = norm(&coeffs, &case).unwrap_or_else(|e| {
                panic!("{}: {coeffs:?}: {e}", case.label())
            });
            assert_eq!(n.label, label, "{}: {coeffs:?}", case.label());
            assert!(n.moves.is_empty(), "{}: {coeffs:?}: moves {:?}", case.label(), n.moves);
            assert_close(&n.normal_form, &coeffs, 0.0, "fixed point");
            for (k, v) in params {
                assert_eq!(n.params[k], v, "{}: param {k}", case.label());
            }
            assert_close(
                &n.label.template_coeffs(&n.params, coeffs.len()),
                &n.normal_form,
                0.0,
                "template",
            );
        }
    }

    /// An X3 component next to X4 is removed by Ad(exp(eps X3)) X4 = X4 + eps X3
    /// with eps equal to minus the X3 coefficient.
    #[test]
    fn four_generator_kill_uses_the_documented_move() {
        for alpha in [0.3, 0.0] {
            let n = norm(&[alpha, 0.0, 0.7, 1.0], &case_b()).unwrap();
            assert_eq!(n.label, RepLabel::X1X4);
            assert_eq!(n.params["alpha"], alpha);
            assert_eq!(n.moves.len(), 1);
            match n.moves[0] {
                Move::Adjoint { generator: 3, eps } => assert!((eps + 0.7).abs() < 1e-15),
                other => panic!("unexpected move {other:?}"),
            }
            assert_close(&n.normal_form, &[alpha, 0.0, 0.0, 1.0], 0.0, "normal form");
        }
    }

    /// X1 + 5 X3 at delta = 1 rescales the X3 coefficient onto X1 through
    /// Ad(exp(eps X4)) with e^{-2(1+delta) eps} = 1/5, i.e. eps = ln(5)/4.
    #[test]
    fn scaling_onto_x1_plus_x3_uses_ln5_over_4() {
        let n = norm(&[1.0, 0.0, 5.0, 0.0], &case_c1()).unwrap();
        assert_eq!(n.label, RepLabel::X1X3);
        assert_eq!(n.params["alpha"], 1.0);
        assert_eq!(n.moves.len(), 1);
        match n.moves[0] {
            Move::Adjoint { generator: 4, eps } => {
                assert!((eps - 5.0f64.ln() / 4.0).abs() < 1e-15)
            }
            other => panic!("unexpected move {other:?}"),
        }
        assert_close(&n.normal_form, &[1.0, 0.0, 1.0, 0.0], 0.0, "normal form");
    }

    #[test]
    fn five_generator_paths_reach_their_representatives() {
        let a = case_a();
        // Full pipeline: anchor rescale, X1 removal, X3 removal.
        let n = norm(&[2.0, 3.0, 0.0, 1.0, 5.0], &a).unwrap();
        assert_eq!(n.label, RepLabel::X2X4X5);
        assert_eq!(n.params["beta"], 2.0);
        assert_eq!(n.params["gamma"], 3.0);
        assert_eq!(n.moves.len(), 1);

        // Negative X2 coefficient lands in the alpha X1 + beta X2 + X4 family
        // with positive discriminant.
        let n = norm(&[0.0, -1.0, 0.0, 1.0, 2.0], &a).unwrap();
        assert_eq!(n.label, RepLabel::X1X2X4);
        assert_eq!(n.params["alpha"], -2.0);
        assert_eq!(n.params["beta"], 0.0);
        let disc = n.params["alpha"].powi(2) - 4.0 * n.params["beta"];
        assert!(disc > 0.0);

        // X3 with a vanishing a5 - a1 invariant cannot be removed.
        match norm(&[1.0, 1.0, 1.0, 1.0, 1.0], &a) {
            Err(NormalizeError::OutsideOptimalSystem { normal_form, .. }) => {
                assert_close(&normal_form, &[0.0, 0.75, 1.0, 1.0, 0.0], 1e-15, "outside");
            }
            other => panic!("expected outside, got {other:?}"),
        }

        // X1 + c X3 splits at c = 1/2 between the X1 + X3 and X1 targets.
        let n = norm(&[1.0, 0.0, 0.8, 0.0, 0.0], &a).unwrap();
        assert_eq!(n.label, RepLabel::X1X3);
        assert_eq!(n.moves.len(), 1);
        match n.moves[0] {
            Move::Adjoint { generator: 3, eps } => assert!((eps + 0.3).abs() < 1e-15),
            other => panic!("unexpected move {other:?}"),
        }
        let n = norm(&[1.0, 0.0, 0.4, 0.0, 0.0], &a).unwrap();
        assert_eq!(n.label, RepLabel::X1);
        match n.moves[0] {
            Move::Adjoint { generator: 3, eps } => assert!((eps - 0.6).abs() < 1e-15),
            other => panic!("unexpected move {other:?}"),
        }

        // Strata the catalog does not reach.
        for coeffs in [
            [1.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 1.0, 0.0, 1.0],
        ] {
            match norm(&coeffs, &a) {
                Err(NormalizeError::OutsideOptimalSystem { .. }) => {}
                other => panic!("{coeffs:?}: expected outside, got {other:?}"),
            }
        }
    }

    #[test]
    fn four_generator_ratio_branches() {
        let b = case_b();
        // a3/a1 < 1: the X3 component is removable and the element collapses
        // to X1.
        let n = norm(&[2.0, 0.0, 1.0, 0.0], &b).unwrap();
        assert_eq!(n.label, RepLabel::X1);
        assert_eq!(n.moves.len(), 2);
        match n.moves[0] {
            Move::Adjoint { generator: 4, eps } => assert!((eps - 0.5f64.ln()).abs() < 1e-15),
            other => panic!("unexpected move {other:?}"),
        }
        let n = norm(&[-1.0, 0.0, 1.0, 0.0], &b).unwrap();
        assert_eq!(n.label, RepLabel::X1);

        // a3/a1 > 1 rescales to alpha X1 + X3 with alpha in (0, 1).
        let n = norm(&[3.0, 0.0, 6.0, 0.0], &b).unwrap();
        assert_eq!(n.label, RepLabel::X1X3);
        assert!((n.params["alpha"] - 0.5).abs() < 1e-15);

        // X2 classes and X4 + beta X2 have no catalogued representative.
        for coeffs in [
            [0.0, 1.0, 1.0, 0.0],
            [0.0, 2.0, -6.0, 0.0],
            [0.0, 2.0, 0.0, 1.0],
        ] {
            match norm(&coeffs, &b) {
                Err(NormalizeError::OutsideOptimalSystem { .. }) => {}
                other => panic!("{coeffs:?}: expected outside, got {other:?}"),
            }
        }
        match norm(&[0.0, 2.0, -6.0, 0.0], &b) {
            Err(NormalizeError::OutsideOptimalSystem { normal_form, .. }) => {
                assert_close(&normal_form, &[0.0, 1.0, -1.0, 0.0], 1e-15, "X2 - X3 class");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn case_c_branches_prefer_the_smaller_move() {
        let c = case_c1();
        // Small X3/X1 ratio: killing (eps = c/q) is shorter than rescaling
        // (eps = ln(c)/q).
        let n = norm(&[1.0, 0.0, 0.3, 0.0], &c).unwrap();
        assert_eq!(n.label, RepLabel::X1);
        match n.moves[0] {
            Move::Adjoint { generator: 3, eps } => assert!((eps - 0.075).abs() < 1e-15),
            other => panic!("unexpected move {other:?}"),
        }
        // Negative ratios can only be killed.
        let n = norm(&[1.0, 0.0, -5.0, 0.0], &c).unwrap();
        assert_eq!(n.label, RepLabel::X1);

        // X3 next to X4 with a4 = a1 is stuck.
        match norm(&[1.0, 0.0, 2.0, 1.0], &c) {
            Err(NormalizeError::OutsideOptimalSystem { normal_form, .. }) => {
                assert_close(&normal_form, &[1.0, 0.0, 2.0, 1.0], 0.0, "stuck");
            }
            other => panic!("unexpected {other:?}"),
        }
        // a4 != a1 removes X3 with eps = -a3/(q (a4 - a1)).
        let n = norm(&[2.0, 0.0, 1.0, 1.0], &c).unwrap();
        assert_eq!(n.label, RepLabel::X1X4);
        assert_eq!(n.params["alpha"], 2.0);
        match n.moves[0] {
            Move::Adjoint { generator: 3, eps } => assert!((eps - 0.25).abs() < 1e-15),
            other => panic!("unexpected move {other:?}"),
        }

        // X2 classes stay outside.
        match norm(&[0.0, 1.0, 2.0, 0.0], &c) {
            Err(NormalizeError::OutsideOptimalSystem { normal_form, .. }) => {
                assert_close(&normal_form, &[0.0, 1.0, 1.0, 0.0], 1e-15, "X2 class");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn closed_form_moves_match_the_adjoint_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        for case in [case_a(), case_b(), CaseId::c_delta(rat(3, 2))] {
            let sc = StructureConstants::for_case(&case).unwrap();
            let n = sc.n();
            for generator in 1..=n {
                for _ in 0..10 {
                    let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
                    let eps: f64 = rng.random_range(-1.0..=1.0);
                    let closed = adjoint_move(&case, &coeffs, generator, eps);
                    let matrix = AdjointMatrix::new(&sc, generator, eps).apply(&coeffs);
                    assert_close(&closed, &matrix, 1e-12, &format!("{} X{generator}", case.label()));
                }
            }
        }
    }

    /// Replaying the logged moves against the input must land on the reported
    /// normal form, and the normal form must match the label's template.
    #[test]
    fn move_logs_replay_to_the_normal_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        for case in [case_a(), case_b(), case_c1(), CaseId::c_delta(rat(-1, 4))] {
            let dim = if case.family() == CaseFamily::A { 5 } else { 4 };
            for _ in 0..300 {
                let coeffs: Vec<f64> = (0..dim)
                    .map(|_| {
                        if rng.random_range(0..3) == 0 {
                            0.0
                        } else {
                            rng.random_range(-3.0..=3.0)
                        }
                    })
                    .collect();
                if coeffs.iter().all(|x| *x == 0.0) {
                    continue;
                }
                let scale_ref = coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let (normal_form, moves, template) =
                    match norm(&coeffs, &case) {
                        Ok(n) => {
                            let t = n.label.template_coeffs(&n.params, dim);
                            (n.normal_form, n.moves, Some(t))
                        }
                        Err(NormalizeError::OutsideOptimalSystem { normal_form, moves }) => {
                            (normal_form, moves, None)
                        }
                        Err(e) => panic!("{}: {coeffs:?}: {e}", case.label()),
                    };
                if let Some(t) = template {
                    assert_close(&t, &normal_form, 1e-9 * scale_ref.max(1.0), "template");
                }
                let mut replay = coeffs.clone();
                for mv in &moves {
                    replay = match *mv {
                        Move::Adjoint { generator, eps } => {
                            adjoint_move(&case, &replay, generator, eps)
                        }
                        Move::Scale { factor } => replay.iter().map(|x| x * factor).collect(),
                    };
                }
                // Replay keeps the roundoff the kill steps strip, so compare
                // with a tolerance scaled to the input.
                let tol = 1e-7 * scale_ref.max(1.0);
                assert_close(&replay, &normal_form, tol, &format!("{}: replay", case.label()));
            }
        }
    }

    /// Small adjoint perturbations of a representative normalize back to the
    /// same label (full-scale version in the acceptance suite).
    #[test]
    fn labels_are_stable_under_small_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        let a = case_a();
        let reps: Vec<(CaseId, Vec<f64>, RepLabel, Vec<usize>)> = vec![
            (a.clone(), vec![0.0, 1.7, 0.0, 1.0, -0.8], RepLabel::X2X4X5, vec![1, 2, 3, 4, 5]),
            (a.clone(), vec![2.0, 0.3, 0.0, 1.0, 0.0], RepLabel::X1X2X4, vec![1, 2, 3, 4, 5]),
            (a.clone(), vec![1.0, 0.0, 1.0, 0.0, 0.0], RepLabel::X1X3, vec![1, 2, 3, 5]),
            (a.clone(), vec![1.0, 0.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![1, 2, 3, 5]),
            (case_b(), vec![-1.3, 0.0, 0.0, 1.0], RepLabel::X1X4, vec![1, 2, 3, 4]),
            (case_b(), vec![0.6, 0.0, 1.0, 0.0], RepLabel::X1X3, vec![1, 2, 3, 4]),
            (case_b(), vec![1.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![1, 2, 3, 4]),
            (case_c1(), vec![-2.0, 0.0, 0.0, 1.0], RepLabel::X1X4, vec![1, 2, 3, 4]),
            (case_c1(), vec![1.0, 0.0, 1.0, 0.0], RepLabel::X1X3, vec![1, 2, 3, 4]),
            (case_c1(), vec![1.0, 0.0, 0.0, 0.0], RepLabel::X1, vec![1, 2, 3, 4]),
        ];
        for (case, rep, label, movable) in reps {
            for _ in 0..40 {
                let mut coeffs = rep.clone();
                for _ in 0..rng.random_range(1..=2) {
                    let generator = movable[rng.random_range(0..movable.len())];
                    let eps: f64 = rng.random_range(-0.05..=0.05);
                    coeffs = adjoint_move(&case, &coeffs, generator, eps);
                }
                let factor: f64 = rng.random_range(0.5..=2.0);
                for x in coeffs.iter_mut() {
                    *x *= factor;
                }
                let n = norm(&coeffs, &case).unwrap_or_else(|e| {
                    panic!("{}: {coeffs:?}: {e}", case.label())
                });
                assert_eq!(n.label, label, "{}: {coeffs:?}", case.label());
            }
        }
    }
}
