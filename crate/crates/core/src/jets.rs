//! Jet-space machinery: total derivatives, second prolongation, invariance
//! residuals, and determining-equation extraction.
//!
//! A point symmetry generator X = ξ∂x + τ∂t + η∂u acts on the second-order
//! jet space (x, t, u, u_x, u_t, u_xx, u_xt, u_tt). Its prolongation
//! coefficients are assembled from total derivatives, the invariance
//! condition X⁽²⁾Δ = 0 is restricted to the solution manifold of
//! Δ = u_t − F by substituting differential consequences, and the result is
//! split into determining equations by collecting coefficients of jet
//! monomials.

use crate::symexpr::{Bindings, Expr, ExprKind, JetVar, Rat, UnknownAtom, UnknownFunc, Var};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Highest derivative order an unknown-function atom may carry.
const MAX_UNKNOWN_ORDER: u8 = 2;

/// Errors from jet-space operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetsError {
    #[error("total derivative needs a jet of order {needed}, above the cap {cap}")]
    OrderOverflow { needed: u8, cap: u8 },
    #[error("derivative of an unknown function would exceed total order {max}")]
    UnknownOrderOverflow { max: u8 },
    #[error("expression is not polynomial in jet monomials: {detail}")]
    NonPolynomial { detail: String },
}

/// Independent coordinate to differentiate along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    X,
    T,
}

impl Coord {
    fn var(self) -> Var {
        match self {
            Coord::X => Var::x(),
            Coord::T => Var::t(),
        }
    }

    fn bump(self, j: JetVar) -> (u8, u8) {
        match self {
            Coord::X => (j.nx + 1, j.nt),
            Coord::T => (j.nx, j.nt + 1),
        }
    }
}

/// A point-symmetry generator ξ∂x + τ∂t + η∂u with components in (x, t, u).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    pub xi: Expr,
    pub tau: Expr,
    pub eta: Expr,
}

impl VectorField {
    /// Build a generator, checking the point-symmetry invariant: components
    /// may involve x, t, u, and parameters, but no derivative coordinates.
    pub fn new(xi: Expr, tau: Expr, eta: Expr) -> Self {
        for (name, c) in [("xi", &xi), ("tau", &tau), ("eta", &eta)] {
            assert!(
                c.max_jet_order() == 0,
                "{name} component contains a derivative coordinate: {c}"
            );
        }
        VectorField { xi, tau, eta }
    }

    /// The generic ansatz with unknown components ξ(x,t,u), τ(x,t,u),
    /// η(x,t,u), used to generate determining equations.
    pub fn unknown_ansatz() -> Self {
        VectorField {
            xi: Expr::unknown(UnknownFunc::Xi, 0, 0, 0),
            tau: Expr::unknown(UnknownFunc::Tau, 0, 0, 0),
            eta: Expr::unknown(UnknownFunc::Eta, 0, 0, 0),
        }
    }

    pub fn zero() -> Self {
        VectorField {
            xi: Expr::zero(),
            tau: Expr::zero(),
            eta: Expr::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero() && self.tau.is_zero() && self.eta.is_zero()
    }

    /// Componentwise rational scaling.
    pub fn scaled(&self, c: &Rat) -> Self {
        let s = Expr::rational(c.clone());
        VectorField {
            xi: s.clone() * self.xi.clone(),
            tau: s.clone() * self.tau.clone(),
            eta: s * self.eta.clone(),
        }
    }

    /// Componentwise sum.
    pub fn plus(&self, other: &Self) -> Self {
        VectorField {
            xi: self.xi.clone() + other.xi.clone(),
            tau: self.tau.clone() + other.tau.clone(),
            eta: self.eta.clone() + other.eta.clone(),
        }
    }

    /// Substitute expressions for parameters in all three components.
    pub fn substitute(&self, bindings: &Bindings) -> Self {
        VectorField {
            xi: self.xi.substitute(bindings),
            tau: self.tau.substitute(bindings),
            eta: self.eta.substitute(bindings),
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.xi, self.tau, self.eta)
    }
}

/// An evolution equation u_t = F(x, t, u, u_x, u_xx).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionPde {
    rhs: Expr,
}

impl EvolutionPde {
    /// Wrap a right-hand side, checking it involves no t-derivatives and no
    /// jets beyond second order.
    pub fn new(rhs: Expr) -> Self {
        for v in rhs.free_vars() {
            if let Var::Jet(j) = v {
                assert!(
                    j.nt == 0 && j.order() <= 2,
                    "rhs contains unsupported jet coordinate in {rhs}"
                );
            }
        }
        EvolutionPde { rhs }
    }

    /// The right-hand side F.
    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }
}

/// Prolongation coefficients of a generator up to second order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProlongedCoeffs {
    pub eta1_x: Expr,
    pub eta1_t: Expr,
    pub eta2_xx: Expr,
    pub eta2_xt: Expr,
    pub eta2_tt: Expr,
}

/// Total derivative D_i on jet space:
/// D_i e = ∂e/∂i + Σ_J u_{J,i} ∂e/∂u_J over every jet variable present
/// (including u itself whenever unknown-function atoms occur, since those
/// depend on u).
pub fn total_derivative(e: &Expr, coord: Coord, max_order: u8) -> Result<Expr, JetsError> {
    let cap = max_order.min(JetVar::MAX_ORDER);
    let mut terms = vec![e.diff(&coord.var())];
    let mut jets: BTreeSet<JetVar> = e
        .free_vars()
        .into_iter()
        .filter_map(|v| match v {
            Var::Jet(j) => Some(j),
            Var::Sym(_) => None,
        })
        .collect();
    if e.has_unknown() {
        jets.insert(JetVar::base());
    }
    for j in jets {
        let partial = e.diff(&Var::Jet(j));
        if partial.is_zero() {
            continue;
        }
        let (nx, nt) = coord.bump(j);
        if nx + nt > cap {
            return Err(JetsError::OrderOverflow {
                needed: nx + nt,
                cap,
            });
        }
        terms.push(Expr::jet(nx, nt) * partial);
    }
    let out = Expr::sum(terms);
    check_unknown_order(&out)?;
    Ok(out)
}

/// D_x at the crate-wide jet order cap.
pub fn total_x(e: &Expr) -> Result<Expr, JetsError> {
    total_derivative(e, Coord::X, JetVar::MAX_ORDER)
}

/// D_t at the crate-wide jet order cap.
pub fn total_t(e: &Expr) -> Result<Expr, JetsError> {
    total_derivative(e, Coord::T, JetVar::MAX_ORDER)
}

fn check_unknown_order(e: &Expr) -> Result<(), JetsError> {
    match e.kind() {
        ExprKind::Unknown(a) if a.order() > MAX_UNKNOWN_ORDER => {
            Err(JetsError::UnknownOrderOverflow {
                max: MAX_UNKNOWN_ORDER,
            })
        }
        ExprKind::Unknown(_)
        | ExprKind::Rational(_)
        | ExprKind::Sym(_)
        | ExprKind::Jet(_) => Ok(()),
        ExprKind::Sum(es) | ExprKind::Product(es) => {
            es.iter().try_for_each(check_unknown_order)
        }
        ExprKind::Power(b, x) => {
            check_unknown_order(b)?;
            check_unknown_order(x)
        }
        ExprKind::Exp(a) | ExprKind::Ln(a) => check_unknown_order(a),
    }
}

/// Second prolongation coefficients of `vf`:
/// η_i⁽¹⁾ = D_i η − (D_i ξ)u_x − (D_i τ)u_t and
/// η_{i₁i₂}⁽²⁾ = D_{i₂} η_{i₁}⁽¹⁾ − (D_{i₂} ξ)u_{i₁x} − (D_{i₂} τ)u_{i₁t}.
pub fn prolong(vf: &VectorField) -> Result<ProlongedCoeffs, JetsError> {
    let u_x = Expr::jet(1, 0);
    let u_t = Expr::jet(0, 1);
    let u_xx = Expr::jet(2, 0);
    let u_xt = Expr::jet(1, 1);
    let u_tt = Expr::jet(0, 2);

    let first = |coord: Coord| -> Result<Expr, JetsError> {
        Ok(total_derivative(&vf.eta, coord, 3)?
            - total_derivative(&vf.xi, coord, 3)? * u_x.clone()
            - total_derivative(&vf.tau, coord, 3)? * u_t.clone())
    };
    let eta1_x = first(Coord::X)?;
    let eta1_t = first(Coord::T)?;

    let second = |eta1: &Expr, coord: Coord, u_i1x: &Expr, u_i1t: &Expr| -> Result<Expr, JetsError> {
        Ok(total_derivative(eta1, coord, 3)?
            - total_derivative(&vf.xi, coord, 3)? * u_i1x.clone()
            - total_derivative(&vf.tau, coord, 3)? * u_i1t.clone())
    };
    let eta2_xx = second(&eta1_x, Coord::X, &u_xx, &u_xt)?;
    let eta2_xt = second(&eta1_x, Coord::T, &u_xx, &u_xt)?;
    let eta2_tt = second(&eta1_t, Coord::T, &u_xt, &u_tt)?;

    Ok(ProlongedCoeffs {
        eta1_x,
        eta1_t,
        eta2_xx,
        eta2_xt,
        eta2_tt,
    })
}

/// The unrestricted action X⁽²⁾Δ for Δ = u_t − F:
/// η_t⁽¹⁾ − ξF_x − τF_t − ηF_u − η_x⁽¹⁾F_{u_x} − η_{xx}⁽²⁾F_{u_xx}.
pub fn lie_derivative(vf: &VectorField, pde: &EvolutionPde) -> Result<Expr, JetsError> {
    let p = prolong(vf)?;
    let f = pde.rhs();
    Ok(p.eta1_t
        - vf.xi.clone() * f.diff(&Var::x())
        - vf.tau.clone() * f.diff(&Var::t())
        - vf.eta.clone() * f.diff(&Var::u())
        - p.eta1_x * f.diff(&Var::jet(1, 0))
        - p.eta2_xx * f.diff(&Var::jet(2, 0)))
}

/// X⁽²⁾Δ restricted to the solution manifold: the differential consequences
/// u_tt, u_xt, u_t are substituted in that fixed order, leaving an
/// expression in (x, t, u, u_x, u_xx, u_xxx) that vanishes exactly when the
/// generator is admitted.
pub fn invariance_residual(vf: &VectorField, pde: &EvolutionPde) -> Result<Expr, JetsError> {
    let raw = lie_derivative(vf, pde)?;
    Ok(restrict_to_solutions(&raw, pde)?)
}

/// Substitute u_tt ↦ D_t F, u_xt ↦ D_x F, u_t ↦ F (with the t-derivatives of
/// F themselves restricted first).
pub fn restrict_to_solutions(e: &Expr, pde: &EvolutionPde) -> Result<Expr, JetsError> {
    let f = pde.rhs();
    let u_t = Var::jet(0, 1);
    let u_xt = Var::jet(1, 1);
    let u_tt = Var::jet(0, 2);

    let dxf = total_x(f)?;
    let mut out = e.clone();
    if out.contains_var(&u_tt) {
        let dtf = total_t(f)?.subst(&u_xt, &dxf).subst(&u_t, f);
        out = out.subst(&u_tt, &dtf);
    }
    out = out.subst(&u_xt, &dxf).subst(&u_t, f);
    Ok(out)
}

/// A product of jet variables of order ≥ 1 with positive integer exponents,
/// e.g. u_x²·u_xx. The empty monomial stands for the constant part.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct JetMonomial(pub Vec<(JetVar, u32)>);

impl fmt::Display for JetMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (j, n)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            let name = Expr::jet(j.nx, j.nt);
            if *n == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{n}")?;
            }
        }
        Ok(())
    }
}

/// Split an expression into coefficients of monomials in the derivative
/// coordinates (u itself stays inside the coefficients).
pub fn collect_jet_polynomial(e: &Expr) -> Result<BTreeMap<JetMonomial, Expr>, JetsError> {
    let mut acc: BTreeMap<JetMonomial, Vec<Expr>> = BTreeMap::new();
    let terms: Vec<Expr> = match e.kind() {
        ExprKind::Sum(ts) => ts.clone(),
        _ => vec![e.clone()],
    };
    for term in terms {
        let factors: Vec<Expr> = match term.kind() {
            ExprKind::Product(fs) => fs.clone(),
            _ => vec![term.clone()],
        };
        let mut mono: Vec<(JetVar, u32)> = Vec::new();
        let mut coeff: Vec<Expr> = Vec::new();
        for f in factors {
            match split_jet_factor(&f)? {
                Some((j, n)) => mono.push((j, n)),
                None => {
                    if derivative_jets_present(&f) {
                        return Err(JetsError::NonPolynomial {
                            detail: format!("factor {f} mixes derivatives non-polynomially"),
                        });
                    }
                    coeff.push(f);
                }
            }
        }
        mono.sort();
        acc.entry(JetMonomial(mono))
            .or_default()
            .push(Expr::product(coeff));
    }
    Ok(acc
        .into_iter()
        .map(|(m, cs)| (m, Expr::sum(cs)))
        .collect())
}

/// Recognize a pure power of a derivative coordinate.
fn split_jet_factor(f: &Expr) -> Result<Option<(JetVar, u32)>, JetsError> {
    use num_traits::ToPrimitive;
    match f.kind() {
        ExprKind::Jet(j) if j.order() >= 1 => Ok(Some((*j, 1))),
        ExprKind::Power(b, e) => {
            let ExprKind::Jet(j) = b.kind() else {
                return Ok(None);
            };
            if j.order() == 0 {
                return Ok(None);
            }
            let n = e
                .as_integer()
                .and_then(|n| n.to_u32())
                .filter(|n| *n >= 1)
                .ok_or_else(|| JetsError::NonPolynomial {
                    detail: format!("derivative power {f} has a non-positive-integer exponent"),
                })?;
            Ok(Some((*j, n)))
        }
        _ => Ok(None),
    }
}

fn derivative_jets_present(e: &Expr) -> bool {
    e.free_vars().into_iter().any(|v| match v {
        Var::Jet(j) => j.order() >= 1,
        Var::Sym(_) => false,
    })
}

/// Determining equations of the PDE for the given ansatz: the coefficient of
/// every jet monomial in the restricted invariance residual, ordered by
/// monomial.
pub fn determining_equations(
    pde: &EvolutionPde,
    ansatz: &VectorField,
) -> Result<Vec<Expr>, JetsError> {
    Ok(determining_by_monomial(pde, ansatz)?
        .into_values()
        .collect())
}

/// Like [`determining_equations`], keyed by the jet monomial each
/// coefficient belongs to.
pub fn determining_by_monomial(
    pde: &EvolutionPde,
    ansatz: &VectorField,
) -> Result<BTreeMap<JetMonomial, Expr>, JetsError> {
    let residual = invariance_residual(ansatz, pde)?;
    collect_jet_polynomial(&residual)
}

/// Replace every unknown-function atom by the matching partial derivative of
/// the concrete components of `vf`.
pub fn substitute_unknowns(e: &Expr, vf: &VectorField) -> Expr {
    match e.kind() {
        ExprKind::Unknown(a) => {
            let comp = match a.func {
                UnknownFunc::Xi => &vf.xi,
                UnknownFunc::Tau => &vf.tau,
                UnknownFunc::Eta => &vf.eta,
            };
            comp.diff_n(&Var::x(), a.dx)
                .diff_n(&Var::t(), a.dt)
                .diff_n(&Var::u(), a.du)
        }
        ExprKind::Rational(_) | ExprKind::Sym(_) | ExprKind::Jet(_) => e.clone(),
        ExprKind::Sum(ts) => Expr::sum(ts.iter().map(|t| substitute_unknowns(t, vf)).collect()),
        ExprKind::Product(fs) => {
            Expr::product(fs.iter().map(|f| substitute_unknowns(f, vf)).collect())
        }
        ExprKind::Power(b, x) => Expr::pow(substitute_unknowns(b, vf), substitute_unknowns(x, vf)),
        ExprKind::Exp(a) => Expr::exp(substitute_unknowns(a, vf)),
        ExprKind::Ln(a) => Expr::ln(substitute_unknowns(a, vf)),
    }
}

/// Zero out every unknown atom that dominates one in `zeros` componentwise
/// (a vanishing function has vanishing derivatives).
pub fn zero_unknowns(e: &Expr, zeros: &BTreeSet<UnknownAtom>) -> Expr {
    let dominated = |a: &UnknownAtom| {
        zeros
            .iter()
            .any(|z| a.func == z.func && a.dx >= z.dx && a.dt >= z.dt && a.du >= z.du)
    };
    match e.kind() {
        ExprKind::Unknown(a) if dominated(a) => Expr::zero(),
        ExprKind::Unknown(_) | ExprKind::Rational(_) | ExprKind::Sym(_) | ExprKind::Jet(_) => {
            e.clone()
        }
        ExprKind::Sum(ts) => Expr::sum(ts.iter().map(|t| zero_unknowns(t, zeros)).collect()),
        ExprKind::Product(fs) => {
            Expr::product(fs.iter().map(|f| zero_unknowns(f, zeros)).collect())
        }
        ExprKind::Power(b, x) => Expr::pow(zero_unknowns(b, zeros), zero_unknowns(x, zeros)),
        ExprKind::Exp(a) => Expr::exp(zero_unknowns(a, zeros)),
        ExprKind::Ln(a) => Expr::ln(zero_unknowns(a, zeros)),
    }
}

fn unknown_atoms(e: &Expr, out: &mut BTreeSet<UnknownAtom>) {
    match e.kind() {
        ExprKind::Unknown(a) => {
            out.insert(*a);
        }
        ExprKind::Rational(_) | ExprKind::Sym(_) | ExprKind::Jet(_) => {}
        ExprKind::Sum(es) | ExprKind::Product(es) => {
            for x in es {
                unknown_atoms(x, out);
            }
        }
        ExprKind::Power(b, x) => {
            unknown_atoms(b, out);
            unknown_atoms(x, out);
        }
        ExprKind::Exp(a) | ExprKind::Ln(a) => unknown_atoms(a, out),
    }
}

/// Deduce unknown atoms that the system forces to zero.
///
/// Determining equations are linear in the unknown functions, so an
/// equation whose surviving terms all contain the same single atom forces
/// that atom to vanish for generic parameter values. The deduction is
/// iterated to a fixed point, substituting known zeros (and their
/// derivatives) back into the system.
pub fn implied_zero_atoms(equations: &[Expr]) -> BTreeSet<UnknownAtom> {
    let mut zeros: BTreeSet<UnknownAtom> = BTreeSet::new();
    loop {
        let mut grew = false;
        for eq in equations {
            let reduced = zero_unknowns(eq, &zeros);
            if reduced.is_zero() {
                continue;
            }
            let mut atoms = BTreeSet::new();
            unknown_atoms(&reduced, &mut atoms);
            if atoms.len() == 1 {
                let a = *atoms.iter().next().unwrap();
                if zeros.insert(a) {
                    grew = true;
                }
            }
        }
        if !grew {
            return zeros;
        }
    }
}
