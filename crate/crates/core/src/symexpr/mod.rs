//! Exact-rational symbolic expression core.
//!
//! [`Expr`] is an immutable tree over rational constants, symbols, jet
//! variables, sums, products, powers, exponentials, logarithms, and
//! unknown-function atoms. Every constructor canonicalizes, so two
//! expressions that are equal under the supported rewrite rules compare
//! equal structurally. The canonical shape is "sum of products": products
//! are distributed over sums, like power bases are merged by adding
//! exponents, rational arithmetic is folded exactly, and factors are sorted
//! by a fixed total order (constants, then x, t, parameters alphabetically,
//! then u and higher jet variables by graded order, then unknown atoms,
//! then exp/ln/power/composite nodes).
//!
//! Exponent arithmetic is formal: rewrites like `u^a * u^b = u^(a+b)` are
//! applied on the assumption that the expression is used on a domain where
//! every subexpression is real-valued (the PDE's dependent variable is a
//! positive density, so fractional powers of `u` are always defined).
//! Rewrites that are unsound for negative bases, such as `(f*g)^e = f^e*g^e`
//! with fractional `e`, are only applied when the base is provably positive
//! or the exponent is an integer.

mod calc;
mod display;
mod eval;
mod equiv;
mod parse;

pub use eval::EvalError;
pub use equiv::{equivalent, Verdict};
pub use parse::{parse, ParseError};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Exact fraction `num/den` as a [`Rat`].
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Nearest `f64` to an exact rational.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Map from variables to replacement expressions, applied simultaneously.
pub type Bindings = BTreeMap<Var, Expr>;

/// Map from variables to numeric values for [`Expr::eval`].
pub type NumBindings = BTreeMap<Var, f64>;

/// A derivative coordinate of the dependent variable `u`.
///
/// `nx`/`nt` count differentiations in x and t; total order is capped at 3
/// (third order arises from differential consequences of a second-order
/// evolution equation, never from user input).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct JetVar {
    pub nx: u8,
    pub nt: u8,
}

impl JetVar {
    /// Maximum total derivative order representable in jet space.
    pub const MAX_ORDER: u8 = 3;

    pub fn new(nx: u8, nt: u8) -> Self {
        assert!(
            nx + nt <= Self::MAX_ORDER,
            "jet variable order {} exceeds {}",
            nx + nt,
            Self::MAX_ORDER
        );
        JetVar { nx, nt }
    }

    pub fn order(&self) -> u8 {
        self.nx + self.nt
    }

    /// The dependent variable itself, `u`.
    pub fn base() -> Self {
        JetVar { nx: 0, nt: 0 }
    }
}

impl PartialOrd for JetVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for JetVar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.order(), self.nt).cmp(&(other.order(), other.nt))
    }
}

/// Which unknown function of (x, t, u) an [`ExprKind::Unknown`] atom denotes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum UnknownFunc {
    Xi,
    Tau,
    Eta,
}

/// Partial derivative of an unknown generator component, e.g. `xi_xu`.
///
/// These atoms appear only while extracting determining equations: the
/// generator components are unknown functions of (x, t, u) whose derivatives
/// must be carried around symbolically.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct UnknownAtom {
    pub func: UnknownFunc,
    pub dx: u8,
    pub dt: u8,
    pub du: u8,
}

impl UnknownAtom {
    pub fn order(&self) -> u8 {
        self.dx + self.dt + self.du
    }
}

/// Interned symbol name. `x` and `t` are the coordinates; everything else is
/// a parameter ordered alphabetically after them.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Symbol(Arc<str>);

impl Symbol {
    fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    fn rank(&self) -> u8 {
        match &*self.0 {
            "x" => 0,
            "t" => 1,
            _ => 2,
        }
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// A substitutable variable: a named symbol or a jet coordinate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    Sym(Symbol),
    Jet(JetVar),
}

impl Var {
    pub fn sym(name: &str) -> Self {
        match jet_from_name(name) {
            Some(j) => Var::Jet(j),
            None => Var::Sym(Symbol::new(name)),
        }
    }

    pub fn jet(nx: u8, nt: u8) -> Self {
        Var::Jet(JetVar::new(nx, nt))
    }

    pub fn x() -> Self {
        Var::Sym(Symbol::new("x"))
    }

    pub fn t() -> Self {
        Var::Sym(Symbol::new("t"))
    }

    pub fn u() -> Self {
        Var::Jet(JetVar::base())
    }
}

/// Node kinds of the expression tree. Construct through the smart
/// constructors on [`Expr`]; direct construction would bypass
/// canonicalization.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ExprKind {
    Rational(Rat),
    Sym(Symbol),
    Jet(JetVar),
    Unknown(UnknownAtom),
    /// At least two terms, none of them a Sum or zero; at most one rational
    /// constant, stored first by the term order.
    Sum(Vec<Expr>),
    /// At least two factors, none a Product, Sum, or one; at most one
    /// rational coefficient, stored first by the factor order.
    Product(Vec<Expr>),
    /// Base and exponent; exponent is never 0 or 1, base never a Product,
    /// Exp, or collapsible Power.
    Power(Expr, Expr),
    Exp(Expr),
    Ln(Expr),
}

/// Immutable canonical symbolic expression.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<ExprKind>);

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn jet_from_name(name: &str) -> Option<JetVar> {
    let rest = match name {
        "u" => return Some(JetVar::base()),
        _ => name.strip_prefix("u_")?,
    };
    if rest.is_empty() || rest.len() > JetVar::MAX_ORDER as usize {
        return None;
    }
    let mut nx = 0u8;
    let mut nt = 0u8;
    for c in rest.chars() {
        match c {
            'x' => nx += 1,
            't' => nt += 1,
            _ => return None,
        }
    }
    // Only the sorted spelling (x's before t's) names a jet; anything else
    // is an ordinary symbol.
    let sorted: String = "x".repeat(nx as usize) + &"t".repeat(nt as usize);
    if sorted == rest {
        Some(JetVar { nx, nt })
    } else {
        None
    }
}

impl Expr {
    fn raw(kind: ExprKind) -> Self {
        Expr(Arc::new(kind))
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0
    }

    // ----- atoms ---------------------------------------------------------

    pub fn rational(r: Rat) -> Self {
        Expr::raw(ExprKind::Rational(r))
    }

    pub fn int(n: i64) -> Self {
        Expr::rational(Rat::from_integer(BigInt::from(n)))
    }

    /// Exact fraction `num/den`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Expr::rational(Rat::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Named symbol; jet spellings (`u`, `u_x`, ...) yield jet atoms.
    pub fn symbol(name: &str) -> Self {
        match jet_from_name(name) {
            Some(j) => Expr::raw(ExprKind::Jet(j)),
            None => Expr::raw(ExprKind::Sym(Symbol::new(name))),
        }
    }

    pub fn var(v: &Var) -> Self {
        match v {
            Var::Sym(s) => Expr::raw(ExprKind::Sym(s.clone())),
            Var::Jet(j) => Expr::raw(ExprKind::Jet(*j)),
        }
    }

    pub fn x() -> Self {
        Expr::symbol("x")
    }

    pub fn t() -> Self {
        Expr::symbol("t")
    }

    pub fn u() -> Self {
        Expr::jet(0, 0)
    }

    pub fn jet(nx: u8, nt: u8) -> Self {
        Expr::raw(ExprKind::Jet(JetVar::new(nx, nt)))
    }

    pub fn unknown(func: UnknownFunc, dx: u8, dt: u8, du: u8) -> Self {
        Expr::raw(ExprKind::Unknown(UnknownAtom { func, dx, dt, du }))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    // ----- predicates and accessors --------------------------------------

    pub fn is_zero(&self) -> bool {
        matches!(self.kind(), ExprKind::Rational(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.kind(), ExprKind::Rational(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self.kind() {
            ExprKind::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Integer value if the expression is a whole rational constant.
    pub fn as_integer(&self) -> Option<&BigInt> {
        match self.kind() {
            ExprKind::Rational(r) if r.is_integer() => Some(r.numer()),
            _ => None,
        }
    }

    /// Whether the expression is provably positive for all admissible
    /// variable values (with the `u > 0` density convention).
    pub fn known_positive(&self) -> bool {
        match self.kind() {
            ExprKind::Rational(r) => r.is_positive(),
            ExprKind::Jet(j) => *j == JetVar::base(),
            ExprKind::Sym(_) | ExprKind::Unknown(_) | ExprKind::Ln(_) => false,
            ExprKind::Exp(_) => true,
            ExprKind::Sum(ts) => ts.iter().all(Expr::known_positive),
            ExprKind::Product(fs) => fs.iter().all(Expr::known_positive),
            ExprKind::Power(b, _) => b.known_positive(),
        }
    }

    /// All free symbols and jet variables, in variable order.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self.kind() {
            ExprKind::Rational(_) => {}
            ExprKind::Sym(s) => {
                out.insert(Var::Sym(s.clone()));
            }
            ExprKind::Jet(j) => {
                out.insert(Var::Jet(*j));
            }
            ExprKind::Unknown(_) => {}
            ExprKind::Sum(es) | ExprKind::Product(es) => {
                for e in es {
                    e.collect_vars(out);
                }
            }
            ExprKind::Power(b, e) => {
                b.collect_vars(out);
                e.collect_vars(out);
            }
            ExprKind::Exp(a) | ExprKind::Ln(a) => a.collect_vars(out),
        }
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match (self.kind(), v) {
            (ExprKind::Sym(s), Var::Sym(w)) => s == w,
            (ExprKind::Jet(j), Var::Jet(w)) => j == w,
            (ExprKind::Rational(_), _)
            | (ExprKind::Unknown(_), _)
            | (ExprKind::Sym(_), _)
            | (ExprKind::Jet(_), _) => false,
            (ExprKind::Sum(es), _) | (ExprKind::Product(es), _) => {
                es.iter().any(|e| e.contains_var(v))
            }
            (ExprKind::Power(b, e), _) => b.contains_var(v) || e.contains_var(v),
            (ExprKind::Exp(a), _) | (ExprKind::Ln(a), _) => a.contains_var(v),
        }
    }

    /// Whether any unknown-function atom occurs in the tree.
    pub fn has_unknown(&self) -> bool {
        match self.kind() {
            ExprKind::Unknown(_) => true,
            ExprKind::Rational(_) | ExprKind::Sym(_) | ExprKind::Jet(_) => false,
            ExprKind::Sum(es) | ExprKind::Product(es) => es.iter().any(Expr::has_unknown),
            ExprKind::Power(b, e) => b.has_unknown() || e.has_unknown(),
            ExprKind::Exp(a) | ExprKind::Ln(a) => a.has_unknown(),
        }
    }

    /// Maximum jet order appearing in the tree (0 when no jets occur).
    pub fn max_jet_order(&self) -> u8 {
        match self.kind() {
            ExprKind::Jet(j) => j.order(),
            ExprKind::Rational(_) | ExprKind::Sym(_) | ExprKind::Unknown(_) => 0,
            ExprKind::Sum(es) | ExprKind::Product(es) => {
                es.iter().map(Expr::max_jet_order).max().unwrap_or(0)
            }
            ExprKind::Power(b, e) => b.max_jet_order().max(e.max_jet_order()),
            ExprKind::Exp(a) | ExprKind::Ln(a) => a.max_jet_order(),
        }
    }

    // ----- canonicalizing constructors ------------------------------------

    /// Canonical sum of the given terms.
    pub fn sum(terms: Vec<Expr>) -> Self {
        let mut flat = Vec::with_capacity(terms.len());
        for term in terms {
            match term.kind() {
                ExprKind::Sum(ts) => flat.extend(ts.iter().cloned()),
                _ => flat.push(term),
            }
        }
        // Group by monomial (the non-coefficient factor list) and add
        // coefficients exactly.
        let mut acc: BTreeMap<Vec<Expr>, Rat> = BTreeMap::new();
        for term in flat {
            if term.is_zero() {
                continue;
            }
            let (coeff, mono) = split_coeff(term);
            *acc.entry(mono).or_insert_with(Rat::zero) += coeff;
        }
        let mut out: Vec<Expr> = Vec::with_capacity(acc.len());
        for (mono, coeff) in acc {
            if coeff.is_zero() {
                continue;
            }
            if mono.is_empty() {
                out.push(Expr::rational(coeff));
            } else if coeff.is_one() {
                out.push(rebuild_product(mono));
            } else {
                let mut fs = Vec::with_capacity(mono.len() + 1);
                fs.push(Expr::rational(coeff));
                fs.extend(mono);
                out.push(rebuild_product(fs));
            }
        }
        out.sort();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::raw(ExprKind::Sum(out)),
        }
    }

    /// Canonical product of the given factors.
    pub fn product(factors: Vec<Expr>) -> Self {
        let mut flat = Vec::with_capacity(factors.len());
        for f in factors {
            match f.kind() {
                ExprKind::Product(fs) => flat.extend(fs.iter().cloned()),
                _ => flat.push(f),
            }
        }
        if flat.iter().any(Expr::is_zero) {
            return Expr::zero();
        }
        // Distribute over any sum factor, producing a canonical sum of
        // sum-free products.
        if let Some(pos) = flat
            .iter()
            .position(|f| matches!(f.kind(), ExprKind::Sum(_)))
        {
            let sum_factor = flat.remove(pos);
            let ExprKind::Sum(terms) = sum_factor.kind() else {
                unreachable!()
            };
            let expanded = terms
                .iter()
                .map(|term| {
                    let mut fs = flat.clone();
                    fs.push(term.clone());
                    Expr::product(fs)
                })
                .collect();
            return Expr::sum(expanded);
        }
        // Merge: rational coefficient, like power bases, exp arguments.
        let mut coeff = Rat::one();
        let mut powers: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
        let mut exp_args: Vec<Expr> = Vec::new();
        for f in flat {
            match f.kind() {
                ExprKind::Rational(r) => coeff *= r,
                ExprKind::Exp(a) => exp_args.push(a.clone()),
                ExprKind::Power(b, e) => powers.entry(b.clone()).or_default().push(e.clone()),
                _ => powers.entry(f.clone()).or_default().push(Expr::one()),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut rebuilt: Vec<Expr> = Vec::with_capacity(powers.len() + 1);
        let mut needs_repass = false;
        for (base, exps) in powers {
            let e = Expr::sum(exps);
            let f = Expr::pow(base, e);
            match f.kind() {
                ExprKind::Rational(r) if r.is_one() => {}
                ExprKind::Rational(_) | ExprKind::Sum(_) | ExprKind::Product(_) => {
                    needs_repass = true;
                    rebuilt.push(f);
                }
                ExprKind::Exp(_) => {
                    needs_repass = true;
                    rebuilt.push(f);
                }
                _ => rebuilt.push(f),
            }
        }
        if !exp_args.is_empty() {
            let arg = Expr::sum(exp_args);
            let f = Expr::exp(arg);
            match f.kind() {
                ExprKind::Rational(r) if r.is_one() => {}
                ExprKind::Rational(_) | ExprKind::Sum(_) | ExprKind::Product(_) => {
                    needs_repass = true;
                    rebuilt.push(f);
                }
                _ => rebuilt.push(f),
            }
        }
        if needs_repass {
            // Exponent merging produced non-factor shapes (folded rationals,
            // expanded sums, redistributed products); run the product
            // algorithm once more over the rebuilt list.
            if !coeff.is_one() {
                rebuilt.push(Expr::rational(coeff));
            }
            return Expr::product(rebuilt);
        }
        rebuilt.sort();
        if rebuilt.is_empty() {
            return Expr::rational(coeff);
        }
        if coeff.is_one() && rebuilt.len() == 1 {
            return rebuilt.pop().unwrap();
        }
        let mut out = Vec::with_capacity(rebuilt.len() + 1);
        if !coeff.is_one() {
            out.push(Expr::rational(coeff));
        }
        out.extend(rebuilt);
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        Expr::raw(ExprKind::Product(out))
    }

    /// Canonical power `base^exponent`.
    pub fn pow(base: Expr, exponent: Expr) -> Self {
        if exponent.is_zero() {
            // 0^0 = 1 by the usual CAS convention.
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        if base.is_one() {
            return Expr::one();
        }
        if base.is_zero() {
            if let Some(r) = exponent.as_rational() {
                if r.is_positive() {
                    return Expr::zero();
                }
                // 0^negative is kept; evaluation reports division by zero.
            }
            return Expr::raw(ExprKind::Power(base, exponent));
        }
        if let (Some(b), Some(n)) = (base.as_rational(), exponent.as_integer()) {
            if let Some(folded) = pow_rational(b, n) {
                return Expr::rational(folded);
            }
        }
        match base.kind() {
            ExprKind::Power(b2, e2) => {
                // (b^e2)^e = b^(e2*e): sound when the outer exponent is an
                // integer or the inner base is positive.
                if exponent.as_integer().is_some() || b2.known_positive() {
                    let merged = Expr::product(vec![e2.clone(), exponent]);
                    return Expr::pow(b2.clone(), merged);
                }
            }
            ExprKind::Product(fs) => {
                if exponent.as_integer().is_some() || fs.iter().all(Expr::known_positive) {
                    let parts = fs
                        .iter()
                        .map(|f| Expr::pow(f.clone(), exponent.clone()))
                        .collect();
                    return Expr::product(parts);
                }
            }
            ExprKind::Exp(a) => {
                return Expr::exp(Expr::product(vec![a.clone(), exponent]));
            }
            ExprKind::Sum(_) => {
                if let Some(n) = exponent.as_integer() {
                    // Expand small positive integer powers of sums so the
                    // "sum of products" canonical form is reached.
                    if let Some(n) = small_positive(n, 8) {
                        let mut acc = base.clone();
                        for _ in 1..n {
                            acc = Expr::product(vec![acc, base.clone()]);
                        }
                        return acc;
                    }
                }
            }
            _ => {}
        }
        Expr::raw(ExprKind::Power(base, exponent))
    }

    pub fn powi(base: Expr, n: i64) -> Self {
        Expr::pow(base, Expr::int(n))
    }

    /// Canonical exponential.
    pub fn exp(arg: Expr) -> Self {
        if arg.is_zero() {
            return Expr::one();
        }
        if let ExprKind::Ln(inner) = arg.kind() {
            return inner.clone();
        }
        Expr::raw(ExprKind::Exp(arg))
    }

    /// Canonical natural logarithm.
    pub fn ln(arg: Expr) -> Self {
        if arg.is_one() {
            return Expr::zero();
        }
        if let ExprKind::Exp(inner) = arg.kind() {
            return inner.clone();
        }
        if let ExprKind::Power(b, e) = arg.kind() {
            if b.known_positive() {
                return Expr::product(vec![e.clone(), Expr::ln(b.clone())]);
            }
        }
        Expr::raw(ExprKind::Ln(arg))
    }

    pub fn neg(self) -> Self {
        Expr::product(vec![Expr::int(-1), self])
    }

    /// Reciprocal, `self^(-1)`.
    pub fn recip(self) -> Self {
        Expr::powi(self, -1)
    }
}

/// Split a canonical term into (rational coefficient, remaining factors).
fn split_coeff(term: Expr) -> (Rat, Vec<Expr>) {
    match term.kind() {
        ExprKind::Rational(r) => (r.clone(), Vec::new()),
        ExprKind::Product(fs) => match fs[0].kind() {
            ExprKind::Rational(r) => (r.clone(), fs[1..].to_vec()),
            _ => (Rat::one(), fs.clone()),
        },
        _ => (Rat::one(), vec![term]),
    }
}

/// Reassemble factors that came from canonical terms without re-running the
/// full merge (they are already sorted and disjoint), unless a single factor
/// or empty list makes the wrapper unnecessary.
fn rebuild_product(mut factors: Vec<Expr>) -> Expr {
    match factors.len() {
        0 => Expr::one(),
        1 => factors.pop().unwrap(),
        _ => Expr::raw(ExprKind::Product(factors)),
    }
}

fn small_positive(n: &BigInt, cap: u32) -> Option<u32> {
    use num_traits::ToPrimitive;
    let v = n.to_u32()?;
    (2..=cap).contains(&v).then_some(v)
}

/// Exact `b^n` for integer `n`; `None` when the exponent is too large to
/// fold safely or the base is zero with negative exponent.
fn pow_rational(b: &Rat, n: &BigInt) -> Option<Rat> {
    use num_traits::ToPrimitive;
    let n = n.to_i64()?;
    if n.unsigned_abs() > 4096 {
        return None;
    }
    if b.is_zero() && n < 0 {
        return None;
    }
    let mag = {
        let p = n.unsigned_abs() as u32;
        Rat::new(Pow::pow(b.numer(), p), Pow::pow(b.denom(), p))
    };
    Some(if n < 0 { mag.recip() } else { mag })
}

// ----- total order -------------------------------------------------------

fn kind_rank(k: &ExprKind) -> u8 {
    match k {
        ExprKind::Rational(_) => 0,
        ExprKind::Sym(_) => 1,
        ExprKind::Jet(_) => 2,
        ExprKind::Unknown(_) => 3,
        ExprKind::Exp(_) => 4,
        ExprKind::Ln(_) => 5,
        ExprKind::Power(_, _) => 6,
        ExprKind::Product(_) => 7,
        ExprKind::Sum(_) => 8,
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExprKind::*;
        let (a, b) = (self.kind(), other.kind());
        kind_rank(a).cmp(&kind_rank(b)).then_with(|| match (a, b) {
            (Rational(p), Rational(q)) => p.cmp(q),
            (Sym(p), Sym(q)) => p.cmp(q),
            (Jet(p), Jet(q)) => p.cmp(q),
            (Unknown(p), Unknown(q)) => p.cmp(q),
            (Exp(p), Exp(q)) | (Ln(p), Ln(q)) => p.cmp(q),
            (Power(pb, pe), Power(qb, qe)) => pb.cmp(qb).then_with(|| pe.cmp(qe)),
            (Product(ps), Product(qs)) | (Sum(ps), Sum(qs)) => ps.cmp(qs),
            _ => unreachable!("kinds with equal rank"),
        })
    }
}

// ----- operators ----------------------------------------------------------

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs.neg()])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs.recip()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn rational_folding() {
        assert_eq!(p("2/4"), Expr::ratio(1, 2));
        assert_eq!(p("2^10"), Expr::int(1024));
        assert_eq!(p("(2/3)^-2"), Expr::ratio(9, 4));
        assert_eq!(p("0.25"), Expr::ratio(1, 4));
    }

    #[test]
    fn identity_folding() {
        assert_eq!(p("0*u_x + 1*x"), Expr::x());
        assert_eq!(p("u + 0"), Expr::u());
        assert_eq!(p("u^1"), Expr::u());
        assert_eq!(p("u^0"), Expr::one());
        assert_eq!(p("x - x"), Expr::zero());
    }

    #[test]
    fn like_terms_merge() {
        assert_eq!(p("x + x"), p("2*x"));
        assert_eq!(p("3*x*u - x*u"), p("2*x*u"));
        assert_eq!(p("x + t - x - t"), Expr::zero());
    }

    #[test]
    fn power_base_merge() {
        assert_eq!(p("u^(2*k)*u"), p("u^(2*k+1)"));
        assert_eq!(p("u^2*u^3"), p("u^5"));
        assert_eq!(p("x^2/x"), Expr::x());
        assert_eq!(p("u^(1/2)*u^(1/2)"), Expr::u());
    }

    #[test]
    fn exp_rules() {
        assert_eq!(p("exp(0)"), Expr::one());
        assert_eq!(p("exp(-t)*exp(t)"), Expr::one());
        assert_eq!(p("exp(t)^2"), p("exp(2*t)"));
        assert_eq!(p("ln(exp(x))"), Expr::x());
        assert_eq!(p("exp(ln(u))"), Expr::u());
        assert_eq!(p("ln(1)"), Expr::zero());
    }

    #[test]
    fn sums_of_products_shape() {
        assert_eq!(p("(u+1)^2"), p("u^2 + 2*u + 1"));
        assert_eq!(p("(x+t)*(x-t)"), p("x^2 - t^2"));
        let e = p("(a+b)*(c+d)");
        assert_eq!(e, p("a*c + a*d + b*c + b*d"));
    }

    #[test]
    fn nested_power_collapse() {
        assert_eq!(p("(u^3)^(1/3)"), Expr::u());
        assert_eq!(p("(x^2)^3"), p("x^6"));
        // Fractional power of a sign-indefinite base must not collapse.
        let kept = p("(x^2)^(1/2)");
        assert!(matches!(kept.kind(), ExprKind::Power(_, _)));
    }

    #[test]
    fn factor_order_deterministic() {
        assert_eq!(p("u*x"), p("x*u"));
        assert_eq!(p("t*x"), p("x*t"));
        let e = p("u_x*x*2*u");
        assert_eq!(format!("{e}"), "2*x*u*u_x");
    }

    #[test]
    fn canonicalization_idempotent() {
        for src in [
            "x*u + exp(-t)",
            "u^(1+2*k)",
            "(u+1)^3*(x-t)",
            "exp(t)*exp(-t/3)*u^(r+k)",
            "1/2*u_xx - u_x^2/u",
        ] {
            let once = p(src);
            let twice = Expr::sum(vec![once.clone(), Expr::zero()]);
            assert_eq!(once, twice, "{src}");
            let thrice = Expr::product(vec![once.clone(), Expr::one()]);
            assert_eq!(once, thrice, "{src}");
        }
    }

    #[test]
    fn zero_power_conventions() {
        assert_eq!(Expr::pow(Expr::zero(), Expr::zero()), Expr::one());
        assert_eq!(Expr::pow(Expr::zero(), Expr::int(3)), Expr::zero());
        let kept = Expr::pow(Expr::zero(), Expr::int(-1));
        assert!(matches!(kept.kind(), ExprKind::Power(_, _)));
    }

    #[test]
    fn jet_names() {
        assert_eq!(jet_from_name("u"), Some(JetVar::new(0, 0)));
        assert_eq!(jet_from_name("u_xt"), Some(JetVar::new(1, 1)));
        assert_eq!(jet_from_name("u_tx"), None);
        assert_eq!(jet_from_name("u_xxxx"), None);
        assert_eq!(jet_from_name("v_x"), None);
    }

    #[test]
    fn jet_order_graded() {
        let names = ["u", "u_x", "u_t", "u_xx", "u_xt", "u_tt", "u_xxx"];
        let jets: Vec<JetVar> = names.iter().map(|n| jet_from_name(n).unwrap()).collect();
        for w in jets.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn symbol_order() {
        assert!(Expr::x() < Expr::t());
        assert!(Expr::t() < Expr::symbol("alpha"));
        assert!(Expr::symbol("alpha") < Expr::symbol("k"));
        assert!(Expr::symbol("k") < Expr::u());
        assert!(Expr::u() < Expr::jet(1, 0));
    }
}
