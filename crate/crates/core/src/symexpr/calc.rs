//! Partial differentiation and substitution.

use super::{Bindings, Expr, ExprKind, UnknownAtom, Var};

impl Expr {
    /// Partial derivative with respect to `v`, treating every other symbol
    /// and jet coordinate as independent.
    ///
    /// Unknown-function atoms are functions of (x, t, u): differentiating
    /// one by a coordinate bumps the matching index (`xi_x` from `xi`), and
    /// any other variable annihilates it. Total derivatives on jet space are
    /// layered on top of this in the jets module.
    pub fn diff(&self, v: &Var) -> Expr {
        match self.kind() {
            ExprKind::Rational(_) => Expr::zero(),
            ExprKind::Sym(s) => match v {
                Var::Sym(w) if s == w => Expr::one(),
                _ => Expr::zero(),
            },
            ExprKind::Jet(j) => match v {
                Var::Jet(w) if j == w => Expr::one(),
                _ => Expr::zero(),
            },
            ExprKind::Unknown(a) => match unknown_bump(a, v) {
                Some(bumped) => Expr::raw_unknown(bumped),
                None => Expr::zero(),
            },
            ExprKind::Sum(ts) => Expr::sum(ts.iter().map(|t| t.diff(v)).collect()),
            ExprKind::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, fi) in fs.iter().enumerate() {
                    let d = fi.diff(v);
                    if d.is_zero() {
                        continue;
                    }
                    let mut factors = vec![d];
                    for (j, fj) in fs.iter().enumerate() {
                        if j != i {
                            factors.push(fj.clone());
                        }
                    }
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            ExprKind::Power(b, e) => {
                let db = b.diff(v);
                let de = e.diff(v);
                if de.is_zero() {
                    if db.is_zero() {
                        return Expr::zero();
                    }
                    // d(b^e) = e * b^(e-1) * db
                    let em1 = e.clone() - Expr::one();
                    return Expr::product(vec![e.clone(), Expr::pow(b.clone(), em1), db]);
                }
                // General case via b^e = exp(e ln b):
                // d(b^e) = b^e * (de*ln b + e*db/b).
                let inner = Expr::product(vec![de, Expr::ln(b.clone())])
                    + Expr::product(vec![e.clone(), db, b.clone().recip()]);
                Expr::product(vec![self.clone(), inner])
            }
            ExprKind::Exp(a) => Expr::product(vec![a.diff(v), self.clone()]),
            ExprKind::Ln(a) => Expr::product(vec![a.diff(v), a.clone().recip()]),
        }
    }

    /// Iterated partial derivative.
    pub fn diff_n(&self, v: &Var, n: u8) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.diff(v);
        }
        e
    }

    /// Simultaneous substitution of expressions for variables.
    pub fn substitute(&self, bindings: &Bindings) -> Expr {
        match self.kind() {
            ExprKind::Rational(_) | ExprKind::Unknown(_) => self.clone(),
            ExprKind::Sym(s) => match bindings.get(&Var::Sym(s.clone())) {
                Some(e) => e.clone(),
                None => self.clone(),
            },
            ExprKind::Jet(j) => match bindings.get(&Var::Jet(*j)) {
                Some(e) => e.clone(),
                None => self.clone(),
            },
            ExprKind::Sum(ts) => Expr::sum(ts.iter().map(|t| t.substitute(bindings)).collect()),
            ExprKind::Product(fs) => {
                Expr::product(fs.iter().map(|f| f.substitute(bindings)).collect())
            }
            ExprKind::Power(b, e) => {
                Expr::pow(b.substitute(bindings), e.substitute(bindings))
            }
            ExprKind::Exp(a) => Expr::exp(a.substitute(bindings)),
            ExprKind::Ln(a) => Expr::ln(a.substitute(bindings)),
        }
    }

    /// Substitute a single variable.
    pub fn subst(&self, v: &Var, replacement: &Expr) -> Expr {
        let mut b = Bindings::new();
        b.insert(v.clone(), replacement.clone());
        self.substitute(&b)
    }

    fn raw_unknown(a: UnknownAtom) -> Expr {
        Expr::unknown(a.func, a.dx, a.dt, a.du)
    }
}

fn unknown_bump(a: &UnknownAtom, v: &Var) -> Option<UnknownAtom> {
    let mut b = *a;
    match v {
        Var::Sym(s) if s.name() == "x" => b.dx += 1,
        Var::Sym(s) if s.name() == "t" => b.dt += 1,
        Var::Jet(j) if *j == super::JetVar::base() => b.du += 1,
        _ => return None,
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::super::{parse, UnknownFunc};
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn dx(s: &str) -> Expr {
        p(s).diff(&Var::x())
    }

    fn du(s: &str) -> Expr {
        p(s).diff(&Var::u())
    }

    #[test]
    fn polynomial_rules() {
        assert_eq!(dx("x^2"), p("2*x"));
        assert_eq!(dx("x*t + t^2"), Expr::t());
        assert_eq!(dx("7"), Expr::zero());
        assert_eq!(p("x^3 - x").diff_n(&Var::x(), 2), p("6*x"));
    }

    #[test]
    fn symbolic_exponent_power_rule() {
        assert_eq!(du("u^(1+2*k)"), p("(1+2*k)*u^(2*k)"));
        assert_eq!(du("u^(-1/3)"), p("-1/3*u^(-4/3)"));
        let d = p("u^k").diff(&Var::sym("k"));
        assert_eq!(d, p("u^k*ln(u)"));
    }

    #[test]
    fn exp_ln_rules() {
        assert_eq!(p("exp(-2*t/3)").diff(&Var::t()), p("-2/3*exp(-2*t/3)"));
        assert_eq!(dx("ln(x)"), p("1/x"));
        assert_eq!(dx("exp(x^2)"), p("2*x*exp(x^2)"));
    }

    #[test]
    fn jets_are_independent_coordinates() {
        assert_eq!(p("u_x^2").diff(&Var::jet(1, 0)), p("2*u_x"));
        assert_eq!(p("u_x").diff(&Var::u()), Expr::zero());
        assert_eq!(p("x*u_xx").diff(&Var::x()), p("u_xx"));
    }

    #[test]
    fn unknown_atoms_differentiate_by_index() {
        let xi = Expr::unknown(UnknownFunc::Xi, 0, 0, 0);
        assert_eq!(xi.diff(&Var::x()), Expr::unknown(UnknownFunc::Xi, 1, 0, 0));
        assert_eq!(
            xi.diff(&Var::x()).diff(&Var::u()),
            Expr::unknown(UnknownFunc::Xi, 1, 0, 1)
        );
        assert_eq!(
            xi.diff(&Var::u()).diff(&Var::x()),
            xi.diff(&Var::x()).diff(&Var::u())
        );
        assert_eq!(xi.diff(&Var::jet(1, 0)), Expr::zero());
        let eta = Expr::unknown(UnknownFunc::Eta, 0, 0, 0);
        assert_eq!(eta.diff(&Var::t()), Expr::unknown(UnknownFunc::Eta, 0, 1, 0));
    }

    #[test]
    fn substitution_rebuilds_canonically() {
        let e = p("u_t - u - x*u_x");
        let mut b = Bindings::new();
        b.insert(Var::jet(0, 1), p("u + x*u_x"));
        assert_eq!(e.substitute(&b), Expr::zero());
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = p("x^2*t");
        let mut b = Bindings::new();
        b.insert(Var::x(), Expr::t());
        b.insert(Var::t(), Expr::x());
        assert_eq!(e.substitute(&b), p("t^2*x"));
    }

    #[test]
    fn substitute_into_exponent() {
        let e = p("u^m");
        let got = e.subst(&Var::sym("m"), &p("-1/3"));
        assert_eq!(got, p("u^(-1/3)"));
    }
}
