//! Textual rendering of expressions.
//!
//! The output round-trips through [`super::parse`] except for
//! unknown-function atoms, which have no input syntax. Operator precedence
//! is respected, so parentheses appear only where reparsing would otherwise
//! change the tree.

use super::{Expr, ExprKind, Rat, UnknownAtom, UnknownFunc, Var};
use num_traits::Signed;
use std::fmt;

/// Contexts a subexpression can be printed in, loosest to tightest.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum,
    Term,
    Atom,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, f, Prec::Sum)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Sym(s) => f.write_str(s.name()),
            Var::Jet(j) => f.write_str(&jet_name(j.nx, j.nt)),
        }
    }
}

pub(super) fn jet_name(nx: u8, nt: u8) -> String {
    if nx == 0 && nt == 0 {
        return "u".to_string();
    }
    let mut s = String::from("u_");
    s.extend(std::iter::repeat_n('x', nx as usize));
    s.extend(std::iter::repeat_n('t', nt as usize));
    s
}

fn unknown_name(a: &UnknownAtom) -> String {
    let mut s = match a.func {
        UnknownFunc::Xi => "xi".to_string(),
        UnknownFunc::Tau => "tau".to_string(),
        UnknownFunc::Eta => "eta".to_string(),
    };
    if a.order() > 0 {
        s.push('_');
        s.extend(std::iter::repeat_n('x', a.dx as usize));
        s.extend(std::iter::repeat_n('t', a.dt as usize));
        s.extend(std::iter::repeat_n('u', a.du as usize));
    }
    s
}

fn rational_is_simple_atom(r: &Rat) -> bool {
    r.is_integer() && !r.is_negative()
}

/// Whether `e` can stand unparenthesized in context `prec`.
fn fits(e: &Expr, prec: Prec) -> bool {
    match e.kind() {
        ExprKind::Sum(_) => prec == Prec::Sum,
        ExprKind::Product(_) => prec <= Prec::Term,
        ExprKind::Power(_, _) => prec <= Prec::Term,
        ExprKind::Rational(r) => {
            if prec == Prec::Atom {
                rational_is_simple_atom(r)
            } else {
                true
            }
        }
        ExprKind::Sym(_)
        | ExprKind::Jet(_)
        | ExprKind::Unknown(_)
        | ExprKind::Exp(_)
        | ExprKind::Ln(_) => true,
    }
}

fn fmt_at(e: &Expr, f: &mut fmt::Formatter<'_>, prec: Prec) -> fmt::Result {
    if !fits(e, prec) {
        write!(f, "(")?;
        fmt_at(e, f, Prec::Sum)?;
        return write!(f, ")");
    }
    match e.kind() {
        ExprKind::Rational(r) => {
            if r.is_integer() {
                write!(f, "{}", r.numer())
            } else {
                write!(f, "{}/{}", r.numer(), r.denom())
            }
        }
        ExprKind::Sym(s) => f.write_str(s.name()),
        ExprKind::Jet(j) => f.write_str(&jet_name(j.nx, j.nt)),
        ExprKind::Unknown(a) => f.write_str(&unknown_name(a)),
        ExprKind::Exp(a) => {
            write!(f, "exp(")?;
            fmt_at(a, f, Prec::Sum)?;
            write!(f, ")")
        }
        ExprKind::Ln(a) => {
            write!(f, "ln(")?;
            fmt_at(a, f, Prec::Sum)?;
            write!(f, ")")
        }
        ExprKind::Power(b, ex) => {
            fmt_at(b, f, Prec::Atom)?;
            write!(f, "^")?;
            fmt_at(ex, f, Prec::Atom)
        }
        ExprKind::Product(fs) => {
            let mut rest = &fs[..];
            if let ExprKind::Rational(r) = fs[0].kind() {
                if *r == -Rat::from_integer(1.into()) {
                    write!(f, "-")?;
                    rest = &fs[1..];
                }
            }
            for (i, factor) in rest.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                fmt_at(factor, f, Prec::Term)?;
            }
            Ok(())
        }
        ExprKind::Sum(ts) => {
            for (i, term) in ts.iter().enumerate() {
                let (neg, mag) = strip_sign(term);
                if i == 0 {
                    if neg {
                        write!(f, "-")?;
                    }
                } else if neg {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
                fmt_at(&mag, f, Prec::Term)?;
            }
            Ok(())
        }
    }
}

/// For sum rendering: pull a leading negative sign out of a term.
fn strip_sign(term: &Expr) -> (bool, Expr) {
    let negative = match term.kind() {
        ExprKind::Rational(r) => r.is_negative(),
        ExprKind::Product(fs) => {
            matches!(fs[0].kind(), ExprKind::Rational(r) if r.is_negative())
        }
        _ => false,
    };
    if negative {
        (true, term.clone().neg())
    } else {
        (false, term.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn rendered(s: &str) -> String {
        parse(s).unwrap().to_string()
    }

    #[test]
    fn atoms() {
        assert_eq!(rendered("x"), "x");
        assert_eq!(rendered("u_xx"), "u_xx");
        assert_eq!(rendered("-3"), "-3");
        assert_eq!(rendered("5/6"), "5/6");
    }

    #[test]
    fn sums_use_signs() {
        assert_eq!(rendered("x - t"), "x - t");
        assert_eq!(rendered("-x + t"), "t - x");
        assert_eq!(rendered("u - 2*u_x + 1"), "1 + u - 2*u_x");
    }

    #[test]
    fn powers_parenthesize_when_needed() {
        assert_eq!(rendered("u^2"), "u^2");
        assert_eq!(rendered("u^(-1/3)"), "u^(-1/3)");
        assert_eq!(rendered("u^(1+2*k)"), "u^(1 + 2*k)");
        assert_eq!(rendered("(x+1)^(1/2)*u"), "u*(1 + x)^(1/2)");
        assert_eq!(rendered("(1/2)^k"), "(1/2)^k");
    }

    #[test]
    fn products() {
        assert_eq!(rendered("2*x*u"), "2*x*u");
        assert_eq!(rendered("-x*u"), "-x*u");
        assert_eq!(rendered("x*(u+1)"), "x + x*u");
        assert_eq!(rendered("1/2*u_xx"), "1/2*u_xx");
    }

    #[test]
    fn functions() {
        assert_eq!(rendered("exp(-t)"), "exp(-t)");
        assert_eq!(rendered("ln(x)^2"), "ln(x)^2");
        assert_eq!(rendered("exp(t)*x"), "x*exp(t)");
    }

    #[test]
    fn unknown_atoms_print() {
        let a = Expr::unknown(UnknownFunc::Xi, 1, 0, 1);
        assert_eq!(a.to_string(), "xi_xu");
        let b = Expr::unknown(UnknownFunc::Eta, 0, 0, 0);
        assert_eq!(b.to_string(), "eta");
        let c = Expr::unknown(UnknownFunc::Tau, 0, 2, 0);
        assert_eq!(c.to_string(), "tau_tt");
    }

    #[test]
    fn roundtrip_examples() {
        for src in [
            "u_t - u - x*u_x",
            "exp(-2*t/3)*(x*u_x - u)",
            "u^(r+k+1)*(1 - u^(-2*k))",
            "(x^2 - t)^3",
            "3/2*u - u_x^2/u",
        ] {
            let once = parse(src).unwrap();
            let again = parse(&once.to_string()).unwrap();
            assert_eq!(once, again, "{src}");
        }
    }
}
