//! Numeric evaluation of expressions.

use super::{Expr, ExprKind, NumBindings, Var};
use num_traits::ToPrimitive;
use std::fmt;

/// Why an expression could not be evaluated at a point.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// A symbol or jet variable has no binding.
    Unbound(Var),
    /// Fractional power of a negative base.
    NegativeBase { base: f64 },
    /// Zero raised to a negative power, or a plain reciprocal of zero.
    DivisionByZero,
    /// Logarithm of a non-positive argument.
    LnDomain { arg: f64 },
    /// Unknown-function atoms have no numeric value.
    UnknownPresent,
    /// A rational constant overflowed the double range.
    NonFinite,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Unbound(v) => write!(f, "no value bound for '{v}'"),
            EvalError::NegativeBase { base } => {
                write!(f, "fractional power of negative base {base}")
            }
            EvalError::DivisionByZero => write!(f, "division by zero"),
            EvalError::LnDomain { arg } => write!(f, "ln of non-positive argument {arg}"),
            EvalError::UnknownPresent => {
                write!(f, "expression contains unknown-function atoms")
            }
            EvalError::NonFinite => write!(f, "constant exceeds double range"),
        }
    }
}

impl std::error::Error for EvalError {}

impl Expr {
    /// Evaluate with the given variable values.
    pub fn eval(&self, vals: &NumBindings) -> Result<f64, EvalError> {
        match self.kind() {
            ExprKind::Rational(r) => r.to_f64().filter(|v| v.is_finite()).ok_or(EvalError::NonFinite),
            ExprKind::Sym(s) => vals
                .get(&Var::Sym(s.clone()))
                .copied()
                .ok_or_else(|| EvalError::Unbound(Var::Sym(s.clone()))),
            ExprKind::Jet(j) => vals
                .get(&Var::Jet(*j))
                .copied()
                .ok_or(EvalError::Unbound(Var::Jet(*j))),
            ExprKind::Unknown(_) => Err(EvalError::UnknownPresent),
            ExprKind::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval(vals)?;
                }
                Ok(acc)
            }
            ExprKind::Product(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval(vals)?;
                }
                Ok(acc)
            }
            ExprKind::Power(b, e) => {
                let base = b.eval(vals)?;
                // An exactly integer exponent works for any base sign.
                if let Some(r) = e.as_rational() {
                    if r.is_integer() {
                        if let Some(n) = r.numer().to_i32() {
                            if base == 0.0 && n < 0 {
                                return Err(EvalError::DivisionByZero);
                            }
                            return Ok(base.powi(n));
                        }
                    }
                }
                let exp = e.eval(vals)?;
                if base > 0.0 {
                    Ok(base.powf(exp))
                } else if base == 0.0 {
                    if exp > 0.0 {
                        Ok(0.0)
                    } else if exp == 0.0 {
                        Ok(1.0)
                    } else {
                        Err(EvalError::DivisionByZero)
                    }
                } else if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
                    Ok(base.powi(exp as i32))
                } else {
                    Err(EvalError::NegativeBase { base })
                }
            }
            ExprKind::Exp(a) => Ok(a.eval(vals)?.exp()),
            ExprKind::Ln(a) => {
                let arg = a.eval(vals)?;
                if arg > 0.0 {
                    Ok(arg.ln())
                } else {
                    Err(EvalError::LnDomain { arg })
                }
            }
        }
    }

    /// Evaluate an expression with no free variables.
    pub fn eval_closed(&self) -> Result<f64, EvalError> {
        self.eval(&NumBindings::new())
    }
}
