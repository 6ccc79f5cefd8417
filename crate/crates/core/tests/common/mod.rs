//! Shared support for integration tests: small forward-mode AD types used to
//! cross-check symbolic derivatives without going through `Expr::diff`.

#![allow(dead_code)]

use nfpe_lie::symexpr::{Expr, ExprKind};
use std::collections::BTreeMap;

/// Second-order forward AD number over the three point variables (x, t, u):
/// value, gradient, and full Hessian.
#[derive(Debug, Clone, Copy)]
pub struct D2 {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl D2 {
    pub fn constant(v: f64) -> Self {
        D2 {
            v,
            g: [0.0; 3],
            h: [[0.0; 3]; 3],
        }
    }

    /// Seed variable `i` (0 = x, 1 = t, 2 = u) at value `v`.
    pub fn variable(i: usize, v: f64) -> Self {
        let mut d = D2::constant(v);
        d.g[i] = 1.0;
        d
    }

    pub fn add(self, o: D2) -> D2 {
        let mut r = D2::constant(self.v + o.v);
        for i in 0..3 {
            r.g[i] = self.g[i] + o.g[i];
            for j in 0..3 {
                r.h[i][j] = self.h[i][j] + o.h[i][j];
            }
        }
        r
    }

    pub fn mul(self, o: D2) -> D2 {
        let mut r = D2::constant(self.v * o.v);
        for i in 0..3 {
            r.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..3 {
                r.h[i][j] = self.h[i][j] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[i][j];
            }
        }
        r
    }

    pub fn scale(self, c: f64) -> D2 {
        self.mul(D2::constant(c))
    }

    /// Apply a scalar function given its value and first two derivatives at
    /// `self.v` (univariate chain rule).
    fn chain(self, f: f64, df: f64, d2f: f64) -> D2 {
        let mut r = D2::constant(f);
        for i in 0..3 {
            r.g[i] = df * self.g[i];
            for j in 0..3 {
                r.h[i][j] = d2f * self.g[i] * self.g[j] + df * self.h[i][j];
            }
        }
        r
    }

    pub fn exp(self) -> D2 {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> D2 {
        assert!(self.v > 0.0, "ln of non-positive value in AD oracle");
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn powc(self, c: f64) -> D2 {
        assert!(self.v > 0.0, "power of non-positive base in AD oracle");
        let f = self.v.powf(c);
        self.chain(f, c * f / self.v, c * (c - 1.0) * f / (self.v * self.v))
    }

    pub fn recip(self) -> D2 {
        self.powc(-1.0)
    }
}

/// Evaluate a point-function Expr (x, t, u, parameters) with D2 arithmetic.
/// Parameters are looked up in `params`.
pub fn eval_d2(e: &Expr, x: D2, t: D2, u: D2, params: &BTreeMap<String, f64>) -> D2 {
    match e.kind() {
        ExprKind::Rational(r) => {
            use num_traits::ToPrimitive;
            D2::constant(r.to_f64().unwrap())
        }
        ExprKind::Sym(s) => match s.name() {
            "x" => x,
            "t" => t,
            name => D2::constant(
                *params
                    .get(name)
                    .unwrap_or_else(|| panic!("no value for parameter {name}")),
            ),
        },
        ExprKind::Jet(j) if j.order() == 0 => u,
        ExprKind::Jet(_) => panic!("derivative coordinate in point function"),
        ExprKind::Unknown(_) => panic!("unknown atom in point function"),
        ExprKind::Sum(ts) => ts
            .iter()
            .map(|s| eval_d2(s, x, t, u, params))
            .fold(D2::constant(0.0), D2::add),
        ExprKind::Product(fs) => fs
            .iter()
            .map(|s| eval_d2(s, x, t, u, params))
            .fold(D2::constant(1.0), D2::mul),
        ExprKind::Power(b, ex) => {
            let bb = eval_d2(b, x, t, u, params);
            let ee = eval_d2(ex, x, t, u, params);
            if ee.g == [0.0; 3] && ee.h == [[0.0; 3]; 3] {
                bb.powc(ee.v)
            } else {
                bb.ln().mul(ee).exp()
            }
        }
        ExprKind::Exp(a) => eval_d2(a, x, t, u, params).exp(),
        ExprKind::Ln(a) => eval_d2(a, x, t, u, params).ln(),
    }
}

/// First-order forward AD number over the five jet variables
/// (x, t, u, u_x, u_xx), for partials of an evolution right-hand side.
#[derive(Debug, Clone, Copy)]
pub struct G5 {
    pub v: f64,
    pub g: [f64; 5],
}

impl G5 {
    pub fn constant(v: f64) -> Self {
        G5 { v, g: [0.0; 5] }
    }

    pub fn variable(i: usize, v: f64) -> Self {
        let mut d = G5::constant(v);
        d.g[i] = 1.0;
        d
    }

    pub fn add(self, o: G5) -> G5 {
        let mut r = G5::constant(self.v + o.v);
        for i in 0..5 {
            r.g[i] = self.g[i] + o.g[i];
        }
        r
    }

    pub fn mul(self, o: G5) -> G5 {
        let mut r = G5::constant(self.v * o.v);
        for i in 0..5 {
            r.g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        r
    }

    fn chain(self, f: f64, df: f64) -> G5 {
        let mut r = G5::constant(f);
        for i in 0..5 {
            r.g[i] = df * self.g[i];
        }
        r
    }

    pub fn exp(self) -> G5 {
        let e = self.v.exp();
        self.chain(e, e)
    }

    pub fn ln(self) -> G5 {
        assert!(self.v > 0.0);
        self.chain(self.v.ln(), 1.0 / self.v)
    }

    pub fn powc(self, c: f64) -> G5 {
        assert!(self.v > 0.0, "power of non-positive base in AD oracle");
        let f = self.v.powf(c);
        self.chain(f, c * f / self.v)
    }
}

/// Evaluate an evolution right-hand side (x, t, u, u_x, u_xx, parameters)
/// with G5 arithmetic.
pub fn eval_g5(e: &Expr, vars: [G5; 5], params: &BTreeMap<String, f64>) -> G5 {
    match e.kind() {
        ExprKind::Rational(r) => {
            use num_traits::ToPrimitive;
            G5::constant(r.to_f64().unwrap())
        }
        ExprKind::Sym(s) => match s.name() {
            "x" => vars[0],
            "t" => vars[1],
            name => G5::constant(
                *params
                    .get(name)
                    .unwrap_or_else(|| panic!("no value for parameter {name}")),
            ),
        },
        ExprKind::Jet(j) => match (j.nx, j.nt) {
            (0, 0) => vars[2],
            (1, 0) => vars[3],
            (2, 0) => vars[4],
            _ => panic!("unsupported jet in rhs"),
        },
        ExprKind::Unknown(_) => panic!("unknown atom in rhs"),
        ExprKind::Sum(ts) => ts
            .iter()
            .map(|s| eval_g5(s, vars, params))
            .fold(G5::constant(0.0), G5::add),
        ExprKind::Product(fs) => fs
            .iter()
            .map(|s| eval_g5(s, vars, params))
            .fold(G5::constant(1.0), G5::mul),
        ExprKind::Power(b, ex) => {
            let bb = eval_g5(b, vars, params);
            let ee = eval_g5(ex, vars, params);
            if ee.g == [0.0; 5] {
                bb.powc(ee.v)
            } else {
                bb.ln().mul(ee).exp()
            }
        }
        ExprKind::Exp(a) => eval_g5(a, vars, params).exp(),
        ExprKind::Ln(a) => eval_g5(a, vars, params).ln(),
    }
}
