//! Invariant ansatze and reduced ODEs for the optimal-system representatives.
//!
//! Every catalog entry factors as u(x,t) = Phi(x,t) * y(zeta(x,t)), with Phi
//! and zeta stored as numeric evaluators carrying hand-coded exact first and
//! second derivatives, and the reduced equation stored as an [`Expr`] over
//! the symbols `zeta`, `y`, `yp`, `ypp` plus named constants.
//!
//! Symbol conventions in the stored equations: `Omega` (capital) is the
//! diffusion coefficient of the PDE; lowercase `omega`, like `lambda`, `mu`,
//! `nu`, `rho`, `delta`, `theta` and the Greek-letter parameters `alpha`,
//! `beta`, `gamma`, are the representative-specific constants listed in the
//! recipe's `params` and `aux` maps.
//!
//! [`verify_reduction`] substitutes the ansatz into the PDE numerically and
//! measures, pointwise on a sampling grid, how the ratio of the full residual
//! to the catalog equation varies across independent test functions: the
//! residual equals M(x,t) * E(zeta) * y^(-p) for a test-function-free
//! multiplier M exactly when the catalog equation is the true reduction, so a
//! relative spread below 1e-8 certifies it. The stationary representatives
//! (label X1, where Phi = 1 and zeta = x) additionally admit a fully symbolic
//! check in [`verify_stationary_symbolic`].

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::json;
use thiserror::Error;

use crate::family::{generators, make_pde, CaseFamily, CaseId, FamilyError, Part};
use crate::jets::total_x;
use crate::liealg::{combo_rat, expand_in_basis, LieAlgError, RepLabel};
use crate::symexpr::{
    equivalent, parse, rat, rat_to_f64, Bindings, Expr, ExprKind, NumBindings, Rat, Var, Verdict,
};

/// Value of a scalar field of (x, t) with the derivatives the residual
/// computation needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deriv2 {
    pub v: f64,
    pub dx: f64,
    pub dt: f64,
    pub dxx: f64,
}

impl Deriv2 {
    fn constant(v: f64) -> Self {
        Deriv2 {
            v,
            dx: 0.0,
            dt: 0.0,
            dxx: 0.0,
        }
    }
}

type Field2 = Box<dyn Fn(f64, f64) -> Deriv2 + Send + Sync>;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("{case} has no reduction catalog")]
    NoCatalog { case: String },
    #[error("case C needs a part (i)-(iv) to pick its reduction forms; classify (r, k) first")]
    AmbiguousLine,
    #[error("{case} has no representative '{label}'")]
    UnknownRepresentative { case: String, label: String },
    #[error("representative '{label}' requires parameter '{name}'")]
    MissingParam {
        label: &'static str,
        name: &'static str,
    },
    #[error("{0}")]
    ConstraintViolation(String),
    #[error("field is not one of the cataloged ansatz generators: {0}")]
    FieldNotCatalogued(String),
    #[error(transparent)]
    Span(#[from] LieAlgError),
}

/// Errors from evaluating the reduced equation as an explicit second-order
/// ODE at a point.
#[derive(Debug, Error)]
pub enum OdeRhsError {
    #[error("y must stay positive (y = {y} at zeta = {zeta})")]
    NonPositiveY { zeta: f64, y: f64 },
    #[error("the y''-coefficient of the reduced equation vanished at zeta = {zeta}")]
    DegenerateLeadingCoefficient { zeta: f64 },
    #[error("evaluation failed: {0}")]
    Eval(String),
}

/// One catalog entry: the ansatz u = Phi * y(zeta) for a representative,
/// its constants, and the reduced equation.
pub struct ReductionRecipe {
    pub case: CaseId,
    pub label: RepLabel,
    /// Representative parameters (subset of alpha, beta, gamma).
    pub params: BTreeMap<String, f64>,
    /// Effective diffusion multiplier of the part (1, 2, or 4).
    pub theta: Rat,
    /// Derived constants bound in the equation (delta, omega, lambda, mu,
    /// nu, rho as applicable).
    pub aux: BTreeMap<String, f64>,
    /// The reduced equation, equal to zero along solutions.
    pub ode: Expr,
    /// Exponent p such that the PDE residual is M(x,t) * ode * y^(-p).
    pub residual_power: Rat,
    /// Human-readable closed forms of the ansatz factors.
    pub phi_text: String,
    pub zeta_text: String,
    /// Sampling box on which the ansatz is real and positive.
    pub x_range: (f64, f64),
    pub t_range: (f64, f64),
    /// Open t-interval on which the ansatz is defined at all; infinite for
    /// most entries, bounded where Phi has a pole or branch point.
    pub t_domain: (f64, f64),
    phi: Field2,
    zeta: Field2,
}

impl fmt::Debug for ReductionRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReductionRecipe")
            .field("case", &self.case.label())
            .field("label", &self.label)
            .field("params", &self.params)
            .field("theta", &self.theta)
            .field("aux", &self.aux)
            .field("ode", &self.ode.to_string())
            .finish_non_exhaustive()
    }
}

impl ReductionRecipe {
    pub fn phi_at(&self, x: f64, t: f64) -> Deriv2 {
        (self.phi)(x, t)
    }

    pub fn zeta_at(&self, x: f64, t: f64) -> Deriv2 {
        (self.zeta)(x, t)
    }

    /// Numeric bindings for every symbol of `ode` except zeta, y, yp, ypp.
    pub fn ode_bindings(&self, omega: f64) -> NumBindings {
        let mut b = NumBindings::new();
        b.insert(Var::sym("Omega"), omega);
        b.insert(Var::sym("theta"), rat_to_f64(&self.theta));
        for (k, v) in self.params.iter().chain(self.aux.iter()) {
            b.insert(Var::sym(k), *v);
        }
        b
    }

    /// Solves the reduced equation for y'' at a point; every catalog
    /// equation is linear in y''.
    pub fn ode_second_derivative(
        &self,
        omega: f64,
        zeta: f64,
        y: f64,
        yp: f64,
    ) -> Result<f64, OdeRhsError> {
        if y <= 0.0 {
            return Err(OdeRhsError::NonPositiveY { zeta, y });
        }
        let mut b = self.ode_bindings(omega);
        b.insert(Var::sym("zeta"), zeta);
        b.insert(Var::sym("y"), y);
        b.insert(Var::sym("yp"), yp);
        b.insert(Var::sym("ypp"), 0.0);
        let e0 = self
            .ode
            .eval(&b)
            .map_err(|e| OdeRhsError::Eval(e.to_string()))?;
        b.insert(Var::sym("ypp"), 1.0);
        let e1 = self
            .ode
            .eval(&b)
            .map_err(|e| OdeRhsError::Eval(e.to_string()))?;
        let lead = e1 - e0;
        let scale = term_magnitude(&self.ode, &b).max(1.0);
        if lead.abs() < 1e-12 * scale {
            return Err(OdeRhsError::DegenerateLeadingCoefficient { zeta });
        }
        Ok(-e0 / lead)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "case": self.case.label(),
            "representative": self.label.as_str(),
            "ansatz": "u(x,t) = Phi(x,t) * y(zeta(x,t))",
            "phi": self.phi_text,
            "zeta": self.zeta_text,
            "params": self.params,
            "theta": self.theta.to_string(),
            "aux": self.aux,
            "ode": format!("{} = 0", self.ode),
            "residual_power": self.residual_power.to_string(),
            "sampling": {
                "x": [self.x_range.0, self.x_range.1],
                "t": [self.t_range.0, self.t_range.1],
            },
            "t_domain": [fmt_bound(self.t_domain.0), fmt_bound(self.t_domain.1)],
        })
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Representatives that have a reduction recipe for the given case.
pub fn catalog(case: &CaseId) -> Vec<RepLabel> {
    match case.family() {
        CaseFamily::A => vec![
            RepLabel::X2X4X5,
            RepLabel::X1X2X4,
            RepLabel::X1X3,
            RepLabel::X1,
        ],
        CaseFamily::B | CaseFamily::C => vec![RepLabel::X1X4, RepLabel::X1X3, RepLabel::X1],
        CaseFamily::Generic => Vec::new(),
    }
}

/// Effective diffusion multiplier theta of the case line.
pub fn theta_for(case: &CaseId) -> Rat {
    match (case.family(), case.part()) {
        (CaseFamily::A, Some(Part::III | Part::IV)) => rat(4, 1),
        (CaseFamily::B, Some(Part::III | Part::IV)) => rat(2, 1),
        _ => rat(1, 1),
    }
}

const ODE_A_X2X4X5: &str = "18*beta^(3/2)*y^(7/3)*yp + 9*beta*gamma*y^(10/3) \
                            + 2*theta*gamma*Omega*(3*y*ypp - 9*y^2 - 4*yp^2)";
const ODE_A_X1X2X4: &str = "18*omega^5*alpha^2*zeta*y^(7/3)*yp + rho*y^(10/3) \
                            + 2*theta*Omega*(4*yp^2 - 3*y*ypp)";
const ODE_A_X1: &str = "theta*(4*Omega*yp^2 - 3*Omega*y*ypp) + 9*zeta*y^(7/3)*yp + 9*y^(10/3)";
const ODE_B_X1X4: &str = "2*theta*Omega*(y*ypp - 2*yp^2) + 2*alpha*zeta*y^3*yp \
                          + (1 + 2*alpha)*y^4";
const ODE_B_X1X3: &str = "theta*Omega*(alpha - 1)*(2*yp^2 - y*ypp) + alpha*(y^4 + zeta*y^3*yp)";
const ODE_B_X1: &str = "theta*Omega*(y*ypp - 2*yp^2) - zeta*y^3*yp - y^4";
const ODE_C3_X1X4: &str = "y*(lambda*y - delta*alpha*zeta*yp) \
                           - Omega*delta*omega*y^(2*delta)*(y*ypp + 2*delta*yp^2)";
const ODE_C3_X1X3: &str = "y^2 + Omega*(1 + 2*delta)*y^(2*delta)*(y*ypp + 2*delta*yp^2) \
                           + zeta*y*yp";
const ODE_C3_X1: &str = "Omega*(1 + 2*delta)*y^(2*delta - 1)*(y*ypp + 2*delta*yp^2) \
                         + zeta*yp + y";
const ODE_C4_X1X4: &str = "Omega*nu*y^(1 + 2*delta)*ypp + Omega*nu^2*y^(2*delta)*yp^2 \
                           + mu*zeta*y^2*yp + omega*y^3";
const ODE_C4_X1X3: &str = "y^3 + Omega*rho^2*y^(2*delta)*yp^2 \
                           - Omega*rho*y^(1 + 2*delta)*ypp + zeta*y^2*yp";

fn ode(src: &str) -> Expr {
    parse(src).expect("catalog equation parses")
}

fn pmap(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| ((*k).to_string(), *v)).collect()
}

fn need(
    params: &BTreeMap<String, f64>,
    label: &'static str,
    name: &'static str,
) -> Result<f64, ReductionError> {
    let v = params
        .get(name)
        .copied()
        .ok_or(ReductionError::MissingParam { label, name })?;
    if !v.is_finite() {
        return Err(ReductionError::ConstraintViolation(format!(
            "parameter {name} of '{label}' must be finite (got {v})"
        )));
    }
    Ok(v)
}

const FULL_T: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

struct Parts {
    params: BTreeMap<String, f64>,
    aux: BTreeMap<String, f64>,
    ode: Expr,
    residual_power: Rat,
    phi_text: String,
    zeta_text: String,
    x_range: (f64, f64),
    t_range: (f64, f64),
    t_domain: (f64, f64),
    phi: Field2,
    zeta: Field2,
}

fn identity_parts(ode_src: &str, residual_power: Rat) -> Parts {
    Parts {
        params: BTreeMap::new(),
        aux: BTreeMap::new(),
        ode: ode(ode_src),
        residual_power,
        phi_text: "1".into(),
        zeta_text: "x".into(),
        x_range: (0.2, 1.2),
        t_range: (0.1, 1.0),
        t_domain: FULL_T,
        phi: Box::new(|_, _| Deriv2::constant(1.0)),
        zeta: Box::new(|x, _| Deriv2 {
            v: x,
            dx: 1.0,
            dt: 0.0,
            dxx: 0.0,
        }),
    }
}

/// Builds the reduction recipe of a representative.
///
/// `params` supplies the representative's free constants by name; constants
/// the catalog fixes (like alpha = 1 in X1 + X3) may be omitted or must
/// match the fixed value.
pub fn recipe(
    case: &CaseId,
    label: RepLabel,
    params: &BTreeMap<String, f64>,
) -> Result<ReductionRecipe, ReductionError> {
    let family = case.family();
    if family == CaseFamily::Generic {
        return Err(ReductionError::NoCatalog { case: case.label() });
    }
    let parts = match (family, label) {
        (CaseFamily::A, RepLabel::X2X4X5) => build_a_x2x4x5(params)?,
        (CaseFamily::A, RepLabel::X1X2X4) => build_a_x1x2x4(params)?,
        (CaseFamily::A, RepLabel::X1X3) => build_a_x1x3(params)?,
        (CaseFamily::A, RepLabel::X1) => identity_parts(ODE_A_X1, rat(7, 3)),
        (CaseFamily::B, RepLabel::X1X4) => build_b_x1x4(params)?,
        (CaseFamily::B, RepLabel::X1X3) => build_b_x1x3(params)?,
        (CaseFamily::B, RepLabel::X1) => identity_parts(ODE_B_X1, rat(3, 1)),
        (CaseFamily::C, _) => build_c(case, label, params)?,
        _ => {
            return Err(ReductionError::UnknownRepresentative {
                case: case.label(),
                label: label.as_str().to_string(),
            })
        }
    };
    Ok(ReductionRecipe {
        case: case.clone(),
        label,
        params: parts.params,
        theta: theta_for(case),
        aux: parts.aux,
        ode: parts.ode,
        residual_power: parts.residual_power,
        phi_text: parts.phi_text,
        zeta_text: parts.zeta_text,
        x_range: parts.x_range,
        t_range: parts.t_range,
        t_domain: parts.t_domain,
        phi: parts.phi,
        zeta: parts.zeta,
    })
}

fn build_a_x2x4x5(params: &BTreeMap<String, f64>) -> Result<Parts, ReductionError> {
    let label = RepLabel::X2X4X5.as_str();
    let beta = need(params, label, "beta")?;
    let gamma = need(params, label, "gamma")?;
    if beta <= 0.0 {
        return Err(ReductionError::ConstraintViolation(format!(
            "'{label}' needs beta > 0 for sqrt(beta) to be real (beta = {beta})"
        )));
    }
    if gamma == 0.0 {
        return Err(ReductionError::ConstraintViolation(format!(
            "'{label}' needs gamma != 0: zeta carries a 1/gamma term"
        )));
    }
    let sb = beta.sqrt();
    let phi: Field2 = Box::new(move |x, t| {
        let et = t.exp();
        let w = et * x / sb;
        let a1 = 1.0 + w * w;
        let wx = et / sb;
        let g = (1.5 * t).exp();
        let a25 = a1.powf(-2.5);
        Deriv2 {
            v: g * a1.powf(-1.5),
            dx: -3.0 * g * a25 * w * wx,
            dt: 1.5 * g * a1.powf(-1.5) - 3.0 * g * a25 * w * w,
            dxx: g * (15.0 * a1.powf(-3.5) * w * w - 3.0 * a25) * wx * wx,
        }
    });
    let zeta: Field2 = Box::new(move |x, t| {
        let et = t.exp();
        let w = et * x / sb;
        let a1 = 1.0 + w * w;
        let wx = et / sb;
        Deriv2 {
            v: sb * t / gamma + w.atan(),
            dx: wx / a1,
            dt: sb / gamma + w / a1,
            dxx: -2.0 * w * wx * wx / (a1 * a1),
        }
    });
    Ok(Parts {
        params: pmap(&[("beta", beta), ("gamma", gamma)]),
        aux: BTreeMap::new(),
        ode: ode(ODE_A_X2X4X5),
        residual_power: rat(7, 3),
        phi_text: "exp(3*t/2) * (1 + x^2*exp(2*t)/beta)^(-3/2)".into(),
        zeta_text: "sqrt(beta)*t/gamma + arctan(x*exp(t)/sqrt(beta))".into(),
        x_range: (0.2, 1.2),
        t_range: (0.1, 1.0),
        t_domain: FULL_T,
        phi,
        zeta,
    })
}

fn build_a_x1x2x4(params: &BTreeMap<String, f64>) -> Result<Parts, ReductionError> {
    let label = RepLabel::X1X2X4.as_str();
    let alpha = need(params, label, "alpha")?;
    let beta = need(params, label, "beta")?;
    if alpha == 0.0 {
        return Err(ReductionError::ConstraintViolation(format!(
            "'{label}' needs alpha != 0; the alpha = 0 stratum belongs to '{}'",
            RepLabel::X2X4X5.as_str()
        )));
    }
    let disc = alpha * alpha - 4.0 * beta;
    if disc <= 0.0 {
        return Err(ReductionError::ConstraintViolation(format!(
            "'{label}' needs alpha^2 - 4 beta > 0 (got {disc}): omega = sqrt(1 - 4 beta/alpha^2) \
             must be real and nonzero"
        )));
    }
    let om = (1.0 - 4.0 * beta / (alpha * alpha)).sqrt();
    let k = 8.0 * alpha.powi(3) * om.powi(3);
    let c1 = 1.5 * (1.0 - om);
    let phi: Field2 = Box::new(move |x, t| {
        let et = t.exp();
        let g = (c1 * t).exp();
        let d = 2.0 * et * x + alpha * (1.0 + om);
        let d_x = 2.0 * et;
        let d_t = 2.0 * et * x;
        Deriv2 {
            v: k * g * d.powi(-3),
            dx: -3.0 * k * g * d.powi(-4) * d_x,
            dt: k * g * (c1 * d.powi(-3) - 3.0 * d.powi(-4) * d_t),
            dxx: 12.0 * k * g * d.powi(-5) * d_x * d_x,
        }
    });
    let zeta: Field2 = Box::new(move |x, t| {
        let et = t.exp();
        let d = 2.0 * et * x + alpha * (1.0 + om);
        let n = alpha * (om - 1.0) - 2.0 * et * x;
        let n_x = -2.0 * et;
        let n_t = -2.0 * et * x;
        let ew = (om * t).exp();
        let g = om * ew * d;
        let g_x = om * ew * 2.0 * et;
        let g_t = om * om * ew * d + om * ew * 2.0 * et * x;
        Deriv2 {
            v: n / g,
            dx: n_x / g - n * g_x / (g * g),
            dt: n_t / g - n * g_t / (g * g),
            dxx: -2.0 * n_x * g_x / (g * g) + 2.0 * n * g_x * g_x / (g * g * g),
        }
    });
    // Keep the denominator D = 2 e^t x + alpha (1 + omega) on the side that
    // makes Phi positive: any x > 0 when alpha > 0, and x below the root of
    // D for alpha < 0.
    let x_range = if alpha > 0.0 {
        (0.1, 1.2)
    } else {
        let b = alpha.abs() * (1.0 + om) * (-1.0f64).exp() / 2.0;
        (0.05 * b, 0.8 * b)
    };
    Ok(Parts {
        params: pmap(&[("alpha", alpha), ("beta", beta)]),
        aux: pmap(&[
            ("omega", om),
            ("rho", 9.0 * alpha * alpha * om.powi(4) * (3.0 * om - 1.0)),
        ]),
        ode: ode(ODE_A_X1X2X4),
        residual_power: rat(7, 3),
        phi_text: "8*alpha^3*omega^3 * exp(3*(1 - omega)*t/2) / (2*exp(t)*x + alpha*(1 + omega))^3"
            .into(),
        zeta_text: "(alpha*(omega - 1) - 2*exp(t)*x) \
                    / (omega * (2*exp(t)*x + alpha*(1 + omega)) * exp(omega*t))"
            .into(),
        x_range,
        t_range: (0.1, 1.0),
        t_domain: FULL_T,
        phi,
        zeta,
    })
}

fn check_fixed_alpha(
    params: &BTreeMap<String, f64>,
    label: &'static str,
) -> Result<(), ReductionError> {
    if let Some(a) = params.get("alpha") {
        if *a != 1.0 {
            return Err(ReductionError::ConstraintViolation(format!(
                "the catalog lists '{label}' at alpha = 1 only (got alpha = {a})"
            )));
        }
    }
    Ok(())
}

fn build_a_x1x3(params: &BTreeMap<String, f64>) -> Result<Parts, ReductionError> {
    check_fixed_alpha(params, RepLabel::X1X3.as_str())?;
    let phi: Field2 = Box::new(|_, t| {
        let e23 = (2.0 * t / 3.0).exp();
        let s = e23 - 1.0;
        let v = t.exp() * s.powf(-1.5);
        Deriv2 {
            v,
            dx: 0.0,
            dt: v - t.exp() * s.powf(-2.5) * e23,
            dxx: 0.0,
        }
    });
    let zeta: Field2 = Box::new(|x, t| {
        let e23 = (2.0 * t / 3.0).exp();
        let s = e23 - 1.0;
        let v = t.exp() * s.powf(-1.5);
        let vt = v - t.exp() * s.powf(-2.5) * e23;
        Deriv2 {
            v: x * v,
            dx: v,
            dt: x * vt,
            dxx: 0.0,
        }
    });
    Ok(Parts {
        params: pmap(&[("alpha", 1.0)]),
        aux: BTreeMap::new(),
        ode: ode(ODE_A_X1),
        residual_power: rat(7, 3),
        phi_text: "exp(t) * (exp(2*t/3) - 1)^(-3/2)".into(),
        zeta_text: "x * exp(t) * (exp(2*t/3) - 1)^(-3/2)".into(),
        x_range: (0.2, 1.2),
        t_range: (0.2, 1.2),
        t_domain: (0.0, f64::INFINITY),
        phi,
        zeta,
    })
}

fn build_b_x1x4(params: &BTreeMap<String, f64>) -> Result<Parts, ReductionError> {
    let alpha = need(params, RepLabel::X1X4.as_str(), "alpha")?;
    let ap = alpha + 0.5;
    let phi: Field2 = Box::new(move |_, t| {
        let p = t - alpha;
        let v = t.exp() * p.powf(ap);
        Deriv2 {
            v,
            dx: 0.0,
            dt: v * (1.0 + ap / p),
            dxx: 0.0,
        }
    });
    let zeta: Field2 = Box::new(move |x, t| {
        let p = t - alpha;
        let s = t.exp() * p.powf(alpha);
        Deriv2 {
            v: s * x,
            dx: s,
            dt: s * x * (1.0 + alpha / p),
            dxx: 0.0,
        }
    });
    Ok(Parts {
        params: pmap(&[("alpha", alpha)]),
        aux: BTreeMap::new(),
        ode: ode(ODE_B_X1X4),
        residual_power: rat(3, 1),
        phi_text: "exp(t) * (t - alpha)^(alpha + 1/2)".into(),
        zeta_text: "x * exp(t) * (t - alpha)^alpha".into(),
        x_range: (0.2, 1.2),
        t_range: (alpha + 0.3, alpha + 1.1),
        t_domain: (alpha, f64::INFINITY),
        phi,
        zeta,
    })
}

fn build_b_x1x3(params: &BTreeMap<String, f64>) -> Result<Parts, ReductionError> {
    let alpha = need(params, RepLabel::X1X3.as_str(), "alpha")?;
    if alpha == 1.0 {
        return Err(ReductionError::ConstraintViolation(
            "alpha = 1 makes the ansatz exponent 1/(1 - alpha) singular".into(),
        ));
    }
    let c = 1.0 / (1.0 - alpha);
    let (phi, zeta) = exp_scaling_pair(c, c);
    Ok(Parts {
        params: pmap(&[("alpha", alpha)]),
        aux: BTreeMap::new(),
        ode: ode(ODE_B_X1X3),
        residual_power: rat(3, 1),
        phi_text: "exp(t/(1 - alpha))".into(),
        zeta_text: "x * exp(t/(1 - alpha))".into(),
        x_range: (0.2, 1.2),
        t_range: (0.1, 1.0),
        t_domain: FULL_T,
        phi,
        zeta,
    })
}

/// Phi = exp(a t) and zeta = x exp(b t), the shape shared by several
/// exponential-scaling ansatze.
fn exp_scaling_pair(a: f64, b: f64) -> (Field2, Field2) {
    let phi: Field2 = Box::new(move |_, t| {
        let v = (a * t).exp();
        Deriv2 {
            v,
            dx: 0.0,
            dt: a * v,
            dxx: 0.0,
        }
    });
    let zeta: Field2 = Box::new(move |x, t| {
        let e = (b * t).exp();
        Deriv2 {
            v: x * e,
            dx: e,
            dt: b * x * e,
            dxx: 0.0,
        }
    });
    (phi, zeta)
}

/// Phi = exp(t) (exp(q t) - 1)^(-1/q) and zeta = x Phi, the shape of the
/// X1 + X3 ansatz in the four-generator cases. Real for t of the sign of q.
fn root_decay_pair(q: f64) -> (Field2, Field2, (f64, f64), (f64, f64)) {
    let phi_of = move |t: f64| {
        let eq = (q * t).exp();
        let s = eq - 1.0;
        let v = t.exp() * s.powf(-1.0 / q);
        let vt = v * (1.0 - eq / s);
        (v, vt)
    };
    let phi: Field2 = Box::new(move |_, t| {
        let (v, vt) = phi_of(t);
        Deriv2 {
            v,
            dx: 0.0,
            dt: vt,
            dxx: 0.0,
        }
    });
    let zeta: Field2 = Box::new(move |x, t| {
        let (v, vt) = phi_of(t);
        Deriv2 {
            v: x * v,
            dx: v,
            dt: x * vt,
            dxx: 0.0,
        }
    });
    let t_range = if q > 0.0 { (0.2, 1.0) } else { (-1.0, -0.2) };
    let t_domain = if q > 0.0 {
        (0.0, f64::INFINITY)
    } else {
        (f64::NEG_INFINITY, 0.0)
    };
    (phi, zeta, t_range, t_domain)
}

fn build_c(
    case: &CaseId,
    label: RepLabel,
    params: &BTreeMap<String, f64>,
) -> Result<Parts, ReductionError> {
    let Some(part) = case.part() else {
        return Err(ReductionError::AmbiguousLine);
    };
    let d_table = rat_to_f64(&case.delta_value().expect("case C carries delta"));
    match part {
        Part::I | Part::II => build_c3(d_table, label, params, case),
        Part::III | Part::IV => build_c4(d_table + 0.5, label, params, case),
    }
}

fn build_c3(
    delta: f64,
    label: RepLabel,
    params: &BTreeMap<String, f64>,
    case: &CaseId,
) -> Result<Parts, ReductionError> {
    match label {
        RepLabel::X1X4 => {
            let alpha = need(params, RepLabel::X1X4.as_str(), "alpha")?;
            if alpha == 1.0 {
                return Err(ReductionError::ConstraintViolation(
                    "alpha = 1 makes the ansatz exponents 1/(alpha - 1) singular".into(),
                ));
            }
            let (phi, zeta) =
                exp_scaling_pair(1.0 / (delta * (alpha - 1.0)), 1.0 / (1.0 - alpha));
            Ok(Parts {
                params: pmap(&[("alpha", alpha)]),
                aux: pmap(&[
                    ("delta", delta),
                    ("omega", (alpha - 1.0) * (1.0 + 2.0 * delta)),
                    ("lambda", 1.0 + delta * (1.0 - alpha)),
                ]),
                ode: ode(ODE_C3_X1X4),
                residual_power: rat(1, 1),
                phi_text: "exp(t/(delta*(alpha - 1)))".into(),
                zeta_text: "x * exp(t/(1 - alpha))".into(),
                x_range: (0.2, 1.2),
                t_range: (0.1, 1.0),
                t_domain: FULL_T,
                phi,
                zeta,
            })
        }
        RepLabel::X1X3 => {
            check_fixed_alpha(params, RepLabel::X1X3.as_str())?;
            let (phi, zeta, t_range, t_domain) = root_decay_pair(2.0 * (1.0 + delta));
            Ok(Parts {
                params: pmap(&[("alpha", 1.0)]),
                aux: pmap(&[("delta", delta)]),
                ode: ode(ODE_C3_X1X3),
                residual_power: rat(1, 1),
                phi_text: "exp(t) * (exp(2*(1 + delta)*t) - 1)^(-1/(2*(1 + delta)))".into(),
                zeta_text: "x * exp(t) * (exp(2*(1 + delta)*t) - 1)^(-1/(2*(1 + delta)))".into(),
                x_range: (0.2, 1.2),
                t_range,
                t_domain,
                phi,
                zeta,
            })
        }
        RepLabel::X1 => {
            let mut parts = identity_parts(ODE_C3_X1, rat(0, 1));
            parts.aux = pmap(&[("delta", delta)]);
            Ok(parts)
        }
        _ => Err(ReductionError::UnknownRepresentative {
            case: case.label(),
            label: label.as_str().to_string(),
        }),
    }
}

fn build_c4(
    delta: f64,
    label: RepLabel,
    params: &BTreeMap<String, f64>,
    case: &CaseId,
) -> Result<Parts, ReductionError> {
    let nu = 2.0 * delta - 1.0;
    match label {
        RepLabel::X1X4 => {
            let alpha = need(params, RepLabel::X1X4.as_str(), "alpha")?;
            if alpha == 1.0 {
                return Err(ReductionError::ConstraintViolation(
                    "alpha = 1 makes the ansatz exponents 1/(alpha - 1) singular".into(),
                ));
            }
            let (phi, zeta) =
                exp_scaling_pair(2.0 / (nu * (alpha - 1.0)), 1.0 / (1.0 - alpha));
            Ok(Parts {
                params: pmap(&[("alpha", alpha)]),
                aux: pmap(&[
                    ("delta", delta),
                    ("nu", nu),
                    ("mu", alpha / (alpha - 1.0)),
                    ("omega", 1.0 + 2.0 / ((1.0 - alpha) * nu)),
                ]),
                ode: ode(ODE_C4_X1X4),
                residual_power: rat(2, 1),
                phi_text: "exp(2*t/(nu*(alpha - 1)))".into(),
                zeta_text: "x * exp(t/(1 - alpha))".into(),
                x_range: (0.2, 1.2),
                t_range: (0.1, 1.0),
                t_domain: FULL_T,
                phi,
                zeta,
            })
        }
        RepLabel::X1X3 => {
            check_fixed_alpha(params, RepLabel::X1X3.as_str())?;
            let (phi, zeta, t_range, t_domain) = root_decay_pair(1.0 + 2.0 * delta);
            Ok(Parts {
                params: pmap(&[("alpha", 1.0)]),
                aux: pmap(&[("delta", delta), ("rho", 1.0 - 2.0 * delta)]),
                ode: ode(ODE_C4_X1X3),
                residual_power: rat(2, 1),
                phi_text: "exp(t) * (exp((1 + 2*delta)*t) - 1)^(-1/(1 + 2*delta))".into(),
                zeta_text: "x * exp(t) * (exp((1 + 2*delta)*t) - 1)^(-1/(1 + 2*delta))".into(),
                x_range: (0.2, 1.2),
                t_range,
                t_domain,
                phi,
                zeta,
            })
        }
        RepLabel::X1 => {
            let mut parts = identity_parts(ODE_C4_X1X3, rat(2, 1));
            parts.aux = pmap(&[("delta", delta), ("rho", 1.0 - 2.0 * delta)]);
            Ok(parts)
        }
        _ => Err(ReductionError::UnknownRepresentative {
            case: case.label(),
            label: label.as_str().to_string(),
        }),
    }
}

/// A smooth positive profile with exact first and second derivatives,
/// used to probe reductions.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    eval: fn(f64) -> (f64, f64, f64),
}

impl TestFunction {
    /// (y, y', y'') at the given zeta.
    pub fn eval(&self, zeta: f64) -> (f64, f64, f64) {
        (self.eval)(zeta)
    }
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFunction({})", self.name)
    }
}

/// Three globally positive profiles with linearly independent jet behavior.
pub fn standard_test_functions() -> Vec<TestFunction> {
    vec![
        TestFunction {
            name: "2 + sin(z)/2",
            eval: |z| (2.0 + z.sin() / 2.0, z.cos() / 2.0, -z.sin() / 2.0),
        },
        TestFunction {
            name: "3/2 + 1/(1 + z^2)",
            eval: |z| {
                let a = 1.0 + z * z;
                (
                    1.5 + 1.0 / a,
                    -2.0 * z / (a * a),
                    (6.0 * z * z - 2.0) / (a * a * a),
                )
            },
        },
        TestFunction {
            name: "2 + arctan(z)/2",
            eval: |z| {
                let a = 1.0 + z * z;
                (2.0 + z.atan() / 2.0, 0.5 / a, -z / (a * a))
            },
        },
    ]
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Recipe(#[from] ReductionError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("{0} does not pin (r, k); verification needs a concrete equation line")]
    NoConcreteEquation(String),
    #[error("need at least two test functions to compare the multiplier across them")]
    NeedTwoTestFunctions,
    #[error("test function '{name}' is not positive at zeta = {zeta} (value {value})")]
    NonPositiveTestFunction {
        name: &'static str,
        zeta: f64,
        value: f64,
    },
    #[error("the reduced equation vanished at every sampled point; use different test functions")]
    DegenerateOde,
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error("stationary substitution for {case} does not reproduce the catalog equation ({verdict})")]
    SymbolicMismatch { case: String, verdict: String },
}

/// Outcome of a numeric reduction check.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub case: String,
    pub representative: &'static str,
    pub params: BTreeMap<String, f64>,
    pub omega: f64,
    pub test_functions: Vec<&'static str>,
    /// Grid points where at least two test functions gave a usable ratio.
    pub points: usize,
    /// (point, test function) pairs skipped because the equation nearly
    /// vanished there.
    pub skipped: usize,
    /// Residual-to-equation ratio at the first usable point.
    pub multiplier_at_reference: f64,
    /// Largest relative disagreement of the ratio across test functions.
    pub max_spread: f64,
    pub spread_tolerance: f64,
    /// Largest scaled residual of the invariant-surface identities.
    pub isc_max: f64,
    pub isc_tolerance: f64,
    pub certified: bool,
}

impl ReductionReport {
    pub fn isc_ok(&self) -> bool {
        self.isc_max < self.isc_tolerance
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "case": self.case,
            "representative": self.representative,
            "params": self.params,
            "omega": self.omega,
            "test_functions": self.test_functions,
            "points": self.points,
            "skipped": self.skipped,
            "multiplier_at_reference": self.multiplier_at_reference,
            "max_spread": self.max_spread,
            "spread_tolerance": self.spread_tolerance,
            "isc_max": self.isc_max,
            "isc_tolerance": self.isc_tolerance,
            "certified": self.certified,
        })
    }
}

impl fmt::Display for ReductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "reduction check: {}, representative {}",
            self.case, self.representative
        )?;
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        writeln!(
            f,
            "  params: {}; Omega = {}",
            if params.is_empty() {
                "none".to_string()
            } else {
                params.join(", ")
            },
            self.omega
        )?;
        writeln!(
            f,
            "  grid: {} usable points, {} skipped pairs, test functions: {}",
            self.points,
            self.skipped,
            self.test_functions.join(" | ")
        )?;
        writeln!(
            f,
            "  multiplier at reference point: {:.6e}",
            self.multiplier_at_reference
        )?;
        writeln!(
            f,
            "  max ratio spread across test functions: {:.3e} (tolerance {:.0e})",
            self.max_spread, self.spread_tolerance
        )?;
        writeln!(
            f,
            "  invariant-surface residual: {:.3e} (tolerance {:.0e})",
            self.isc_max, self.isc_tolerance
        )?;
        write!(
            f,
            "  verdict: {}",
            if self.certified && self.isc_ok() {
                "CERTIFIED"
            } else {
                "NOT CERTIFIED"
            }
        )
    }
}

/// Sum of the magnitudes of the equation's top-level terms at a point, used
/// to judge whether a small value means cancellation.
fn term_magnitude(e: &Expr, binds: &NumBindings) -> f64 {
    match e.kind() {
        ExprKind::Sum(ts) => ts
            .iter()
            .map(|t| t.eval(binds).map(f64::abs).unwrap_or(0.0))
            .sum(),
        _ => e.eval(binds).map(f64::abs).unwrap_or(0.0),
    }
}

const SPREAD_TOL: f64 = 1e-8;
const ISC_TOL: f64 = 1e-9;

/// Substitutes u = Phi * y(zeta) into the PDE on a sampling grid and checks
/// that the residual is a test-function-free multiple of the catalog
/// equation (times y^(-p)).
///
/// At least two test functions are required: the certificate is that the
/// pointwise ratio residual/equation agrees across them.
pub fn verify_reduction(
    case: &CaseId,
    label: RepLabel,
    params: &BTreeMap<String, f64>,
    testfns: &[TestFunction],
    omega: f64,
) -> Result<ReductionReport, VerifyError> {
    if testfns.len() < 2 {
        return Err(VerifyError::NeedTwoTestFunctions);
    }
    let (r, k) = case
        .rk()
        .ok_or_else(|| VerifyError::NoConcreteEquation(case.label()))?;
    let pde = make_pde(r, k, omega)?;
    let rec = recipe(case, label, params)?;
    let lam = pde.lambda();
    let lam1 = lam.diff(&Var::u());
    let lam2 = lam1.diff(&Var::u());
    let p_exp = rat_to_f64(&rec.residual_power);

    let cat = generators(case);
    let coeffs = label.template_coeffs(&rec.params, cat.basis.len());
    let eval_err = |e: crate::symexpr::EvalError| VerifyError::Eval(e.to_string());

    let ode_base = rec.ode_bindings(omega);
    let (nx, nt) = (6usize, 5usize);
    let mut points = 0usize;
    let mut skipped = 0usize;
    let mut max_spread = 0.0f64;
    let mut isc_max = 0.0f64;
    let mut reference = None;
    for it in 0..nt {
        let t = rec.t_range.0
            + (rec.t_range.1 - rec.t_range.0) * (it as f64 + 0.5) / nt as f64;
        for ix in 0..nx {
            let x = rec.x_range.0
                + (rec.x_range.1 - rec.x_range.0) * (ix as f64 + 0.5) / nx as f64;
            let pd = rec.phi_at(x, t);
            let zd = rec.zeta_at(x, t);

            // Invariant-surface identities of the generating field.
            let mut nb = NumBindings::new();
            nb.insert(Var::x(), x);
            nb.insert(Var::t(), t);
            nb.insert(Var::u(), 1.0);
            let (mut xi, mut tau, mut h) = (0.0f64, 0.0f64, 0.0f64);
            for (a, f) in coeffs.iter().zip(&cat.basis) {
                if *a == 0.0 {
                    continue;
                }
                xi += a * f.xi.eval(&nb).map_err(eval_err)?;
                tau += a * f.tau.eval(&nb).map_err(eval_err)?;
                h += a * f.eta.eval(&nb).map_err(eval_err)?;
            }
            let c1 = xi * zd.dx + tau * zd.dt;
            let s1 = (xi * zd.dx).abs().max((tau * zd.dt).abs()).max(1e-30);
            let c2 = h * pd.v - xi * pd.dx - tau * pd.dt;
            let s2 = (h * pd.v)
                .abs()
                .max((xi * pd.dx).abs())
                .max((tau * pd.dt).abs())
                .max(1e-30);
            isc_max = isc_max.max((c1 / s1).abs()).max((c2 / s2).abs());

            let mut ratios: Vec<f64> = Vec::with_capacity(testfns.len());
            for tf in testfns {
                let (y, yp, ypp) = tf.eval(zd.v);
                if y <= 0.0 {
                    return Err(VerifyError::NonPositiveTestFunction {
                        name: tf.name,
                        zeta: zd.v,
                        value: y,
                    });
                }
                let u = pd.v * y;
                let ux = pd.dx * y + pd.v * yp * zd.dx;
                let ut = pd.dt * y + pd.v * yp * zd.dt;
                let uxx = pd.dxx * y
                    + 2.0 * pd.dx * yp * zd.dx
                    + pd.v * ypp * zd.dx * zd.dx
                    + pd.v * yp * zd.dxx;
                let mut ub = NumBindings::new();
                ub.insert(Var::u(), u);
                let l1 = lam1.eval(&ub).map_err(eval_err)?;
                let l2 = lam2.eval(&ub).map_err(eval_err)?;
                let resid = ut - u - x * ux - omega * (l2 * ux * ux + l1 * uxx);

                let mut ob = ode_base.clone();
                ob.insert(Var::sym("zeta"), zd.v);
                ob.insert(Var::sym("y"), y);
                ob.insert(Var::sym("yp"), yp);
                ob.insert(Var::sym("ypp"), ypp);
                let e_val = rec.ode.eval(&ob).map_err(eval_err)?;
                let e_scale = term_magnitude(&rec.ode, &ob);
                if e_val.abs() < 1e-6 * e_scale.max(1e-300) {
                    skipped += 1;
                    continue;
                }
                ratios.push(resid * y.powf(p_exp) / e_val);
            }
            if ratios.len() >= 2 {
                points += 1;
                let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                let scale = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs())).max(1e-300);
                max_spread = max_spread.max((hi - lo) / scale);
                if reference.is_none() {
                    reference = Some(ratios[0]);
                }
            }
        }
    }
    let Some(multiplier) = reference else {
        return Err(VerifyError::DegenerateOde);
    };
    Ok(ReductionReport {
        case: case.label(),
        representative: rec.label.as_str(),
        params: rec.params.clone(),
        omega,
        test_functions: testfns.iter().map(|t| t.name).collect(),
        points,
        skipped,
        multiplier_at_reference: multiplier,
        max_spread,
        spread_tolerance: SPREAD_TOL,
        isc_max,
        isc_tolerance: ISC_TOL,
        certified: max_spread < SPREAD_TOL,
    })
}

/// The exact residual-to-equation multiplier of the stationary (X1)
/// representative under the convention R = u_t - (x u)_x - Omega Lambda_xx.
pub fn stationary_multiplier(case: &CaseId) -> Rat {
    match case.family() {
        CaseFamily::A => rat(-1, 9),
        CaseFamily::B => rat(1, 1),
        _ => rat(-1, 1),
    }
}

/// Substitutes u = y(x) into the PDE symbolically and checks that the
/// residual times y^p equals the frozen multiplier times the catalog
/// equation. Returns the multiplier on success.
pub fn verify_stationary_symbolic(case: &CaseId) -> Result<Rat, VerifyError> {
    let (r, k) = case
        .rk()
        .ok_or_else(|| VerifyError::NoConcreteEquation(case.label()))?;
    let pde = make_pde(r, k, 1.0)?;
    let rec = recipe(case, RepLabel::X1, &BTreeMap::new())?;
    let jets_err = |e: crate::jets::JetsError| VerifyError::Eval(e.to_string());
    let lam_xx = total_x(&total_x(&pde.lambda()).map_err(jets_err)?).map_err(jets_err)?;
    let omega = Expr::symbol("Omega");
    let r_sym = Expr::zero()
        - total_x(&(Expr::x() * Expr::u())).map_err(jets_err)?
        - omega * lam_xx;

    let mut b = Bindings::new();
    b.insert(Var::sym("zeta"), Expr::x());
    b.insert(Var::sym("y"), Expr::u());
    b.insert(Var::sym("yp"), Expr::jet(1, 0));
    b.insert(Var::sym("ypp"), Expr::jet(2, 0));
    b.insert(Var::sym("theta"), Expr::rational(theta_for(case)));
    if case.family() == CaseFamily::C {
        let d_table = case.delta_value().expect("case C carries delta");
        let d = match case.part().expect("recipe() enforced the part") {
            Part::I | Part::II => d_table,
            Part::III | Part::IV => d_table + rat(1, 2),
        };
        b.insert(
            Var::sym("rho"),
            Expr::rational(Rat::from_integer(1.into()) - rat(2, 1) * d.clone()),
        );
        b.insert(Var::sym("delta"), Expr::rational(d));
    }
    let e_sym = rec.ode.substitute(&b);
    let lhs = r_sym * Expr::pow(Expr::u(), Expr::rational(rec.residual_power.clone()));
    let m = stationary_multiplier(case);
    let rhs = Expr::rational(m.clone()) * e_sym;
    match equivalent(&lhs, &rhs) {
        Verdict::Syntactic | Verdict::Probabilistic => Ok(m),
        v => Err(VerifyError::SymbolicMismatch {
            case: case.label(),
            verdict: format!("{v:?}"),
        }),
    }
}

/// The two functionally independent invariants of a cataloged field:
/// zeta(x, t) and v = u / Phi(x, t).
pub struct Invariants {
    /// Which catalog entry the field matched.
    pub matched: String,
    zeta: Field2,
    phi: Field2,
}

impl Invariants {
    pub fn zeta_at(&self, x: f64, t: f64) -> Deriv2 {
        (self.zeta)(x, t)
    }

    pub fn phi_at(&self, x: f64, t: f64) -> Deriv2 {
        (self.phi)(x, t)
    }

    pub fn v_at(&self, x: f64, t: f64, u: f64) -> f64 {
        u / (self.phi)(x, t).v
    }
}

impl fmt::Debug for Invariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Invariants({})", self.matched)
    }
}

/// Finds the invariants of one of the cataloged fields: X1, X2, or a
/// representative of the case's optimal system, with parameters read off the
/// exact basis expansion.
pub fn invariants_of(case: &CaseId, vf: &crate::jets::VectorField) -> Result<Invariants, ReductionError> {
    let cat = generators(case);
    let coeffs = expand_in_basis(vf, &cat.basis)?;
    let describe = || combo_rat(&coeffs);
    let nonzero: Vec<usize> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, _)| i)
        .collect();
    match nonzero.as_slice() {
        [] => Err(ReductionError::FieldNotCatalogued("the zero field".into())),
        [0] => Ok(Invariants {
            matched: "X1".into(),
            zeta: Box::new(|x, _| Deriv2 {
                v: x,
                dx: 1.0,
                dt: 0.0,
                dxx: 0.0,
            }),
            phi: Box::new(|_, _| Deriv2::constant(1.0)),
        }),
        [1] => Ok(Invariants {
            matched: "X2".into(),
            zeta: Box::new(|_, t| Deriv2 {
                v: t,
                dx: 0.0,
                dt: 1.0,
                dxx: 0.0,
            }),
            phi: Box::new(|_, _| Deriv2::constant(1.0)),
        }),
        _ => {
            let q = |i: usize, anchor: usize| rat_to_f64(&(coeffs[i].clone() / coeffs[anchor].clone()));
            let (label, params) = match case.family() {
                CaseFamily::A => {
                    if !coeffs[2].is_zero() {
                        // An X3 component only matches the X1 + X3 entry.
                        if nonzero == [0, 2] && coeffs[0] == coeffs[2] {
                            (RepLabel::X1X3, pmap(&[("alpha", 1.0)]))
                        } else {
                            return Err(ReductionError::FieldNotCatalogued(describe()));
                        }
                    } else if !coeffs[3].is_zero() {
                        if coeffs[4].is_zero()
                            && !coeffs[0].is_zero()
                        {
                            (
                                RepLabel::X1X2X4,
                                pmap(&[("alpha", q(0, 3)), ("beta", q(1, 3))]),
                            )
                        } else if coeffs[0].is_zero() {
                            (
                                RepLabel::X2X4X5,
                                pmap(&[("beta", q(1, 3)), ("gamma", q(4, 3))]),
                            )
                        } else {
                            return Err(ReductionError::FieldNotCatalogued(describe()));
                        }
                    } else {
                        return Err(ReductionError::FieldNotCatalogued(describe()));
                    }
                }
                CaseFamily::B | CaseFamily::C => {
                    if !coeffs[1].is_zero() {
                        return Err(ReductionError::FieldNotCatalogued(describe()));
                    }
                    if !coeffs[3].is_zero() {
                        if !coeffs[2].is_zero() {
                            return Err(ReductionError::FieldNotCatalogued(describe()));
                        }
                        (RepLabel::X1X4, pmap(&[("alpha", q(0, 3))]))
                    } else if !coeffs[2].is_zero() {
                        (RepLabel::X1X3, pmap(&[("alpha", q(0, 2))]))
                    } else {
                        return Err(ReductionError::FieldNotCatalogued(describe()));
                    }
                }
                CaseFamily::Generic => {
                    return Err(ReductionError::NoCatalog { case: case.label() })
                }
            };
            let rec = recipe(case, label, &params)?;
            Ok(Invariants {
                matched: format!("{}: {}", case.label(), label.as_str()),
                zeta: rec.zeta,
                phi: rec.phi,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a_case(part: Part) -> CaseId {
        CaseId::ab(CaseFamily::A, part)
    }

    fn b_case(part: Part) -> CaseId {
        CaseId::ab(CaseFamily::B, part)
    }

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pmap(kv)
    }

    #[test]
    fn recipe_domain_errors() {
        let a = a_case(Part::I);
        match recipe(&a, RepLabel::X1X2X4, &params(&[("alpha", 1.0), ("beta", 1.0)])) {
            Err(ReductionError::ConstraintViolation(msg)) => {
                assert!(msg.contains("alpha^2 - 4 beta"), "{msg}")
            }
            other => panic!("expected constraint violation, got {other:?}"),
        }
        assert!(matches!(
            recipe(&a, RepLabel::X2X4X5, &params(&[("beta", -1.0), ("gamma", 1.0)])),
            Err(ReductionError::ConstraintViolation(_))
        ));
        assert!(matches!(
            recipe(&a, RepLabel::X2X4X5, &params(&[("beta", 1.0), ("gamma", 0.0)])),
            Err(ReductionError::ConstraintViolation(_))
        ));
        assert!(matches!(
            recipe(&a, RepLabel::X2X4X5, &params(&[("gamma", 1.0)])),
            Err(ReductionError::MissingParam { name: "beta", .. })
        ));
        assert!(matches!(
            recipe(&b_case(Part::I), RepLabel::X1X3, &params(&[("alpha", 1.0)])),
            Err(ReductionError::ConstraintViolation(_))
        ));
        assert!(matches!(
            recipe(&b_case(Part::I), RepLabel::X2X4X5, &params(&[])),
            Err(ReductionError::UnknownRepresentative { .. })
        ));
        assert!(matches!(
            recipe(&CaseId::c_delta(rat(1, 1)), RepLabel::X1, &params(&[])),
            Err(ReductionError::AmbiguousLine)
        ));
        assert!(matches!(
            recipe(&CaseId::generic(), RepLabel::X1, &params(&[])),
            Err(ReductionError::NoCatalog { .. })
        ));
    }

    #[test]
    fn theta_follows_the_part_table() {
        assert_eq!(theta_for(&a_case(Part::I)), rat(1, 1));
        assert_eq!(theta_for(&a_case(Part::III)), rat(4, 1));
        assert_eq!(theta_for(&b_case(Part::II)), rat(1, 1));
        assert_eq!(theta_for(&b_case(Part::IV)), rat(2, 1));
        assert_eq!(theta_for(&CaseId::c(Part::III, rat(1, 1))), rat(1, 1));
    }

    fn all_recipe_instances() -> Vec<(CaseId, RepLabel, BTreeMap<String, f64>)> {
        vec![
            (a_case(Part::I), RepLabel::X2X4X5, params(&[("beta", 2.25), ("gamma", 2.0)])),
            (a_case(Part::III), RepLabel::X2X4X5, params(&[("beta", 1.0), ("gamma", -0.5)])),
            (a_case(Part::I), RepLabel::X1X2X4, params(&[("alpha", 2.0), ("beta", 0.75)])),
            (a_case(Part::IV), RepLabel::X1X2X4, params(&[("alpha", -3.0), ("beta", -2.8125)])),
            (a_case(Part::I), RepLabel::X1X3, params(&[])),
            (a_case(Part::III), RepLabel::X1, params(&[])),
            (b_case(Part::I), RepLabel::X1X4, params(&[("alpha", 0.6)])),
            (b_case(Part::III), RepLabel::X1X4, params(&[("alpha", -2.0)])),
            (b_case(Part::I), RepLabel::X1X3, params(&[("alpha", 1.0 / 3.0)])),
            (b_case(Part::IV), RepLabel::X1X3, params(&[("alpha", 0.0)])),
            (b_case(Part::II), RepLabel::X1, params(&[])),
            (CaseId::c(Part::I, rat(1, 1)), RepLabel::X1X4, params(&[("alpha", 3.0)])),
            (CaseId::c(Part::II, rat(1, 3)), RepLabel::X1X4, params(&[("alpha", -0.5)])),
            (CaseId::c(Part::I, rat(1, 1)), RepLabel::X1X3, params(&[])),
            (CaseId::c(Part::I, rat(-3, 2)), RepLabel::X1X3, params(&[])),
            (CaseId::c(Part::II, rat(1, 3)), RepLabel::X1, params(&[])),
            (CaseId::c(Part::III, rat(1, 1)), RepLabel::X1X4, params(&[("alpha", 2.0)])),
            (CaseId::c(Part::IV, rat(-3, 4)), RepLabel::X1X4, params(&[("alpha", 0.5)])),
            (CaseId::c(Part::III, rat(1, 1)), RepLabel::X1X3, params(&[])),
            (CaseId::c(Part::III, rat(-3, 4)), RepLabel::X1X3, params(&[])),
            (CaseId::c(Part::IV, rat(1, 1)), RepLabel::X1, params(&[])),
        ]
    }

    #[test]
    fn evaluators_match_finite_differences() {
        let h = 1e-5;
        for (case, label, pars) in all_recipe_instances() {
            let rec = recipe(&case, label, &pars).unwrap();
            let tag = format!("{} {}", case.label(), label.as_str());
            for (field, name) in [(&rec.phi, "phi"), (&rec.zeta, "zeta")] {
                for (x, t) in [
                    (rec.x_range.0 * 0.7 + rec.x_range.1 * 0.3, rec.t_range.0 * 0.6 + rec.t_range.1 * 0.4),
                    (rec.x_range.0 * 0.2 + rec.x_range.1 * 0.8, rec.t_range.0 * 0.3 + rec.t_range.1 * 0.7),
                ] {
                    let d = field(x, t);
                    let fdx = (field(x + h, t).v - field(x - h, t).v) / (2.0 * h);
                    let fdt = (field(x, t + h).v - field(x, t - h).v) / (2.0 * h);
                    let fdxx = (field(x + h, t).v - 2.0 * d.v + field(x - h, t).v) / (h * h);
                    let tol = 1e-5 * d.v.abs().max(1.0);
                    assert!((d.dx - fdx).abs() < tol, "{tag} {name} dx: {} vs {fdx}", d.dx);
                    assert!((d.dt - fdt).abs() < tol, "{tag} {name} dt: {} vs {fdt}", d.dt);
                    let tolxx = 2e-4 * d.v.abs().max(1.0);
                    assert!((d.dxx - fdxx).abs() < tolxx, "{tag} {name} dxx: {} vs {fdxx}", d.dxx);
                }
            }
        }
    }

    #[test]
    fn all_thirteen_reductions_certify() {
        let fns = standard_test_functions();
        for (case, label, pars) in all_recipe_instances() {
            let report = verify_reduction(&case, label, &pars, &fns, 0.7)
                .unwrap_or_else(|e| panic!("{} {}: {e}", case.label(), label.as_str()));
            assert!(
                report.certified,
                "{} {}: spread {:.3e}\n{report}",
                case.label(),
                label.as_str(),
                report.max_spread
            );
            assert!(
                report.isc_ok(),
                "{} {}: isc {:.3e}",
                case.label(),
                label.as_str(),
                report.isc_max
            );
            assert!(report.points >= 20, "{}: only {} usable points", case.label(), report.points);
        }
    }

    #[test]
    fn stationary_reductions_match_symbolically() {
        let cases = [
            (a_case(Part::I), rat(-1, 9)),
            (a_case(Part::III), rat(-1, 9)),
            (b_case(Part::I), rat(1, 1)),
            (b_case(Part::IV), rat(1, 1)),
            (CaseId::c(Part::I, rat(1, 1)), rat(-1, 1)),
            (CaseId::c(Part::II, rat(1, 3)), rat(-1, 1)),
            (CaseId::c(Part::III, rat(1, 2)), rat(-1, 1)),
            (CaseId::c(Part::IV, rat(-3, 4)), rat(-1, 1)),
        ];
        for (case, want) in cases {
            let m = verify_stationary_symbolic(&case)
                .unwrap_or_else(|e| panic!("{}: {e}", case.label()));
            assert_eq!(m, want, "{}", case.label());
        }
    }

    #[test]
    fn lines_sharing_delta_share_the_reduced_equation() {
        let ci = CaseId::c(Part::I, rat(3, 4));
        let cii = CaseId::c(Part::II, rat(3, 4));
        let ri = recipe(&ci, RepLabel::X1, &params(&[])).unwrap();
        let rii = recipe(&cii, RepLabel::X1, &params(&[])).unwrap();
        assert_eq!(ri.ode, rii.ode);
        assert_eq!(ri.aux, rii.aux);
        let riii = recipe(&CaseId::c(Part::III, rat(-1, 4)), RepLabel::X1X3, &params(&[])).unwrap();
        let riv = recipe(&CaseId::c(Part::IV, rat(-1, 4)), RepLabel::X1X3, &params(&[])).unwrap();
        assert_eq!(riii.ode, riv.ode);
        assert_eq!(riii.aux, riv.aux);
        assert_eq!(riii.aux["delta"], 0.25);
    }

    #[test]
    fn equation_values_are_frozen() {
        // C parts (i)/(ii) stationary equation at delta = 1:
        // 3 Omega y (y y'' + 2 y'^2) + zeta y' + y.
        let rec = recipe(&CaseId::c(Part::I, rat(1, 1)), RepLabel::X1, &params(&[])).unwrap();
        let mut b = rec.ode_bindings(2.0);
        b.insert(Var::sym("zeta"), 0.5);
        b.insert(Var::sym("y"), 2.0);
        b.insert(Var::sym("yp"), 3.0);
        b.insert(Var::sym("ypp"), -1.0);
        assert_eq!(rec.ode.eval(&b).unwrap(), 195.5);

        // Four-generator stationary equation: theta Omega (y y'' - 2 y'^2)
        // - zeta y^3 y' - y^4 at theta = 1 gives -1 - 2 - 1.
        let rec = recipe(&b_case(Part::I), RepLabel::X1, &params(&[])).unwrap();
        let mut b = rec.ode_bindings(1.0);
        b.insert(Var::sym("zeta"), 2.0);
        b.insert(Var::sym("y"), 1.0);
        b.insert(Var::sym("yp"), 1.0);
        b.insert(Var::sym("ypp"), 1.0);
        assert_eq!(rec.ode.eval(&b).unwrap(), -4.0);

        // Five-generator stationary equation at theta = 1, yp = 0.
        let rec = recipe(&a_case(Part::I), RepLabel::X1, &params(&[])).unwrap();
        let mut b = rec.ode_bindings(1.0);
        b.insert(Var::sym("zeta"), 1.0);
        b.insert(Var::sym("y"), 1.0);
        b.insert(Var::sym("yp"), 0.0);
        b.insert(Var::sym("ypp"), 1.0);
        assert_eq!(rec.ode.eval(&b).unwrap(), 6.0);
    }

    #[test]
    fn second_derivative_solver_matches_the_equation() {
        let rec = recipe(&b_case(Part::I), RepLabel::X1X4, &params(&[("alpha", 0.6)])).unwrap();
        let (zeta, y, yp) = (0.8, 1.7, -0.4);
        let ypp = rec.ode_second_derivative(0.7, zeta, y, yp).unwrap();
        let mut b = rec.ode_bindings(0.7);
        b.insert(Var::sym("zeta"), zeta);
        b.insert(Var::sym("y"), y);
        b.insert(Var::sym("yp"), yp);
        b.insert(Var::sym("ypp"), ypp);
        assert!(rec.ode.eval(&b).unwrap().abs() < 1e-12);
        assert!(matches!(
            rec.ode_second_derivative(0.7, 0.8, -1.0, 0.0),
            Err(OdeRhsError::NonPositiveY { .. })
        ));
    }

    #[test]
    fn test_functions_are_positive_with_consistent_derivatives() {
        let h = 1e-6;
        for tf in standard_test_functions() {
            for i in -40..=40 {
                let z = i as f64 * 0.5;
                let (y, yp, ypp) = tf.eval(z);
                assert!(y > 0.0, "{} at {z}", tf.name);
                let (yl, ypl, _) = tf.eval(z - h);
                let (yr, ypr, _) = tf.eval(z + h);
                assert!(((yr - yl) / (2.0 * h) - yp).abs() < 1e-8, "{} yp at {z}", tf.name);
                assert!(((ypr - ypl) / (2.0 * h) - ypp).abs() < 1e-8, "{} ypp at {z}", tf.name);
            }
        }
    }

    #[test]
    fn verify_rejects_undetermined_or_underdetermined_input() {
        let fns = standard_test_functions();
        assert!(matches!(
            verify_reduction(&CaseId::c_delta(rat(1, 1)), RepLabel::X1, &params(&[]), &fns, 1.0),
            Err(VerifyError::NoConcreteEquation(_))
        ));
        assert!(matches!(
            verify_reduction(&b_case(Part::I), RepLabel::X1, &params(&[]), &fns[..1], 1.0),
            Err(VerifyError::NeedTwoTestFunctions)
        ));
    }

    #[test]
    fn invariants_of_catalog_fields() {
        let b = b_case(Part::II);
        let cat = generators(&b);
        let x1 = &cat.basis[0];
        let inv = invariants_of(&b, x1).unwrap();
        assert_eq!(inv.matched, "X1");
        assert_eq!(inv.zeta_at(0.7, 0.3).v, 0.7);
        assert_eq!(inv.v_at(0.7, 0.3, 2.5), 2.5);

        let x2 = &cat.basis[1];
        let inv = invariants_of(&b, x2).unwrap();
        assert_eq!(inv.matched, "X2");
        assert_eq!(inv.zeta_at(0.7, 0.3).v, 0.3);

        // alpha X1 + X3 at alpha = 1/2: zeta = x e^{2t}, v = u e^{-2t}.
        let field = cat.basis[0].scaled(&rat(1, 2)).plus(&cat.basis[2]);
        let inv = invariants_of(&b, &field).unwrap();
        let (x, t, u) = (0.7, 0.3, 2.5);
        let z = inv.zeta_at(x, t);
        assert!((z.v - x * (2.0 * t).exp()).abs() < 1e-14);
        assert!((inv.v_at(x, t, u) - u * (-2.0 * t).exp()).abs() < 1e-14);
        // The field annihilates both invariants: xi zeta_x + tau zeta_t = 0
        // and eta_fac Phi - xi Phi_x - tau Phi_t = 0 with xi = x,
        // tau = alpha - 1, eta_fac = -1.
        let (xi, tau, eta_fac) = (x, 0.5 - 1.0, -1.0);
        assert!((xi * z.dx + tau * z.dt).abs() < 1e-13);
        let p = inv.phi_at(x, t);
        assert!((eta_fac * p.v - xi * p.dx - tau * p.dt).abs() < 1e-13);

        match invariants_of(&b, &cat.basis[1].plus(&cat.basis[2])) {
            Err(ReductionError::FieldNotCatalogued(desc)) => {
                assert!(desc.contains("X2"), "{desc}")
            }
            other => panic!("expected FieldNotCatalogued, got {other:?}"),
        }

        // A five-generator representative with parameters read off exactly.
        let a = a_case(Part::I);
        let cat = generators(&a);
        let field = cat.basis[1]
            .scaled(&rat(3, 1))
            .plus(&cat.basis[3].scaled(&rat(2, 1)))
            .plus(&cat.basis[4].scaled(&rat(-4, 1)));
        let inv = invariants_of(&a, &field).unwrap();
        let rec = recipe(&a, RepLabel::X2X4X5, &params(&[("beta", 1.5), ("gamma", -2.0)])).unwrap();
        let z1 = inv.zeta_at(0.9, 0.4);
        let z2 = rec.zeta_at(0.9, 0.4);
        assert!((z1.v - z2.v).abs() < 1e-14);
    }

    #[test]
    fn recipe_json_names_the_pieces() {
        let rec = recipe(
            &CaseId::c(Part::III, rat(1, 1)),
            RepLabel::X1X4,
            &params(&[("alpha", 2.0)]),
        )
        .unwrap();
        let j = rec.to_json();
        assert_eq!(j["case"], "C(iii)");
        assert_eq!(j["representative"], "alpha X1 + X4");
        assert_eq!(j["params"]["alpha"], 2.0);
        assert_eq!(j["aux"]["delta"], 1.5);
        assert_eq!(j["aux"]["nu"], 2.0);
        assert!(j["ode"].as_str().unwrap().contains("= 0"));
    }
}
