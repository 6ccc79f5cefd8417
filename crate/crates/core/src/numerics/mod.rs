//! Numerical machinery: integration of the reduced ODEs, sampled solution
//! grids, explicit time stepping of the PDE, and residual measurement.
//!
//! On boundaries: the evolution equation itself does not come with boundary
//! conditions, so `evolve_pde` picks the conservative closure and walls the
//! domain with zero-flux faces, making the cell mass sum exactly invariant
//! under the update. Residual checks take the field as given and need no
//! boundary choice, and grids built from reductions carry exact values up to
//! the edges.

mod evolve;
mod grid;
mod ode;
mod residual;

pub use evolve::{evolve_pde, EvolveError, EvolveOptions, EvolveReport};
pub use grid::{build_solution, BuildError, GridError, GridField};
pub use ode::{
    integrate_ode, OdeError, OdeProblem, OdeSolution, StopReason, DEFAULT_ABS_TOL, DEFAULT_REL_TOL,
};
pub use residual::{
    pde_residual, residual_convergence, residual_field, LevelNorms, ResidualError, ResidualReport,
};

use num_traits::One;

use crate::family::PdeInstance;
use crate::symexpr::{rat_to_f64, Rat};

/// Closed-form evaluator for the diffusion nonlinearity
/// Lambda(u) = a u^p + b u^q, precomputed from the line parameters.
///
/// This is the numeric fast path for grid sweeps; the symbolic form stays in
/// [`PdeInstance::lambda`] and the two are cross-checked in tests.
pub(crate) struct Nonlinearity {
    a: f64,
    p: f64,
    b: f64,
    q: f64,
}

impl Nonlinearity {
    pub(crate) fn of(pde: &PdeInstance) -> Self {
        let r = &pde.r;
        let k = &pde.k;
        let two_k = k + k;
        Nonlinearity {
            a: rat_to_f64(&((r + k) / &two_k)),
            p: rat_to_f64(&(Rat::one() + r + k)),
            b: rat_to_f64(&(-((r - k) / &two_k))),
            q: rat_to_f64(&(Rat::one() + r - k)),
        }
    }

    pub(crate) fn value(&self, u: f64) -> f64 {
        let mut v = 0.0;
        if self.a != 0.0 {
            v += self.a * u.powf(self.p);
        }
        if self.b != 0.0 {
            v += self.b * u.powf(self.q);
        }
        v
    }

    pub(crate) fn deriv(&self, u: f64) -> f64 {
        let mut v = 0.0;
        let ca = self.a * self.p;
        if ca != 0.0 {
            v += ca * u.powf(self.p - 1.0);
        }
        let cb = self.b * self.q;
        if cb != 0.0 {
            v += cb * u.powf(self.q - 1.0);
        }
        v
    }

    /// Whether any active power demands u > 0 to stay real and finite.
    pub(crate) fn needs_positive(&self) -> bool {
        let bad = |c: f64, e: f64| c != 0.0 && (e < 0.0 || e.fract() != 0.0);
        bad(self.a, self.p) || bad(self.b, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::make_pde;
    use crate::symexpr::{rat, NumBindings, Var};

    #[test]
    fn nonlinearity_matches_the_symbolic_form() {
        let lines = [
            (rat(1, 1), rat(1, 1)),
            (rat(-1, 1), rat(-1, 1)),
            (rat(-2, 3), rat(2, 3)),
            (rat(-7, 6), rat(1, 6)),
            (rat(-3, 2), rat(1, 2)),
        ];
        for (r, k) in lines {
            let pde = make_pde(r.clone(), k.clone(), 1.0).unwrap();
            let lam = Nonlinearity::of(&pde);
            let expr = pde.lambda();
            let dexpr = expr.diff(&Var::u());
            for u in [0.2, 0.7, 1.0, 1.9, 3.4] {
                let mut env = NumBindings::new();
                env.insert(Var::u(), u);
                let want = expr.eval(&env).unwrap();
                let got = lam.value(u);
                assert!(
                    (want - got).abs() <= 1e-13 * want.abs().max(1.0),
                    "Lambda({u}) for r={r} k={k}: {want} vs {got}"
                );
                let want_d = dexpr.eval(&env).unwrap();
                let got_d = lam.deriv(u);
                assert!(
                    (want_d - got_d).abs() <= 1e-12 * want_d.abs().max(1.0),
                    "Lambda'({u}) for r={r} k={k}: {want_d} vs {got_d}"
                );
            }
        }
    }

    #[test]
    fn positivity_requirement_tracks_the_exponents() {
        // u^3: integer nonnegative powers everywhere.
        let cubic = make_pde(rat(1, 1), rat(1, 1), 1.0).unwrap();
        assert!(!Nonlinearity::of(&cubic).needs_positive());
        // 1/u: negative power.
        let recip = make_pde(rat(-1, 1), rat(-1, 1), 1.0).unwrap();
        assert!(Nonlinearity::of(&recip).needs_positive());
        // Fractional powers.
        let frac = make_pde(rat(-2, 3), rat(2, 3), 1.0).unwrap();
        assert!(Nonlinearity::of(&frac).needs_positive());
    }
}
