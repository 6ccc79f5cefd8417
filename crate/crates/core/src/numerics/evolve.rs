//! Explicit finite-volume time stepping for the evolution equation.
//!
//! Cells are centered on a uniform grid and the update is the flux form of
//! u_t = (x u + Omega Lambda(u)_x)_x: face fluxes combine the averaged drift
//! x u with a centered difference of Lambda, and the two wall faces carry
//! zero flux, so the cell sum (times dx) is conserved to rounding. Stepping
//! is classical RK4 with the step size recomputed from the current state:
//! the parabolic bound cfl dx^2 / (Omega max|Lambda'(u)|) and the drift bound
//! cfl dx / max|x|. States must stay strictly positive; densities touching
//! zero or diverging stop the run with an error naming the time reached.
//!
//! Flux assembly is independent per face and the cell update independent per
//! cell, so both sweeps could be data-parallel; the stage loop itself is
//! inherently sequential and everything here runs serially.

use serde_json::json;
use thiserror::Error;

use crate::family::PdeInstance;
use crate::numerics::grid::{GridError, GridField};
use crate::numerics::Nonlinearity;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("need at least 5 cells, got {n}")]
    TooFewCells { n: usize },
    #[error("initial value {value} at cell {index} is not strictly positive")]
    NonPositiveInitial { index: usize, value: f64 },
    #[error("initial value at cell {index} is not finite")]
    NonFiniteInitial { index: usize },
    #[error("time span is empty or reversed: {t0} to {t1}")]
    EmptySpan { t0: f64, t1: f64 },
    #[error("x range is empty or reversed: {x0} to {x1}")]
    EmptyRange { x0: f64, x1: f64 },
    #[error("bad options: {0}")]
    BadOptions(String),
    #[error("density left the positive cone at t = {t}")]
    PositivityLoss { t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("stable step collapsed to dt = {dt} at t = {t}")]
    CflUnderflow { t: f64, dt: f64 },
    #[error("exceeded {max} steps at t = {t}")]
    TooManySteps { max: usize, t: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Number of saved time levels, endpoints included.
    pub n_saves: usize,
    /// Safety factor on both stability bounds, in (0, 1].
    pub cfl: f64,
    /// Hard cap on RK4 steps.
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            n_saves: 11,
            cfl: 0.4,
            max_steps: 20_000_000,
        }
    }
}

/// Outcome of a completed evolution run.
#[derive(Debug)]
pub struct EvolveReport {
    /// Saved levels at the requested times.
    pub field: GridField,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Cell sums times dx at the first and last level.
    pub mass_initial: f64,
    pub mass_final: f64,
    /// |final - initial| relative to the initial mass.
    pub mass_drift: f64,
}

impl EvolveReport {
    /// Summary without the field itself.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n_x": self.field.n_x(),
            "n_t": self.field.n_t(),
            "steps": self.steps,
            "dt_min": self.dt_min,
            "dt_max": self.dt_max,
            "mass_initial": self.mass_initial,
            "mass_final": self.mass_final,
            "mass_drift": self.mass_drift,
        })
    }
}

fn cell_mass(u: &[f64], dx: f64) -> f64 {
    u.iter().sum::<f64>() * dx
}

/// Face fluxes (walls excluded) and the conservative update du/dt.
fn flux_divergence(
    lam: &Nonlinearity,
    omega: f64,
    xs: &[f64],
    dx: f64,
    u: &[f64],
    lam_buf: &mut [f64],
    flux: &mut [f64],
    out: &mut [f64],
) {
    let n = u.len();
    for i in 0..n {
        lam_buf[i] = lam.value(u[i]);
    }
    for i in 0..n - 1 {
        let x_face = 0.5 * (xs[i] + xs[i + 1]);
        flux[i] = x_face * 0.5 * (u[i] + u[i + 1]) + omega * (lam_buf[i + 1] - lam_buf[i]) / dx;
    }
    out[0] = flux[0] / dx;
    for i in 1..n - 1 {
        out[i] = (flux[i] - flux[i - 1]) / dx;
    }
    out[n - 1] = -flux[n - 2] / dx;
}

fn min_of(u: &[f64]) -> f64 {
    u.iter().copied().fold(f64::INFINITY, f64::min)
}

fn all_finite(u: &[f64]) -> bool {
    u.iter().all(|v| v.is_finite())
}

/// Advances the sampled density over `t_span` on cells centered at the
/// uniform grid spanning `x_range`, saving `n_saves` evenly spaced levels.
pub fn evolve_pde(
    initial: &[f64],
    x_range: (f64, f64),
    pde: &PdeInstance,
    t_span: (f64, f64),
    options: &EvolveOptions,
) -> Result<EvolveReport, EvolveError> {
    let n = initial.len();
    if n < 5 {
        return Err(EvolveError::TooFewCells { n });
    }
    for (i, &v) in initial.iter().enumerate() {
        if !v.is_finite() {
            return Err(EvolveError::NonFiniteInitial { index: i });
        }
        if v <= 0.0 {
            return Err(EvolveError::NonPositiveInitial { index: i, value: v });
        }
    }
    let (t0, t1) = t_span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(EvolveError::EmptySpan { t0, t1 });
    }
    let (x0, x1) = x_range;
    if !(x1 > x0) || !x0.is_finite() || !x1.is_finite() {
        return Err(EvolveError::EmptyRange { x0, x1 });
    }
    if options.n_saves < 2 {
        return Err(EvolveError::BadOptions(format!(
            "n_saves must be at least 2, got {}",
            options.n_saves
        )));
    }
    if !(options.cfl > 0.0 && options.cfl <= 1.0) {
        return Err(EvolveError::BadOptions(format!(
            "cfl must lie in (0, 1], got {}",
            options.cfl
        )));
    }

    let dx = (x1 - x0) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| x0 + i as f64 * dx).collect();
    let save_ts: Vec<f64> = (0..options.n_saves)
        .map(|i| t0 + (t1 - t0) * i as f64 / (options.n_saves - 1) as f64)
        .collect();

    let lam = Nonlinearity::of(pde);
    let omega = pde.omega;
    let span = t1 - t0;
    let dt_floor = 1e-13 * span;
    // Largest face coordinate, walls included.
    let x_speed = (x0 - 0.5 * dx).abs().max((x1 + 0.5 * dx).abs());

    let mut u = initial.to_vec();
    let mut saved = Vec::with_capacity(options.n_saves * n);
    saved.extend_from_slice(&u);

    let mut lam_buf = vec![0.0; n];
    let mut flux = vec![0.0; n - 1];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    let mass0 = cell_mass(&u, dx);
    let mut t = t0;
    let mut steps = 0usize;
    let mut dt_min = f64::INFINITY;
    let mut dt_max = 0.0f64;

    for &t_target in &save_ts[1..] {
        while t < t_target - dt_floor {
            if steps >= options.max_steps {
                return Err(EvolveError::TooManySteps {
                    max: options.max_steps,
                    t,
                });
            }
            let mut dprime = 0.0f64;
            for &v in &u {
                dprime = dprime.max(lam.deriv(v).abs());
            }
            let mut dt = t_target - t;
            if omega * dprime > 0.0 {
                dt = dt.min(options.cfl * dx * dx / (omega * dprime));
            }
            if x_speed > 0.0 {
                dt = dt.min(options.cfl * dx / x_speed);
            }
            if !(dt > dt_floor) || !dt.is_finite() {
                return Err(EvolveError::CflUnderflow { t, dt });
            }

            flux_divergence(&lam, omega, &xs, dx, &u, &mut lam_buf, &mut flux, &mut k1);
            for i in 0..n {
                stage[i] = u[i] + 0.5 * dt * k1[i];
            }
            if min_of(&stage) <= 0.0 {
                return Err(EvolveError::PositivityLoss { t });
            }
            flux_divergence(&lam, omega, &xs, dx, &stage, &mut lam_buf, &mut flux, &mut k2);
            for i in 0..n {
                stage[i] = u[i] + 0.5 * dt * k2[i];
            }
            if min_of(&stage) <= 0.0 {
                return Err(EvolveError::PositivityLoss { t });
            }
            flux_divergence(&lam, omega, &xs, dx, &stage, &mut lam_buf, &mut flux, &mut k3);
            for i in 0..n {
                stage[i] = u[i] + dt * k3[i];
            }
            if min_of(&stage) <= 0.0 {
                return Err(EvolveError::PositivityLoss { t });
            }
            flux_divergence(&lam, omega, &xs, dx, &stage, &mut lam_buf, &mut flux, &mut k4);
            for i in 0..n {
                u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += dt;
            steps += 1;
            dt_min = dt_min.min(dt);
            dt_max = dt_max.max(dt);
            if !all_finite(&u) {
                return Err(EvolveError::NonFinite { t });
            }
            if min_of(&u) <= 0.0 {
                return Err(EvolveError::PositivityLoss { t });
            }
        }
        t = t_target;
        saved.extend_from_slice(&u);
    }

    let mass1 = cell_mass(&u, dx);
    let field = GridField::new(xs, save_ts, saved)?;
    Ok(EvolveReport {
        field,
        steps,
        dt_min,
        dt_max,
        mass_initial: mass0,
        mass_final: mass1,
        mass_drift: (mass1 - mass0).abs() / mass0.abs().max(f64::MIN_POSITIVE),
    })
}
