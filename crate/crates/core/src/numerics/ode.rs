//! Adaptive integration of the reduced ODEs.
//!
//! The stepper is the Dormand-Prince embedded Runge-Kutta pair (5th order
//! with 4th-order error control) on the first-order system (y, y'). Dense
//! output is cubic Hermite on each accepted step. Degenerate diffusion is
//! handled by event-stopping rather than regularization: when the right-hand
//! side reports y <= 0 or a vanishing y''-coefficient and the step can no
//! longer shrink around the singular point, integration ends there with the
//! reason recorded instead of failing.

use thiserror::Error;

use crate::reduction::{OdeRhsError, ReductionRecipe};

/// Default relative tolerance of the error controller.
pub const DEFAULT_REL_TOL: f64 = 1e-9;
/// Default absolute tolerance of the error controller.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

type Rhs<'a> = Box<dyn Fn(f64, f64, f64) -> Result<f64, OdeRhsError> + 'a>;

/// An initial value problem y'' = G(zeta, y, y') on a zeta-span.
pub struct OdeProblem<'a> {
    rhs: Rhs<'a>,
    pub zeta0: f64,
    pub y0: f64,
    pub yp0: f64,
    pub zeta_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size; also bounds the dense-output
    /// interpolation error, which is O(h^4).
    pub max_step: Option<f64>,
}

impl<'a> OdeProblem<'a> {
    pub fn new(
        rhs: impl Fn(f64, f64, f64) -> Result<f64, OdeRhsError> + 'a,
        zeta0: f64,
        y0: f64,
        yp0: f64,
        zeta_end: f64,
    ) -> Self {
        OdeProblem {
            rhs: Box::new(rhs),
            zeta0,
            y0,
            yp0,
            zeta_end,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_step: None,
        }
    }

    /// The problem y'' = G from a recipe's reduced equation at a given
    /// diffusion coefficient.
    pub fn from_recipe(
        recipe: &'a ReductionRecipe,
        omega: f64,
        zeta0: f64,
        y0: f64,
        yp0: f64,
        zeta_end: f64,
    ) -> Self {
        Self::new(
            move |z, y, yp| recipe.ode_second_derivative(omega, z, y, yp),
            zeta0,
            y0,
            yp0,
            zeta_end,
        )
    }

    pub fn with_tolerances(mut self, rel: f64, abs: f64) -> Self {
        self.rel_tol = rel;
        self.abs_tol = abs;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    SpanCompleted,
    /// y reached zero (degenerate diffusion boundary).
    NonPositiveY { zeta: f64 },
    /// The y''-coefficient of the reduced equation vanished.
    DegenerateLeadingCoefficient { zeta: f64 },
}

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at zeta = {zeta} (|h| = {h:.3e}) with no event in sight")]
    StepSizeUnderflow { zeta: f64, h: f64 },
    #[error("right-hand side evaluation failed at zeta = {zeta}: {message}")]
    Rhs { zeta: f64, message: String },
    #[error("zeta = {zeta} lies outside the solution span [{lo}, {hi}]")]
    OutOfSpan { zeta: f64, lo: f64, hi: f64 },
    #[error("integration span is empty (zeta0 = zeta_end = {0})")]
    EmptySpan(f64),
    #[error("tolerances must be positive (rel = {rel}, abs = {abs})")]
    BadTolerances { rel: f64, abs: f64 },
}

struct Segment {
    z0: f64,
    h: f64,
    y: [f64; 2],
    f: [f64; 2],
    y1: [f64; 2],
    f1: [f64; 2],
}

impl Segment {
    /// Cubic Hermite values (y, y') at fraction s of the step.
    fn sample(&self, s: f64) -> (f64, f64) {
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        // Both y and y' carry their own Hermite data: the state holds
        // (y, y') and the derivative holds (y', y'').
        let val = |i: usize| {
            h00 * self.y[i] + h10 * self.h * self.f[i] + h01 * self.y1[i]
                + h11 * self.h * self.f1[i]
        };
        (val(0), val(1))
    }
}

/// The integrated solution with dense output.
pub struct OdeSolution {
    segments: Vec<Segment>,
    pub zeta_start: f64,
    pub zeta_end: f64,
    pub outcome: StopReason,
    pub n_steps: usize,
    pub n_rejected: usize,
}

impl OdeSolution {
    /// Ordered (low, high) span covered by the solution.
    pub fn span(&self) -> (f64, f64) {
        if self.zeta_start <= self.zeta_end {
            (self.zeta_start, self.zeta_end)
        } else {
            (self.zeta_end, self.zeta_start)
        }
    }

    /// (zeta, y, y') at the final point reached.
    pub fn end_state(&self) -> (f64, f64, f64) {
        match self.segments.last() {
            Some(seg) => {
                let s = (self.zeta_end - seg.z0) / seg.h;
                let (y, yp) = seg.sample(s);
                (self.zeta_end, y, yp)
            }
            None => (self.zeta_start, f64::NAN, f64::NAN),
        }
    }

    /// (y, y') at zeta by dense output.
    pub fn sample(&self, zeta: f64) -> Result<(f64, f64), OdeError> {
        let (lo, hi) = self.span();
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        if zeta < lo - tol || zeta > hi + tol || self.segments.is_empty() {
            return Err(OdeError::OutOfSpan { zeta, lo, hi });
        }
        // Segments are ordered in integration direction; binary search for
        // the one containing zeta.
        let forward = self.zeta_start <= self.zeta_end;
        let pos = self.segments.partition_point(|seg| {
            let z1 = seg.z0 + seg.h;
            if forward {
                z1 < zeta
            } else {
                z1 > zeta
            }
        });
        let seg = &self.segments[pos.min(self.segments.len() - 1)];
        let s = ((zeta - seg.z0) / seg.h).clamp(0.0, 1.0);
        Ok(seg.sample(s))
    }
}

fn classify_rhs_err(e: &OdeRhsError) -> Option<StopReason> {
    match e {
        OdeRhsError::NonPositiveY { zeta, .. } => Some(StopReason::NonPositiveY { zeta: *zeta }),
        OdeRhsError::DegenerateLeadingCoefficient { zeta } => {
            Some(StopReason::DegenerateLeadingCoefficient { zeta: *zeta })
        }
        OdeRhsError::Eval(_) => None,
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

enum StepOutcome {
    Accepted { y1: [f64; 2], f1: [f64; 2], err: f64 },
    Rejected { err: f64 },
    RhsEvent(StopReason),
    RhsFailure(OdeError),
}

/// Integrates the problem over its span.
///
/// Event stops (y <= 0, degenerate y''-coefficient) end the integration
/// normally with the reason in [`OdeSolution::outcome`]; hard failures
/// (step-size underflow away from any event, unevaluable right-hand side)
/// are errors.
pub fn integrate_ode(p: &OdeProblem) -> Result<OdeSolution, OdeError> {
    if p.zeta_end == p.zeta0 {
        return Err(OdeError::EmptySpan(p.zeta0));
    }
    if !(p.rel_tol > 0.0) || !(p.abs_tol > 0.0) {
        return Err(OdeError::BadTolerances {
            rel: p.rel_tol,
            abs: p.abs_tol,
        });
    }
    let span = p.zeta_end - p.zeta0;
    let dir = span.signum();
    let h_cap = p.max_step.unwrap_or(f64::INFINITY).abs();
    let h_min = 1e-14 * span.abs().max(p.zeta0.abs()).max(1.0);

    let eval = |z: f64, y: &[f64; 2]| -> Result<[f64; 2], OdeRhsError> {
        Ok([y[1], (p.rhs)(z, y[0], y[1])?])
    };

    let mut z = p.zeta0;
    let mut y = [p.y0, p.yp0];
    let mut f = match eval(z, &y) {
        Ok(f) => f,
        Err(e) => match classify_rhs_err(&e) {
            Some(reason) => {
                return Ok(OdeSolution {
                    segments: Vec::new(),
                    zeta_start: p.zeta0,
                    zeta_end: p.zeta0,
                    outcome: reason,
                    n_steps: 0,
                    n_rejected: 0,
                })
            }
            None => {
                return Err(OdeError::Rhs {
                    zeta: z,
                    message: e.to_string(),
                })
            }
        },
    };
    let mut h = dir * (span.abs() / 100.0).min(h_cap);
    let mut segments = Vec::new();
    let mut n_steps = 0usize;
    let mut n_rejected = 0usize;
    let mut pending_event: Option<StopReason> = None;

    let attempt = |z: f64, y: &[f64; 2], f: &[f64; 2], h: f64| -> StepOutcome {
        let mut k = [[0.0f64; 2]; 7];
        k[0] = *f;
        for stage in 0..6 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                ys[0] += h * A[stage][j] * kj[0];
                ys[1] += h * A[stage][j] * kj[1];
            }
            match eval(z + C[stage] * h, &ys) {
                Ok(fs) => k[stage + 1] = fs,
                Err(e) => {
                    return match classify_rhs_err(&e) {
                        Some(reason) => StepOutcome::RhsEvent(reason),
                        None => StepOutcome::RhsFailure(OdeError::Rhs {
                            zeta: z + C[stage] * h,
                            message: e.to_string(),
                        }),
                    }
                }
            }
        }
        let mut y5 = *y;
        let mut y4 = *y;
        for (j, kj) in k.iter().enumerate() {
            y5[0] += h * B5[j] * kj[0];
            y5[1] += h * B5[j] * kj[1];
            y4[0] += h * B4[j] * kj[0];
            y4[1] += h * B4[j] * kj[1];
        }
        let mut err = 0.0f64;
        for i in 0..2 {
            let scale = p.abs_tol + p.rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4[i]) / scale;
            err += e * e;
        }
        let err = (err / 2.0).sqrt();
        if err <= 1.0 {
            StepOutcome::Accepted {
                y1: y5,
                f1: k[6],
                err,
            }
        } else {
            StepOutcome::Rejected { err }
        }
    };

    loop {
        let remaining = p.zeta_end - z;
        if remaining * dir <= 1e-14 * span.abs() {
            return Ok(OdeSolution {
                segments,
                zeta_start: p.zeta0,
                zeta_end: z,
                outcome: StopReason::SpanCompleted,
                n_steps,
                n_rejected,
            });
        }
        if h.abs() > remaining.abs() {
            h = remaining;
        }
        match attempt(z, &y, &f, h) {
            StepOutcome::Accepted { y1, f1, err } => {
                segments.push(Segment {
                    z0: z,
                    h,
                    y,
                    f,
                    y1,
                    f1,
                });
                z += h;
                y = y1;
                f = f1;
                n_steps += 1;
                pending_event = None;
                if y[0] <= 0.0 {
                    // Locate the zero crossing of y inside the last step and
                    // stop there.
                    let seg = segments.last().unwrap();
                    let (mut lo, mut hi) = (0.0f64, 1.0f64);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if seg.sample(mid).0 > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let z_stop = seg.z0 + lo * seg.h;
                    return Ok(OdeSolution {
                        zeta_start: p.zeta0,
                        zeta_end: z_stop,
                        outcome: StopReason::NonPositiveY { zeta: z_stop },
                        n_steps,
                        n_rejected,
                        segments,
                    });
                }
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * grow).clamp(-h_cap, h_cap);
                if h == 0.0 {
                    h = dir * h_min;
                }
            }
            StepOutcome::Rejected { err } => {
                n_rejected += 1;
                let shrink = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                h *= shrink;
            }
            StepOutcome::RhsEvent(reason) => {
                n_rejected += 1;
                pending_event = Some(reason);
                h *= 0.5;
            }
            StepOutcome::RhsFailure(e) => return Err(e),
        }
        if h.abs() < h_min {
            return match pending_event {
                Some(outcome) => Ok(OdeSolution {
                    segments,
                    zeta_start: p.zeta0,
                    zeta_end: z,
                    outcome,
                    n_steps,
                    n_rejected,
                }),
                None => Err(OdeError::StepSizeUnderflow { zeta: z, h }),
            };
        }
    }
}
