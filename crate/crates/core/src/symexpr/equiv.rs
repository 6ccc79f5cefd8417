//! Probabilistic expression equivalence.
//!
//! Canonicalization already identifies many equal expressions structurally.
//! For the rest, equality is tested numerically at random points: all free
//! variables (parameters and jet coordinates alike) are drawn uniformly from
//! [1/2, 2], a range on which every expression produced by this crate is
//! defined, and the two sides are compared in relative terms.

use super::{Expr, NumBindings, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples that must evaluate cleanly for a probabilistic verdict.
const REQUIRED_SAMPLES: usize = 50;
/// Attempt cap before giving up on finding valid sample points.
const MAX_ATTEMPTS: usize = 200;
/// Relative tolerance for a sample to count as equal.
const SAMPLE_RTOL: f64 = 1e-10;
/// Seed for the default (deterministic) comparison.
const DEFAULT_SEED: u64 = 0x53_54_4d_2d_4e_46_50;

/// Outcome of an equivalence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The difference canonicalizes to zero.
    Syntactic,
    /// Equal at every sampled point.
    Probabilistic,
    /// A sample point separates the expressions.
    Distinct,
    /// Not enough valid sample points (domain errors or unknown atoms).
    Indeterminate,
}

impl Verdict {
    /// Whether the verdict counts as "the expressions agree".
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Syntactic | Verdict::Probabilistic)
    }
}

/// Test `a` and `b` for equality, structurally then numerically, with a
/// fixed sampling seed.
pub fn equivalent(a: &Expr, b: &Expr) -> Verdict {
    equivalent_seeded(a, b, DEFAULT_SEED)
}

/// Like [`equivalent`] with a caller-chosen seed for the sample points.
pub fn equivalent_seeded(a: &Expr, b: &Expr, seed: u64) -> Verdict {
    if (a.clone() - b.clone()).is_zero() {
        return Verdict::Syntactic;
    }
    if a.has_unknown() || b.has_unknown() {
        return Verdict::Indeterminate;
    }
    let mut vars: Vec<Var> = a.free_vars().into_iter().collect();
    for v in b.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut valid = 0usize;
    for _ in 0..MAX_ATTEMPTS {
        let mut binds = NumBindings::new();
        for v in &vars {
            binds.insert(v.clone(), rng.random_range(0.5..=2.0));
        }
        let (va, vb) = match (a.eval(&binds), b.eval(&binds)) {
            (Ok(va), Ok(vb)) => (va, vb),
            _ => continue,
        };
        if !va.is_finite() || !vb.is_finite() {
            continue;
        }
        let scale = 1.0f64.max(va.abs()).max(vb.abs());
        if (va - vb).abs() > SAMPLE_RTOL * scale {
            return Verdict::Distinct;
        }
        valid += 1;
        if valid >= REQUIRED_SAMPLES {
            return Verdict::Probabilistic;
        }
    }
    Verdict::Indeterminate
}
