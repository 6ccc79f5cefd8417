//! Sampled solutions u(x, t) on uniform grids, with CSV and binary I/O.
//!
//! Binary layout (little-endian): the 8-byte magic `NFPEGRD1`, then `n_x`
//! and `n_t` as u64, then `x0`, `dx`, `t0`, `dt` as f64, then the
//! `n_x * n_t` values as f64 row-major (one time level per row). CSV has
//! the header `x,t,u` and one row per sample, time-major.

use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use crate::numerics::ode::{OdeError, OdeSolution};
use crate::reduction::ReductionRecipe;

const MAGIC: &[u8; 8] = b"NFPEGRD1";

/// Tolerance for node uniformity, relative to the spacing.
const UNIFORM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs at least 2 x-nodes and 1 t-node (got {n_x} x {n_t})")]
    Empty { n_x: usize, n_t: usize },
    #[error("got {got} values for a {n_x} x {n_t} grid")]
    ShapeMismatch { n_x: usize, n_t: usize, got: usize },
    #[error("{axis}-nodes are not uniformly spaced near index {index}")]
    NonUniform { axis: char, index: usize },
    #[error("non-finite value at (x, t) = ({x}, {t})")]
    NonFinite { x: f64, t: f64 },
    #[error("bad magic; expected NFPEGRD1")]
    BadMagic,
    #[error("corrupt stream: {0}")]
    Corrupt(String),
    #[error("CSV rows do not fill a complete x-t rectangle")]
    NotRectangular,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// u(x, t) sampled on a uniform rectangular grid, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    xs: Vec<f64>,
    ts: Vec<f64>,
    values: Vec<f64>,
}

fn check_uniform(nodes: &[f64], axis: char) -> Result<(), GridError> {
    if nodes.len() < 2 {
        return Ok(());
    }
    let d = nodes[1] - nodes[0];
    if d == 0.0 {
        return Err(GridError::NonUniform { axis, index: 1 });
    }
    for i in 1..nodes.len() {
        let di = nodes[i] - nodes[i - 1];
        if (di - d).abs() > UNIFORM_TOL * d.abs() {
            return Err(GridError::NonUniform { axis, index: i });
        }
    }
    Ok(())
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    let step = (range.1 - range.0) / (n - 1) as f64;
    (0..n).map(|i| range.0 + i as f64 * step).collect()
}

impl GridField {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>, values: Vec<f64>) -> Result<Self, GridError> {
        if xs.len() < 2 || ts.is_empty() {
            return Err(GridError::Empty {
                n_x: xs.len(),
                n_t: ts.len(),
            });
        }
        if values.len() != xs.len() * ts.len() {
            return Err(GridError::ShapeMismatch {
                n_x: xs.len(),
                n_t: ts.len(),
                got: values.len(),
            });
        }
        check_uniform(&xs, 'x')?;
        check_uniform(&ts, 't')?;
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFinite {
                    x: xs[idx % xs.len()],
                    t: ts[idx / xs.len()],
                });
            }
        }
        Ok(GridField { xs, ts, values })
    }

    /// Samples f on the uniform grid spanned by the ranges.
    pub fn from_fn(
        x_range: (f64, f64),
        n_x: usize,
        t_range: (f64, f64),
        n_t: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        let xs = linspace(x_range, n_x);
        let ts = linspace(t_range, n_t);
        let mut values = Vec::with_capacity(n_x * n_t);
        for &t in &ts {
            for &x in &xs {
                values.push(f(x, t));
            }
        }
        GridField::new(xs, ts, values)
    }

    pub fn n_x(&self) -> usize {
        self.xs.len()
    }

    pub fn n_t(&self) -> usize {
        self.ts.len()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn dx(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    /// Time spacing; None for a single time level.
    pub fn dt(&self) -> Option<f64> {
        (self.ts.len() > 1).then(|| self.ts[1] - self.ts[0])
    }

    pub fn value(&self, ix: usize, it: usize) -> f64 {
        self.values[it * self.xs.len() + ix]
    }

    /// The x-slice at time level `it`.
    pub fn level(&self, it: usize) -> &[f64] {
        let n = self.xs.len();
        &self.values[it * n..(it + 1) * n]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive(&self) -> bool {
        self.min_value() > 0.0
    }

    /// Trapezoid-rule mass of one time level.
    pub fn mass(&self, it: usize) -> f64 {
        let row = self.level(it);
        let dx = self.dx();
        let interior: f64 = row[1..row.len() - 1].iter().sum();
        dx * (interior + 0.5 * (row[0] + row[row.len() - 1]))
    }

    /// Trapezoid-rule mass of every time level.
    pub fn masses(&self) -> Vec<f64> {
        (0..self.ts.len()).map(|it| self.mass(it)).collect()
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "x,t,u")?;
        for (it, &t) in self.ts.iter().enumerate() {
            for (ix, &x) in self.xs.iter().enumerate() {
                writeln!(w, "{x},{t},{}", self.value(ix, it))?;
            }
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self, GridError> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "x,t,u" => {}
            Some(Ok(h)) => return Err(GridError::Corrupt(format!("unexpected header '{h}'"))),
            Some(Err(e)) => return Err(e.into()),
            None => return Err(GridError::Corrupt("empty input".into())),
        }
        let mut xs: Vec<f64> = Vec::new();
        let mut ts: Vec<f64> = Vec::new();
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut field = || -> Result<f64, GridError> {
                parts
                    .next()
                    .ok_or_else(|| GridError::Corrupt(format!("short row {}", lineno + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| GridError::Corrupt(format!("row {}: {e}", lineno + 2)))
            };
            let (x, t, u) = (field()?, field()?, field()?);
            if !xs.contains(&x) {
                xs.push(x);
            }
            if !ts.contains(&t) {
                ts.push(t);
            }
            rows.push((x, t, u));
        }
        xs.sort_by(f64::total_cmp);
        ts.sort_by(f64::total_cmp);
        if rows.len() != xs.len() * ts.len() {
            return Err(GridError::NotRectangular);
        }
        let mut values = vec![f64::NAN; rows.len()];
        for (x, t, u) in rows {
            let ix = xs.iter().position(|&v| v == x).unwrap();
            let it = ts.iter().position(|&v| v == t).unwrap();
            values[it * xs.len() + ix] = u;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(GridError::NotRectangular);
        }
        GridField::new(xs, ts, values)
    }

    pub fn write_binary(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.xs.len() as u64).to_le_bytes())?;
        w.write_all(&(self.ts.len() as u64).to_le_bytes())?;
        let dt = self.dt().unwrap_or(0.0);
        for v in [self.xs[0], self.dx(), self.ts[0], dt] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self, GridError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(GridError::BadMagic);
        }
        let n_x = read_u64_from(r)? as usize;
        let n_t = read_u64_from(r)? as usize;
        if n_x < 2 || n_t < 1 || n_x.saturating_mul(n_t) > 1 << 28 {
            return Err(GridError::Corrupt(format!(
                "implausible dimensions {n_x} x {n_t}"
            )));
        }
        let x0 = read_f64_from(r)?;
        let dx = read_f64_from(r)?;
        let t0 = read_f64_from(r)?;
        let dt = read_f64_from(r)?;
        let xs: Vec<f64> = (0..n_x).map(|i| x0 + i as f64 * dx).collect();
        let ts: Vec<f64> = (0..n_t).map(|i| t0 + i as f64 * dt).collect();
        let mut values = Vec::with_capacity(n_x * n_t);
        for _ in 0..n_x * n_t {
            values.push(read_f64_from(r)?);
        }
        GridField::new(xs, ts, values)
    }
}

fn read_u64_from(r: &mut impl Read) -> Result<u64, GridError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64_from(r: &mut impl Read) -> Result<f64, GridError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(
        "t = {t} is outside the ansatz time domain ({lo}, {hi}) of this representative"
    )]
    OutsideTimeDomain { t: f64, lo: f64, hi: f64 },
    #[error("zeta({x}, {t}) = {zeta} is outside the integrated span [{lo}, {hi}]")]
    ZetaOutOfSpan {
        x: f64,
        t: f64,
        zeta: f64,
        lo: f64,
        hi: f64,
    },
    #[error("the ansatz is not finite at (x, t) = ({x}, {t})")]
    InvalidAnsatz { x: f64, t: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Assembles the invariant solution u = Phi * y(zeta) on a grid from an
/// integrated ODE solution, using dense output.
pub fn build_solution(
    recipe: &ReductionRecipe,
    y: &OdeSolution,
    x_range: (f64, f64),
    n_x: usize,
    t_range: (f64, f64),
    n_t: usize,
) -> Result<GridField, BuildError> {
    let xs = linspace(x_range, n_x);
    let ts = linspace(t_range, n_t);
    let (dlo, dhi) = recipe.t_domain;
    let mut values = Vec::with_capacity(n_x * n_t);
    for &t in &ts {
        if t <= dlo || t >= dhi {
            return Err(BuildError::OutsideTimeDomain { t, lo: dlo, hi: dhi });
        }
        for &x in &xs {
            let pd = recipe.phi_at(x, t);
            let zd = recipe.zeta_at(x, t);
            if !pd.v.is_finite() || !zd.v.is_finite() {
                return Err(BuildError::InvalidAnsatz { x, t });
            }
            let (yv, _) = y.sample(zd.v).map_err(|e| match e {
                OdeError::OutOfSpan { zeta, lo, hi } => BuildError::ZetaOutOfSpan {
                    x,
                    t,
                    zeta,
                    lo,
                    hi,
                },
                _ => BuildError::InvalidAnsatz { x, t },
            })?;
            let u = pd.v * yv;
            if !u.is_finite() {
                return Err(BuildError::InvalidAnsatz { x, t });
            }
            values.push(u);
        }
    }
    Ok(GridField::new(xs, ts, values)?)
}
