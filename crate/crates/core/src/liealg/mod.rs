//! Lie-algebraic layer over the symmetry generators: commutators, structure
//! constants, the adjoint representation, and printable commutator and
//! adjoint tables.
//!
//! A parameter case's generator catalog is treated as an ordered basis
//! X1, ..., Xn. Brackets and basis expansions are exact over the rationals;
//! floating point enters only through the adjoint matrix exponential and the
//! optimal-system normalization in [`normalize_element`].
//!
//! Sign convention: the adjoint action of the one-parameter group generated
//! by Xi is `Ad(exp(eps Xi)) Y = Y - eps [Xi, Y] + (eps^2/2) [Xi, [Xi, Y]] - ...`,
//! i.e. the matrix `exp(-eps ad_i)` acting on basis coordinates.

mod normalize;

pub use normalize::{
    adjoint_move, normalize_element, AlgebraElement, Move, Normalization, NormalizeError, RepLabel,
};

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde_json::json;
use thiserror::Error;

use crate::family::{generators, CaseFamily, CaseId};
use crate::jets::VectorField;
use crate::symexpr::{rat, rat_to_f64, Expr, ExprKind, Rat, Var};

/// Errors from bracket expansion and table construction.
#[derive(Debug, Error)]
pub enum LieAlgError {
    /// A vector field could not be written as a rational combination of the
    /// basis; for brackets this signals a basis that is not closed.
    #[error("not in the span of the basis: {0}")]
    NotInSpan(String),
    /// The basis fields are linearly dependent, so expansion coefficients
    /// would not be unique.
    #[error("basis is linearly dependent; expansions are not unique")]
    DependentBasis,
    /// delta = -1 zeroes the weight 2(1 + delta) that scales every
    /// exponential entry of the case C tables.
    #[error("delta = -1 degenerates the case C adjoint action (weight 2(1 + delta) vanishes)")]
    DegenerateDelta,
}

/// Applies the derivation `xi d/dx + tau d/dt + eta d/du` to a function of
/// (x, t, u).
fn derive_along(v: &VectorField, f: &Expr) -> Expr {
    v.xi.clone() * f.diff(&Var::x())
        + v.tau.clone() * f.diff(&Var::t())
        + v.eta.clone() * f.diff(&Var::u())
}

/// Commutator of two point-symmetry generators, componentwise
/// `[v, w]_c = v(w_c) - w(v_c)`.
pub fn bracket(v: &VectorField, w: &VectorField) -> VectorField {
    VectorField::new(
        derive_along(v, &w.xi) - derive_along(w, &v.xi),
        derive_along(v, &w.tau) - derive_along(w, &v.tau),
        derive_along(v, &w.eta) - derive_along(w, &v.eta),
    )
}

/// Splits a canonical term into its rational coefficient and the remaining
/// monomial (coefficient 1).
fn split_coeff(term: &Expr) -> (Rat, Expr) {
    match term.kind() {
        ExprKind::Rational(r) => (r.clone(), Expr::one()),
        ExprKind::Product(factors) => {
            if let ExprKind::Rational(r) = factors[0].kind() {
                let rest: Vec<Expr> = factors[1..].to_vec();
                let key = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::product(rest)
                };
                (r.clone(), key)
            } else {
                (Rat::one(), term.clone())
            }
        }
        _ => (Rat::one(), term.clone()),
    }
}

/// Decomposes a canonical expression into monomial -> coefficient.
fn monomial_terms(e: &Expr) -> BTreeMap<Expr, Rat> {
    let mut out = BTreeMap::new();
    let mut push = |term: &Expr| {
        let (coeff, key) = split_coeff(term);
        if !coeff.is_zero() {
            *out.entry(key).or_insert_with(Rat::zero) += coeff;
        }
    };
    match e.kind() {
        ExprKind::Sum(terms) => {
            for t in terms {
                push(t);
            }
        }
        _ => push(e),
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Solves the exact linear system given as rows `(coefficients, rhs, label)`
/// in `n` unknowns by Gauss-Jordan elimination over the rationals.
fn solve_exact(
    mut rows: Vec<(Vec<Rat>, Rat, String)>,
    n: usize,
) -> Result<Vec<Rat>, LieAlgError> {
    let m = rows.len();
    let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; n];
    let mut next_row = 0usize;
    for col in 0..n {
        if next_row == m {
            break;
        }
        let Some(p) = (next_row..m).find(|&r| !rows[r].0[col].is_zero()) else {
            continue;
        };
        rows.swap(next_row, p);
        let pivot = rows[next_row].0[col].clone();
        for c in 0..n {
            rows[next_row].0[c] = &rows[next_row].0[c] / &pivot;
        }
        rows[next_row].1 = &rows[next_row].1 / &pivot;
        for r in 0..m {
            if r != next_row && !rows[r].0[col].is_zero() {
                let factor = rows[r].0[col].clone();
                for c in 0..n {
                    let delta = &factor * &rows[next_row].0[c];
                    rows[r].0[c] = &rows[r].0[c] - &delta;
                }
                let delta = &factor * &rows[next_row].1;
                rows[r].1 = &rows[r].1 - &delta;
            }
        }
        pivot_row_of_col[col] = Some(next_row);
        next_row += 1;
    }
    if pivot_row_of_col.iter().any(Option::is_none) {
        return Err(LieAlgError::DependentBasis);
    }
    for (coeffs, rhs, label) in &rows {
        if coeffs.iter().all(Zero::is_zero) && !rhs.is_zero() {
            return Err(LieAlgError::NotInSpan(format!(
                "component monomial {label} remains unmatched"
            )));
        }
    }
    Ok((0..n)
        .map(|c| rows[pivot_row_of_col[c].unwrap()].1.clone())
        .collect())
}

/// Writes `v` as an exact rational combination of the basis fields.
pub fn expand_in_basis(v: &VectorField, basis: &[VectorField]) -> Result<Vec<Rat>, LieAlgError> {
    let n = basis.len();
    let mut rows: Vec<(Vec<Rat>, Rat, String)> = Vec::new();
    for (comp_name, get) in [
        ("xi", (|f: &VectorField| &f.xi) as fn(&VectorField) -> &Expr),
        ("tau", |f: &VectorField| &f.tau),
        ("eta", |f: &VectorField| &f.eta),
    ] {
        let target = monomial_terms(get(v));
        let per_basis: Vec<BTreeMap<Expr, Rat>> =
            basis.iter().map(|b| monomial_terms(get(b))).collect();
        let mut keys: BTreeSet<Expr> = target.keys().cloned().collect();
        for terms in &per_basis {
            keys.extend(terms.keys().cloned());
        }
        for key in keys {
            let row: Vec<Rat> = per_basis
                .iter()
                .map(|terms| terms.get(&key).cloned().unwrap_or_else(Rat::zero))
                .collect();
            let rhs = target.get(&key).cloned().unwrap_or_else(Rat::zero);
            rows.push((row, rhs, format!("{comp_name}: {key}")));
        }
    }
    solve_exact(rows, n)
}

/// Exact structure constants `c[i][j][m]` of a generator basis, defined by
/// `[Xi, Xj] = sum_m c[i][j][m] Xm` (indices zero-based).
#[derive(Debug, Clone)]
pub struct StructureConstants {
    n: usize,
    c: Vec<Vec<Vec<Rat>>>,
}

impl StructureConstants {
    /// Computes every pairwise bracket of `basis` and expands it back in the
    /// basis. Fails if the basis is not closed under the bracket.
    pub fn from_basis(basis: &[VectorField]) -> Result<Self, LieAlgError> {
        let n = basis.len();
        let mut c = vec![vec![vec![Rat::zero(); n]; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let br = bracket(&basis[i], &basis[j]);
                if br.is_zero() {
                    continue;
                }
                let coeffs = expand_in_basis(&br, basis).map_err(|e| match e {
                    LieAlgError::NotInSpan(d) => LieAlgError::NotInSpan(format!(
                        "[X{}, X{}]: {d}",
                        i + 1,
                        j + 1
                    )),
                    other => other,
                })?;
                for (m, coeff) in coeffs.iter().enumerate() {
                    c[j][i][m] = -coeff;
                }
                c[i][j] = coeffs;
            }
        }
        Ok(Self { n, c })
    }

    /// Structure constants for a classified case's generator catalog.
    ///
    /// Case C with delta = -1 is rejected: the weight 2(1 + delta) scales
    /// every nontrivial entry of the case C commutator and adjoint tables,
    /// and the downstream normalization divides by it.
    pub fn for_case(case: &CaseId) -> Result<Self, LieAlgError> {
        if case.family() == CaseFamily::C && case.delta_value() == Some(rat(-1, 1)) {
            return Err(LieAlgError::DegenerateDelta);
        }
        Self::from_basis(&generators(case).basis)
    }

    /// Basis dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of `Xm` in `[Xi, Xj]` (zero-based indices).
    pub fn c(&self, i: usize, j: usize, m: usize) -> &Rat {
        &self.c[i][j][m]
    }

    /// Exact bracket of two coordinate vectors.
    pub fn bracket_coeffs(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.n];
        for i in 0..self.n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..self.n {
                if b[j].is_zero() {
                    continue;
                }
                let f = &a[i] * &b[j];
                for (m, out_m) in out.iter_mut().enumerate() {
                    if !self.c[i][j][m].is_zero() {
                        *out_m = &*out_m + &(&f * &self.c[i][j][m]);
                    }
                }
            }
        }
        out
    }

    /// Floating-point bracket of two coordinate vectors.
    pub fn bracket_coeffs_f64(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..self.n {
                if b[j] == 0.0 {
                    continue;
                }
                for (m, out_m) in out.iter_mut().enumerate() {
                    if !self.c[i][j][m].is_zero() {
                        *out_m += a[i] * b[j] * rat_to_f64(&self.c[i][j][m]);
                    }
                }
            }
        }
        out
    }

    /// Checks `c[i][j][m] = -c[j][i][m]` and `c[i][i][m] = 0` exactly.
    pub fn is_antisymmetric(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                for m in 0..self.n {
                    if self.c[i][j][m] != -self.c[j][i][m].clone() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Checks the Jacobi identity
    /// `[[Xi,Xj],Xk] + [[Xj,Xk],Xi] + [[Xk,Xi],Xj] = 0` exactly.
    pub fn satisfies_jacobi(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    for l in 0..self.n {
                        let mut total = Rat::zero();
                        for m in 0..self.n {
                            total += &self.c[i][j][m] * &self.c[m][k][l]
                                + &self.c[j][k][m] * &self.c[m][i][l]
                                + &self.c[k][i][m] * &self.c[m][j][l];
                        }
                        if !total.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Matrix of `ad_i = [Xi, .]` in the basis: `ad(i)[m][j] = c[i][j][m]`
    /// (`generator` is 1-based to match the X-naming).
    pub fn ad(&self, generator: usize) -> Vec<Vec<f64>> {
        assert!(
            (1..=self.n).contains(&generator),
            "generator index {generator} out of range 1..={}",
            self.n
        );
        let i = generator - 1;
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (j, col) in self.c[i].iter().enumerate() {
            for (m, coeff) in col.iter().enumerate() {
                out[m][j] = rat_to_f64(coeff);
            }
        }
        out
    }
}

fn mat_identity(n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat_inf_norm(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring around a Taylor series summed
/// to machine precision. For nilpotent input the series terminates exactly.
fn mat_exp(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let norm = mat_inf_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = (2.0f64).powi(squarings as i32);
    let scaled: Vec<Vec<f64>> = a
        .iter()
        .map(|row| row.iter().map(|x| x / scale).collect())
        .collect();
    let mut result = mat_identity(n);
    let mut term = mat_identity(n);
    for k in 1..=80u32 {
        term = mat_mul(&term, &scaled);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= f64::from(k);
            }
        }
        for (res_row, term_row) in result.iter_mut().zip(&term) {
            for (r, t) in res_row.iter_mut().zip(term_row) {
                *r += t;
            }
        }
        let tn = mat_inf_norm(&term);
        if tn == 0.0 || tn <= 1e-18 * mat_inf_norm(&result).max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

/// Matrix of `Ad(exp(eps Xi))` on basis coordinates: column `j` holds the
/// expansion of `Ad(exp(eps Xi)) Xj`, so coordinate vectors transform by
/// left multiplication.
#[derive(Debug, Clone)]
pub struct AdjointMatrix {
    generator: usize,
    eps: f64,
    m: Vec<Vec<f64>>,
}

impl AdjointMatrix {
    /// Computes `exp(-eps ad_i)` for the 1-based generator index `generator`.
    pub fn new(sc: &StructureConstants, generator: usize, eps: f64) -> Self {
        let ad = sc.ad(generator);
        let neg: Vec<Vec<f64>> = ad
            .iter()
            .map(|row| row.iter().map(|x| -eps * x).collect())
            .collect();
        Self {
            generator,
            eps,
            m: mat_exp(&neg),
        }
    }

    /// 1-based index of the generator driving the inner automorphism.
    pub fn generator(&self) -> usize {
        self.generator
    }

    /// Group parameter.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Basis dimension.
    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Entry `row, col` (zero-based): coefficient of `X(row+1)` in the image
    /// of `X(col+1)`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.m[row][col]
    }

    /// Full matrix, row-major.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.m
    }

    /// Applies the adjoint action to a coordinate vector.
    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.m.len();
        assert_eq!(coeffs.len(), n, "coefficient vector has wrong length");
        let mut out = vec![0.0; n];
        for (row, out_row) in out.iter_mut().enumerate() {
            for (col, c) in coeffs.iter().enumerate() {
                *out_row += self.m[row][col] * c;
            }
        }
        out
    }
}

fn basis_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

/// Renders an exact coordinate vector as a readable combination,
/// e.g. `2 X1 + 2 X5` or `-2/3 X3`.
pub fn combo_rat(coeffs: &[Rat]) -> String {
    let mut out = String::new();
    for (idx, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let name = format!("X{}", idx + 1);
        let mag = c.abs();
        let piece = if mag.is_one() {
            name
        } else {
            format!("{mag} {name}")
        };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        out.push_str(&piece);
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

fn fmt_f64(x: f64) -> String {
    let rounded = x.round();
    if (x - rounded).abs() < 1e-12 * x.abs().max(1.0) && rounded.abs() < 1e12 {
        return format!("{}", rounded as i64);
    }
    let s = format!("{x:.10}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Renders a floating-point coordinate vector as a readable combination,
/// dropping entries below 1e-12.
pub fn combo_f64(coeffs: &[f64]) -> String {
    let mut out = String::new();
    for (idx, &c) in coeffs.iter().enumerate() {
        if c.abs() < 1e-12 {
            continue;
        }
        let name = format!("X{}", idx + 1);
        let mag = c.abs();
        let piece = if (mag - 1.0).abs() < 1e-12 {
            name
        } else {
            format!("{} {name}", fmt_f64(mag))
        };
        if out.is_empty() {
            if c < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0.0 { " - " } else { " + " });
        }
        out.push_str(&piece);
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

/// Renders an adjoint image with the column's own generator first, the way
/// transformed-generator tables are usually written ("X4 + 0.5 X3" rather
/// than "0.5 X3 + X4").
fn combo_f64_lead(coeffs: &[f64], lead: usize) -> String {
    if coeffs[lead].abs() < 1e-12 {
        return combo_f64(coeffs);
    }
    let mut only_lead = vec![0.0; coeffs.len()];
    only_lead[lead] = coeffs[lead];
    let head = combo_f64(&only_lead);
    let mut rest = coeffs.to_vec();
    rest[lead] = 0.0;
    let tail = combo_f64(&rest);
    if tail == "0" {
        head
    } else if let Some(stripped) = tail.strip_prefix('-') {
        format!("{head} - {stripped}")
    } else {
        format!("{head} + {tail}")
    }
}

fn aligned_table(header: &str, col_names: &[String], cells: &[Vec<String>]) -> String {
    let n_cols = col_names.len() + 1;
    let mut widths = vec![0usize; n_cols];
    widths[0] = header.len();
    for (j, name) in col_names.iter().enumerate() {
        widths[j + 1] = name.len();
    }
    for (i, row) in cells.iter().enumerate() {
        widths[0] = widths[0].max(col_names[i].len());
        for (j, cell) in row.iter().enumerate() {
            widths[j + 1] = widths[j + 1].max(cell.len());
        }
    }
    let mut out = String::new();
    let pad = |s: &str, w: usize| format!("{s:<w$}");
    out.push_str(&pad(header, widths[0]));
    for (j, name) in col_names.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&pad(name, widths[j + 1]));
    }
    out.push('\n');
    for (i, row) in cells.iter().enumerate() {
        out.push_str(&pad(&col_names[i], widths[0]));
        for (j, cell) in row.iter().enumerate() {
            out.push_str("  ");
            out.push_str(&pad(cell, widths[j + 1]));
        }
        out.push('\n');
    }
    out
}

/// Commutator table as aligned text; rows are the first argument.
pub fn bracket_table_text(sc: &StructureConstants) -> String {
    let names = basis_names(sc.n);
    let cells: Vec<Vec<String>> = (0..sc.n)
        .map(|i| (0..sc.n).map(|j| combo_rat(&sc.c[i][j])).collect())
        .collect();
    aligned_table("[ , ]", &names, &cells)
}

/// Adjoint table at a fixed group parameter as aligned text; the row
/// generator acts on the column generator.
pub fn adjoint_table_text(sc: &StructureConstants, eps: f64) -> String {
    let names = basis_names(sc.n);
    let cells: Vec<Vec<String>> = (1..=sc.n)
        .map(|i| {
            let m = AdjointMatrix::new(sc, i, eps);
            (0..sc.n)
                .map(|j| {
                    let col: Vec<f64> = (0..sc.n).map(|row| m.entry(row, j)).collect();
                    combo_f64_lead(&col, j)
                })
                .collect()
        })
        .collect();
    aligned_table(&format!("Ad, eps={}", fmt_f64(eps)), &names, &cells)
}

/// Commutator table as JSON: exact coefficient strings plus rendered combos.
pub fn bracket_table_json(case: &CaseId, sc: &StructureConstants) -> serde_json::Value {
    let names = basis_names(sc.n);
    let entries: Vec<Vec<serde_json::Value>> = (0..sc.n)
        .map(|i| {
            (0..sc.n)
                .map(|j| {
                    json!({
                        "coeffs": sc.c[i][j].iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                        "pretty": combo_rat(&sc.c[i][j]),
                    })
                })
                .collect()
        })
        .collect();
    json!({
        "case": case.label(),
        "dimension": sc.n,
        "basis": names,
        "entries": entries,
    })
}

/// Adjoint tables at a fixed group parameter as JSON: one matrix per acting
/// generator plus rendered images of each basis element.
pub fn adjoint_table_json(case: &CaseId, sc: &StructureConstants, eps: f64) -> serde_json::Value {
    let names = basis_names(sc.n);
    let tables: Vec<serde_json::Value> = (1..=sc.n)
        .map(|i| {
            let m = AdjointMatrix::new(sc, i, eps);
            let images: Vec<String> = (0..sc.n)
                .map(|j| {
                    let col: Vec<f64> = (0..sc.n).map(|row| m.entry(row, j)).collect();
                    combo_f64_lead(&col, j)
                })
                .collect();
            json!({
                "generator": format!("X{i}"),
                "matrix": m.matrix(),
                "images": images,
            })
        })
        .collect();
    json!({
        "case": case.label(),
        "epsilon": eps,
        "dimension": sc.n,
        "basis": names,
        "tables": tables,
    })
}
