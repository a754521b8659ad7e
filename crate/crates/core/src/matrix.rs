//! Coefficient matrix `A = (a_ij)` and the structural hypotheses on it.
//!
//! (H1): `A` is symmetric, nonnegative, irreducible and invertible.
//!
//! (H2): with `A⁻¹ = (a^{ij})`, `a^{ii} ≤ 0`, `a^{ij} ≥ 0` for `i ≠ j` and
//! every row sum `Σ_j a^{ij} ≥ 0`.
//!
//! Indices are zero-based throughout. Sign and zero tests take an absolute
//! tolerance `zero_tol`; [`CoefficientMatrix::default_zero_tol`] gives the
//! usual `1e-12 · max|a_ij|`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative pivot threshold below which elimination declares `A` singular.
pub const PIVOT_REL_TOL: f64 = 1e-13;
/// Relative scale of the default zero tolerance.
pub const ZERO_TOL_REL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NonSquare { row: usize, len: usize, n: usize },
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("asymmetric beyond tolerance: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e} > {allowed:e}")]
    AsymmetricBeyondTolerance {
        i: usize,
        j: usize,
        diff: f64,
        allowed: f64,
    },
    #[error("matrix is singular: pivot {pivot:e} in column {column} below threshold {threshold:e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("(H1)/(H2) not satisfied")]
    HypothesesNotSatisfied,
}

/// Symmetric `n × n` coefficient matrix, optionally carrying its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    n: usize,
    entries: Vec<f64>,
    inverse: Option<Vec<f64>>,
    cond_estimate: Option<f64>,
}

impl CoefficientMatrix {
    /// Builds a matrix from rows, symmetrising `(a_ij + a_ji)/2` after
    /// checking `|a_ij − a_ji| ≤ sym_tol · max|a|`.
    pub fn new(raw: &[Vec<f64>], sym_tol: f64) -> Result<Self, MatrixError> {
        let n = raw.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        for (row, r) in raw.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NonSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
            if let Some(col) = r.iter().position(|x| !x.is_finite()) {
                return Err(MatrixError::NonFinite(row, col));
            }
        }
        let scale = raw
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        let allowed = sym_tol * scale;

        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (raw[i][j] - raw[j][i]).abs();
                if diff > allowed && worst.is_none_or(|(_, _, d)| diff > d) {
                    worst = Some((i, j, diff));
                }
            }
        }
        if let Some((i, j, diff)) = worst {
            return Err(MatrixError::AsymmetricBeyondTolerance {
                i,
                j,
                diff,
                allowed,
            });
        }

        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = raw[i][i];
            for j in (i + 1)..n {
                let v = if raw[i][j] == raw[j][i] {
                    raw[i][j]
                } else {
                    0.5 * (raw[i][j] + raw[j][i])
                };
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Ok(Self {
            n,
            entries,
            inverse: None,
            cond_estimate: None,
        })
    }

    /// Builds from rows that must be exactly symmetric.
    pub fn symmetric(raw: &[Vec<f64>]) -> Result<Self, MatrixError> {
        Self::new(raw, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn default_zero_tol(&self) -> f64 {
        ZERO_TOL_REL * self.max_abs()
    }

    /// Entry `a^{ij}` of the inverse, if it has been computed.
    pub fn inv(&self, i: usize, j: usize) -> Option<f64> {
        self.inverse.as_ref().map(|m| m[i * self.n + j])
    }

    pub fn inverse_entries(&self) -> Option<&[f64]> {
        self.inverse.as_deref()
    }

    pub fn inverse_rows(&self) -> Option<Vec<Vec<f64>>> {
        self.inverse
            .as_ref()
            .map(|m| m.chunks(self.n).map(|r| r.to_vec()).collect())
    }

    /// `‖A‖_∞ · ‖A⁻¹‖_∞`, available once inverted.
    pub fn cond_estimate(&self) -> Option<f64> {
        self.cond_estimate
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `y = A⁻¹ x`; `None` until inverted.
    pub fn inv_mul_vec(&self, x: &[f64]) -> Option<Vec<f64>> {
        assert_eq!(x.len(), self.n);
        self.inverse.as_ref().map(|m| {
            m.chunks(self.n)
                .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect()
        })
    }

    /// `c · A` (inverse dropped).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| x * c).collect(),
            inverse: None,
            cond_estimate: None,
        }
    }

    pub fn is_inverted(&self) -> bool {
        self.inverse.is_some()
    }

    /// Gauss–Jordan elimination with partial pivoting.
    ///
    /// Fails with [`MatrixError::Singular`] when a pivot drops below
    /// `PIVOT_REL_TOL · max|a_ij|`.
    pub fn invert(&self) -> Result<Self, MatrixError> {
        if self.inverse.is_some() {
            return Ok(self.clone());
        }
        let n = self.n;
        let threshold = PIVOT_REL_TOL * self.max_abs();
        let mut work = self.entries.clone();
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            inv[i * n + i] = 1.0;
        }

        for col in 0..n {
            let (piv_row, piv_abs) = (col..n)
                .map(|r| (r, work[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(piv_abs > threshold) || piv_abs == 0.0 {
                return Err(MatrixError::Singular {
                    column: col,
                    pivot: piv_abs,
                    threshold,
                });
            }
            if piv_row != col {
                for k in 0..n {
                    work.swap(col * n + k, piv_row * n + k);
                    inv.swap(col * n + k, piv_row * n + k);
                }
            }
            let p = work[col * n + col];
            for k in 0..n {
                work[col * n + k] /= p;
                inv[col * n + k] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = work[r * n + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..n {
                    work[r * n + k] -= f * work[col * n + k];
                    inv[r * n + k] -= f * inv[col * n + k];
                }
            }
        }

        // The inverse of a symmetric matrix is symmetric; remove rounding skew.
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (inv[i * n + j] + inv[j * n + i]);
                inv[i * n + j] = v;
                inv[j * n + i] = v;
            }
        }

        let cond = inf_norm(&self.entries, n) * inf_norm(&inv, n);
        Ok(Self {
            n,
            entries: self.entries.clone(),
            inverse: Some(inv),
            cond_estimate: Some(cond),
        })
    }

    /// `‖A·A⁻¹ − I‖_max`, once inverted.
    pub fn inverse_residual(&self) -> Option<f64> {
        let inv = self.inverse.as_ref()?;
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| self.get(i, k) * inv[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        Some(worst)
    }
}

fn inf_norm(m: &[f64], n: usize) -> f64 {
    m.chunks(n)
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl fmt::Display for CoefficientMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Connected components of the off-diagonal adjacency graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub blocks: Vec<Vec<usize>>,
}

impl BlockDecomposition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Breadth-first component labelling of the graph `{i,j}: i≠j, |a_ij| > zero_tol`.
pub fn decompose_blocks(a: &CoefficientMatrix, zero_tol: f64) -> BlockDecomposition {
    let n = a.n();
    let mut label = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut members = vec![start];
        label[start] = id;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if j != i && label[j] == usize::MAX && a.get(i, j).abs() > zero_tol {
                    label[j] = id;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        blocks.push(members);
    }
    // Starting points are visited in increasing order, so blocks are already
    // sorted by their smallest member.
    BlockDecomposition { blocks }
}

pub fn is_irreducible(a: &CoefficientMatrix, zero_tol: f64) -> bool {
    decompose_blocks(a, zero_tol).len() == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// (H1) some `a_ij < 0`.
    Negative,
    /// (H1) the adjacency graph is disconnected.
    Reducible,
    /// (H1) elimination found no usable pivot.
    Singular,
    /// (H2) `a^{ii} > 0`.
    InverseDiagonalPositive,
    /// (H2) `a^{ij} < 0` for `i ≠ j`.
    InverseOffDiagonalNegative,
    /// (H2) `Σ_j a^{ij} < 0`.
    InverseRowSumNegative,
    /// Consequence check: `a_ij ≤ 0` for some `i ≠ j`.
    OffDiagonalNotPositive,
    /// Consequence check: `max(a_ii, a_jj) > a_ij`.
    DiagonalExceedsOffDiagonal,
}

impl Condition {
    pub fn hypothesis(self) -> Hypothesis {
        use Condition::*;
        match self {
            Negative | Reducible | Singular => Hypothesis::H1,
            InverseDiagonalPositive | InverseOffDiagonalNegative | InverseRowSumNegative => {
                Hypothesis::H2
            }
            OffDiagonalNotPositive | DiagonalExceedsOffDiagonal => Hypothesis::Lemma21,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    H1,
    H2,
    Lemma21,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub condition: Condition,
    pub indices: Vec<usize>,
    pub value: f64,
}

/// Outcome of the hypothesis checks. A flag is `None` when that check was
/// not run; for each hypothesis the failures tagged with it are empty iff
/// its flag is `Some(true)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1_pass: Option<bool>,
    pub h2_pass: Option<bool>,
    pub lemma21_pass: Option<bool>,
    pub failures: Vec<Failure>,
}

impl HypothesisReport {
    pub fn h1_and_h2(&self) -> bool {
        self.h1_pass == Some(true) && self.h2_pass == Some(true)
    }

    pub fn failures_for(&self, h: Hypothesis) -> impl Iterator<Item = &Failure> {
        self.failures
            .iter()
            .filter(move |f| f.condition.hypothesis() == h)
    }

    fn merge(mut self, other: HypothesisReport) -> Self {
        self.h1_pass = other.h1_pass.or(self.h1_pass);
        self.h2_pass = other.h2_pass.or(self.h2_pass);
        self.lemma21_pass = other.lemma21_pass.or(self.lemma21_pass);
        self.failures.extend(other.failures);
        self
    }
}

pub fn check_h1(a: &CoefficientMatrix, zero_tol: f64) -> HypothesisReport {
    let n = a.n();
    let mut failures = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = a.get(i, j);
            if v < -zero_tol {
                failures.push(Failure {
                    condition: Condition::Negative,
                    indices: vec![i, j],
                    value: v,
                });
            }
        }
    }
    let blocks = decompose_blocks(a, zero_tol);
    if blocks.len() != 1 {
        failures.push(Failure {
            condition: Condition::Reducible,
            indices: blocks.blocks.iter().map(|b| b[0]).collect(),
            value: blocks.len() as f64,
        });
    }
    if let Err(MatrixError::Singular { column, pivot, .. }) = a.invert() {
        failures.push(Failure {
            condition: Condition::Singular,
            indices: vec![column],
            value: pivot,
        });
    }
    HypothesisReport {
        h1_pass: Some(failures.is_empty()),
        failures,
        ..Default::default()
    }
}

/// (H2) from the inverse. Entries of `A⁻¹` are compared against `zero_tol`
/// rescaled by `max|a^{ij}| / max|a_ij|`, so the tolerance is relative to
/// the matrix that is actually being tested.
pub fn check_h2(a: &CoefficientMatrix, zero_tol: f64) -> Result<HypothesisReport, MatrixError> {
    let inverted;
    let a = if a.is_inverted() {
        a
    } else {
        inverted = a.invert()?;
        &inverted
    };
    let n = a.n();
    let inv = a.inverse_entries().expect("inverted above");
    let inv_scale = inv.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let tol = if a.max_abs() > 0.0 {
        zero_tol * inv_scale / a.max_abs()
    } else {
        zero_tol
    };

    let mut failures = Vec::new();
    for i in 0..n {
        let d = inv[i * n + i];
        if d > tol {
            failures.push(Failure {
                condition: Condition::InverseDiagonalPositive,
                indices: vec![i],
                value: d,
            });
        }
        for j in (i + 1)..n {
            let v = inv[i * n + j];
            if v < -tol {
                failures.push(Failure {
                    condition: Condition::InverseOffDiagonalNegative,
                    indices: vec![i, j],
                    value: v,
                });
            }
        }
        let s: f64 = inv[i * n..(i + 1) * n].iter().sum();
        if s < -tol {
            failures.push(Failure {
                condition: Condition::InverseRowSumNegative,
                indices: vec![i],
                value: s,
            });
        }
    }
    Ok(HypothesisReport {
        h2_pass: Some(failures.is_empty()),
        failures,
        ..Default::default()
    })
}

/// Checks the entrywise consequence of (H1)∧(H2):
/// `a_ij > 0` and `max(a_ii, a_jj) ≤ a_ij` for all `i ≠ j`.
///
/// A failure here on a matrix that passed both hypotheses points at a
/// tolerance problem, not at a mathematical counterexample.
pub fn check_lemma21(a: &CoefficientMatrix) -> Result<HypothesisReport, MatrixError> {
    let tol = a.default_zero_tol();
    let pre = check_h1(a, tol);
    if pre.h1_pass != Some(true) || check_h2(a, tol)?.h2_pass != Some(true) {
        return Err(MatrixError::HypothesesNotSatisfied);
    }
    Ok(lemma21_entries(a, tol))
}

fn lemma21_entries(a: &CoefficientMatrix, tol: f64) -> HypothesisReport {
    let n = a.n();
    let mut failures = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let c = a.get(i, j);
            if c <= 0.0 {
                failures.push(Failure {
                    condition: Condition::OffDiagonalNotPositive,
                    indices: vec![i, j],
                    value: c,
                });
            }
            let d = a.get(i, i).max(a.get(j, j));
            if d > c + tol {
                failures.push(Failure {
                    condition: Condition::DiagonalExceedsOffDiagonal,
                    indices: vec![i, j],
                    value: d - c,
                });
            }
        }
    }
    HypothesisReport {
        lemma21_pass: Some(failures.is_empty()),
        failures,
        ..Default::default()
    }
}

/// Runs (H1), then (H2) when the matrix is invertible, then the
/// entrywise consequence check when both hold.
pub fn check_hypotheses(a: &CoefficientMatrix, zero_tol: f64) -> HypothesisReport {
    let mut report = check_h1(a, zero_tol);
    if let Ok(h2) = check_h2(a, zero_tol) {
        report = report.merge(h2);
    }
    if report.h1_and_h2() {
        report = report.merge(lemma21_entries(a, zero_tol));
    }
    report
}
