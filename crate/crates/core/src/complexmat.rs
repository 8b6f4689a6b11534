//! Dense complex matrices, the slack-amplitude preparation transform, and the
//! classical reference operations every circuit result is checked against.
//!
//! A matrix here is always square with side `N = 2^n`. Rectangular data is
//! brought into that shape by [`pad_to_square`] before anything else touches it.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute per-entry tolerance for comparing circuit output with the oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Tolerance on `|b|^2 + sum |a~|^2 = 1` for a prepared matrix.
pub const PREPARED_NORM_TOLERANCE: f64 = 1e-12;

/// Slack parameter used when the caller does not pick one.
pub const DEFAULT_SLACK: f64 = 1.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A dense `2^n x 2^n` complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix of register width `n` from row-major entries.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = side_for(n)?;
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for n = {n}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        check_finite(&entries)?;
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        let dim = side_for(n)?;
        Ok(Self {
            n,
            entries: vec![ZERO; dim * dim],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for j in 0..m.dim() {
            m[(j, j)] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Builds a matrix from square rows whose side is a power of two.
    ///
    /// Use [`pad_to_square`] for anything else.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "row count {dim} is not a positive power of two"
            )));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {dim}",
                row.len()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    /// Builds a matrix from real parts only.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Register width: the matrix side is `2^n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Matrix side `N = 2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.dim())
    }

    /// `sum_{jk} |a_jk|^2`.
    pub fn sum_sq(&self) -> f64 {
        self.entries.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let dim = self.dim();
        let mut out = self.clone();
        for j in 0..dim {
            for k in 0..dim {
                out[(j, k)] = self[(k, j)];
            }
        }
        out
    }

    /// Largest entrywise deviation and where it occurs.
    pub fn max_abs_diff(&self, other: &Self) -> Result<(f64, (usize, usize))> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot compare n = {} with n = {}",
                self.n, other.n
            )));
        }
        let dim = self.dim();
        let mut worst = (0.0, (0, 0));
        for (idx, (a, b)) in self.entries.iter().zip(&other.entries).enumerate() {
            let d = (a - b).norm();
            if d > worst.0 || d.is_nan() {
                worst = (d, (idx / dim, idx % dim));
            }
        }
        Ok(worst)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (j, k): (usize, usize)) -> &Complex64 {
        &self.entries[j * self.dim() + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut Complex64 {
        let dim = self.dim();
        &mut self.entries[j * dim + k]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

fn side_for(n: usize) -> Result<usize> {
    if n >= usize::BITS as usize / 2 {
        return Err(Error::Dimension(format!("register width n = {n} is too large")));
    }
    Ok(1 << n)
}

fn check_finite(entries: &[Complex64]) -> Result<()> {
    match entries.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
        Some(i) => Err(Error::Validation(format!("entry {i} is not finite"))),
        None => Ok(()),
    }
}

/// Pads a (possibly rectangular) matrix with zero rows and columns up to the
/// smallest `2^n x 2^n` that holds it.
pub fn pad_to_square(rows: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    if rows.is_empty() {
        return Err(Error::Dimension("matrix has no rows".into()));
    }
    let cols = rows[0].len();
    if cols == 0 {
        return Err(Error::Dimension("matrix has no columns".into()));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::Dimension(format!(
            "row {i} has {} entries, expected {cols}",
            row.len()
        )));
    }
    let dim = rows.len().max(cols).next_power_of_two();
    let n = dim.trailing_zeros() as usize;
    let mut m = ComplexMatrix::zeros(n)?;
    for (j, row) in rows.iter().enumerate() {
        check_finite(row)?;
        for (k, &a) in row.iter().enumerate() {
            m[(j, k)] = a;
        }
    }
    Ok(m)
}

/// A matrix scaled so that its squared-magnitude sum is strictly below one,
/// together with the slack amplitude `b` that completes the unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedMatrix {
    matrix: ComplexMatrix,
    b: Complex64,
    s_original: f64,
    c: f64,
}

impl PreparedMatrix {
    /// Reassembles a prepared matrix (e.g. read from disk) and checks both
    /// normalization invariants.
    pub fn from_parts(matrix: ComplexMatrix, b: Complex64, s_original: f64, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("slack parameter c = {c} must be positive")));
        }
        if !(s_original >= 0.0 && s_original.is_finite()) {
            return Err(Error::Validation(format!("s_original = {s_original} is invalid")));
        }
        if !(b.re.is_finite() && b.im.is_finite()) {
            return Err(Error::Validation("slack amplitude b is not finite".into()));
        }
        let weight = matrix.sum_sq();
        if weight >= 1.0 {
            return Err(Error::Validation(format!(
                "prepared matrix weight {weight} is not strictly below 1"
            )));
        }
        let defect = (b.norm_sqr() + weight - 1.0).abs();
        if defect > PREPARED_NORM_TOLERANCE {
            return Err(Error::Validation(format!(
                "|b|^2 + sum |a|^2 misses 1 by {defect:e}"
            )));
        }
        Ok(Self {
            matrix,
            b,
            s_original,
            c,
        })
    }

    /// The scaled matrix `A / (s + c)`.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// `s = sum |a_jk|^2` of the unscaled input.
    pub fn s_original(&self) -> f64 {
        self.s_original
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Factor `s + c` that maps the prepared matrix back to the original.
    pub fn scale_back(&self) -> f64 {
        self.s_original + self.c
    }
}

/// Scales `a` by `1 / (s + c)` and picks the nonnegative real slack amplitude.
pub fn prepare(a: &ComplexMatrix, c: f64) -> Result<PreparedMatrix> {
    prepare_with_phase(a, c, 0.0)
}

/// Like [`prepare`], but the slack amplitude is `|b| e^{i phase}`.
pub fn prepare_with_phase(a: &ComplexMatrix, c: f64, phase: f64) -> Result<PreparedMatrix> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("slack parameter c = {c} must be positive")));
    }
    if !phase.is_finite() {
        return Err(Error::Parameter("slack phase must be finite".into()));
    }
    check_finite(a.entries())?;
    let s = a.sum_sq();
    if !s.is_finite() {
        return Err(Error::Validation("sum of squared magnitudes overflows".into()));
    }
    // s / (s + c)^2 < 1 needs c > sqrt(s) - s, which is at most 1/4
    if s >= (s + c) * (s + c) {
        return Err(Error::Parameter(format!(
            "slack parameter c = {c} is too small for squared-magnitude sum {s}; need c > {}",
            s.sqrt() - s
        )));
    }
    let scaled = a.scale(1.0 / (s + c));
    let b_abs = (1.0 - scaled.sum_sq()).max(0.0).sqrt();
    PreparedMatrix::from_parts(scaled, Complex64::from_polar(b_abs, phase), s, c)
}

/// Classical product `a b`, one entry at a time.
pub fn matmul_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.n() != b.n() {
        return Err(Error::Dimension(format!(
            "cannot multiply n = {} by n = {}",
            a.n(),
            b.n()
        )));
    }
    let dim = a.dim();
    let mut out = ComplexMatrix::zeros(a.n())?;
    for j in 0..dim {
        for k in 0..dim {
            let mut acc = ZERO;
            for l in 0..dim {
                acc += a[(j, l)] * b[(l, k)];
            }
            out[(j, k)] = acc;
        }
    }
    Ok(out)
}

/// Conjugate transpose.
pub fn dagger_oracle(a: &ComplexMatrix) -> ComplexMatrix {
    a.transpose().conj()
}
