//! Dense square matrices and row-stochastic matrices.
//!
//! Everything here is desk-scale: matrices are stored densely in row-major
//! order and products are `O(n^3)`. Sums along rows and inner products use
//! Neumaier compensated summation, so sums of nonnegative terms that are all
//! zero stay exactly zero and row sums of long products drift slowly.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use thiserror::Error;

/// Row-sum tolerance for matrices built or normalized by this crate.
pub const STRICT_TOLERANCE: f64 = 1e-12;

/// Row-sum tolerance for hand-typed matrices printed to four decimals.
pub const RELAXED_TOLERANCE: f64 = 5e-4;

const SPECTRAL_TOLERANCE: f64 = 1e-12;
const SPECTRAL_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix must have at least one row")]
    Empty,
    #[error("{len} entries do not form a square matrix")]
    NotSquare { len: usize },
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("row {row} sums to zero")]
    ZeroRow { row: usize },
    #[error("entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("not row-stochastic within {tolerance:e}: worst row {row} deviates by {deviation:e}")]
    NotStochastic { row: usize, deviation: f64, tolerance: f64 },
    #[error("index ({row}, {col}) out of range for a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
}

/// Sum with Neumaier compensation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// A dense square matrix of `f64`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds an `n x n` matrix from row-major data.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        if data.len() != n * n {
            return Err(MatrixError::NotSquare { len: data.len() });
        }
        for (idx, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatrixError::NonFinite { row: idx / n, col: idx % n });
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix from a list of rows; all rows must have length `rows.len()`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n {
                return Err(MatrixError::NotSquare { len: n * r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<f64, MatrixError> {
        if i >= self.n || j >= self.n {
            return Err(MatrixError::IndexOutOfRange { row: i, col: j, n: self.n });
        }
        Ok(self.get(i, j))
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows().map(|r| compensated_sum(r.iter().copied())).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.data[i * n + j];
            }
        }
        Self { n, data: out }
    }

    fn check_same_dim(&self, other: &Matrix) -> Result<(), MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// Ordinary matrix product with compensated inner products.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.check_same_dim(other)?;
        let n = self.n;
        let bt = other.transpose();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let a = self.row(i);
            for j in 0..n {
                let b = bt.row(j);
                out[i * n + j] = compensated_sum(a.iter().zip(b).map(|(x, y)| x * y));
            }
        }
        Ok(Matrix { n, data: out })
    }

    /// Row vector times matrix, `x M`.
    pub fn left_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match matrix dimension");
        (0..self.n)
            .map(|j| compensated_sum((0..self.n).map(|k| x[k] * self.get(k, j))))
            .collect()
    }

    /// Matrix times column vector, `M x`.
    pub fn right_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match matrix dimension");
        self.rows()
            .map(|r| compensated_sum(r.iter().zip(x).map(|(a, b)| a * b)))
            .collect()
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { n: self.n, data })
    }

    /// `weight * self + (1 - weight) * other`, entrywise.
    pub fn blend(&self, weight: f64, other: &Matrix) -> Result<Matrix, MatrixError> {
        self.check_same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| weight * a + (1.0 - weight) * b)
            .collect();
        Ok(Matrix { n: self.n, data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        // Scaled to avoid overflow on large entries.
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let ss = compensated_sum(self.data.iter().map(|v| (v / scale) * (v / scale)));
        scale * ss.sqrt()
    }

    /// Largest singular value, by power iteration on `M^T M`.
    pub fn spectral(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.n;
        let scaled = Matrix { n, data: self.data.iter().map(|v| v / scale).collect() };
        let mt = scaled.transpose();
        // Deterministic start vector with no special alignment.
        let mut v: Vec<f64> = (0..n).map(|j| 1.0 + 0.618_033_988_749_895 * ((j as f64 + 1.0) * 0.754_877_666).fract()).collect();
        normalize_l2(&mut v);
        let mut estimate = 0.0;
        for _ in 0..SPECTRAL_MAX_SWEEPS {
            let w = mt.right_mul_vec(&scaled.right_mul_vec(&v));
            let next = l2(&w);
            if next == 0.0 {
                // The start vector hit the null space; fall back to coordinate starts.
                return scale * coordinate_spectral(&scaled, &mt);
            }
            v = w.into_iter().map(|x| x / next).collect();
            if (next - estimate).abs() <= SPECTRAL_TOLERANCE * next {
                estimate = next;
                break;
            }
            estimate = next;
        }
        scale * estimate.sqrt()
    }
}

fn l2(v: &[f64]) -> f64 {
    compensated_sum(v.iter().map(|x| x * x)).sqrt()
}

fn normalize_l2(v: &mut [f64]) {
    let s = l2(v);
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

fn coordinate_spectral(m: &Matrix, mt: &Matrix) -> f64 {
    let n = m.dim();
    let mut best: f64 = 0.0;
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        let mut estimate = 0.0;
        for _ in 0..SPECTRAL_MAX_SWEEPS {
            let w = mt.right_mul_vec(&m.right_mul_vec(&v));
            let next = l2(&w);
            if next == 0.0 {
                break;
            }
            v = w.into_iter().map(|x| x / next).collect();
            if (next - estimate).abs() <= SPECTRAL_TOLERANCE * next {
                estimate = next;
                break;
            }
            estimate = next;
        }
        best = best.max(estimate.sqrt());
    }
    best
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.rows() {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.4}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Which norm measures the difference between successive iterates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum MatrixNorm {
    /// Entrywise 2-norm.
    #[default]
    Frobenius,
    /// Operator 2-norm (largest singular value).
    Spectral,
    /// Largest absolute entry.
    MaxEntrywise,
}

impl MatrixNorm {
    pub const ALL: [MatrixNorm; 3] = [MatrixNorm::Frobenius, MatrixNorm::Spectral, MatrixNorm::MaxEntrywise];

    pub fn as_str(self) -> &'static str {
        match self {
            MatrixNorm::Frobenius => "frobenius",
            MatrixNorm::Spectral => "spectral",
            MatrixNorm::MaxEntrywise => "max",
        }
    }

    pub fn of(self, m: &Matrix) -> f64 {
        match self {
            MatrixNorm::Frobenius => m.frobenius(),
            MatrixNorm::Spectral => m.spectral(),
            MatrixNorm::MaxEntrywise => m.max_abs(),
        }
    }
}

impl fmt::Display for MatrixNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatrixNorm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frobenius" | "fro" => Ok(MatrixNorm::Frobenius),
            "spectral" => Ok(MatrixNorm::Spectral),
            "max" | "max-entrywise" => Ok(MatrixNorm::MaxEntrywise),
            other => Err(format!("unknown norm `{other}` (expected frobenius, spectral or max)")),
        }
    }
}

/// Norm of `f - g`.
pub fn diff_norm(f: &Matrix, g: &Matrix, norm: MatrixNorm) -> Result<f64, MatrixError> {
    Ok(norm.of(&f.sub(g)?))
}

/// Square nonnegative edge-weight matrix with no isolated rows.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMatrix(Matrix);

impl AffinityMatrix {
    pub fn new(m: Matrix) -> Result<Self, MatrixError> {
        check_nonnegative(&m)?;
        if let Some(row) = m.row_sums().iter().position(|s| *s <= 0.0) {
            return Err(MatrixError::ZeroRow { row });
        }
        Ok(Self(m))
    }

    /// Row sums, i.e. the diagonal of the degree matrix.
    pub fn degrees(&self) -> Vec<f64> {
        self.0.row_sums()
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }
}

impl Deref for AffinityMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

fn check_nonnegative(m: &Matrix) -> Result<(), MatrixError> {
    let n = m.dim();
    for (idx, v) in m.as_slice().iter().enumerate() {
        if *v < 0.0 {
            return Err(MatrixError::NegativeEntry { row: idx / n, col: idx % n, value: *v });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToleranceClass {
    Strict,
    Relaxed,
}

impl ToleranceClass {
    pub fn tolerance(self) -> f64 {
        match self {
            ToleranceClass::Strict => STRICT_TOLERANCE,
            ToleranceClass::Relaxed => RELAXED_TOLERANCE,
        }
    }

    fn looser(self, other: ToleranceClass) -> ToleranceClass {
        if self == ToleranceClass::Relaxed || other == ToleranceClass::Relaxed {
            ToleranceClass::Relaxed
        } else {
            ToleranceClass::Strict
        }
    }
}

/// A row-stochastic matrix.
///
/// Products of stochastic matrices stay in this type without re-validation;
/// their row sums carry only accumulated rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    m: Matrix,
    class: ToleranceClass,
}

impl StochasticMatrix {
    pub fn new(m: Matrix, class: ToleranceClass) -> Result<Self, MatrixError> {
        let tolerance = class.tolerance();
        let report = validate_stochastic(&m, tolerance);
        if !report.passed {
            return Err(MatrixError::NotStochastic {
                row: report.worst_row,
                deviation: report.worst_deviation,
                tolerance,
            });
        }
        Ok(Self { m, class })
    }

    pub fn strict(m: Matrix) -> Result<Self, MatrixError> {
        Self::new(m, ToleranceClass::Strict)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        Self::strict(Matrix::from_rows(rows)?)
    }

    /// Accepts a matrix within the relaxed tolerance, then renormalizes its rows.
    pub fn ingest_rounded(m: Matrix) -> Result<Self, MatrixError> {
        let relaxed = Self::new(m, ToleranceClass::Relaxed)?;
        normalize_rows(&relaxed.m)
    }

    pub fn identity(n: usize) -> Self {
        Self { m: Matrix::identity(n), class: ToleranceClass::Strict }
    }

    pub(crate) fn from_product(m: Matrix, class: ToleranceClass) -> Self {
        Self { m, class }
    }

    pub fn class(&self) -> ToleranceClass {
        self.class
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    /// `weight * self + (1 - weight) * other`; stochastic for `weight` in [0, 1].
    pub fn blend(&self, weight: f64, other: &StochasticMatrix) -> Result<StochasticMatrix, MatrixError> {
        let m = self.m.blend(weight, &other.m)?;
        Ok(Self::from_product(m, self.class.looser(other.class)))
    }

    /// `self^k` for `k >= 1`; `k == 0` yields the identity.
    pub fn power(&self, k: usize) -> StochasticMatrix {
        let mut acc = StochasticMatrix::identity(self.dim());
        for _ in 0..k {
            acc = matmul(&acc, self).expect("same dimension");
        }
        acc
    }

    /// True when all rows are identical (a rank-one law).
    pub fn has_identical_rows(&self, tol: f64) -> bool {
        let first = self.m.row(0);
        self.m.rows().all(|r| r.iter().zip(first).all(|(a, b)| (a - b).abs() <= tol))
    }
}

impl Deref for StochasticMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.m
    }
}

/// `P = D^{-1} A`: each row of `A` divided by its sum.
pub fn build_transition(a: &AffinityMatrix) -> Result<StochasticMatrix, MatrixError> {
    normalize_rows(a)
}

/// Product of two stochastic matrices of equal dimension.
pub fn matmul(f: &StochasticMatrix, t: &StochasticMatrix) -> Result<StochasticMatrix, MatrixError> {
    let m = f.m.matmul(&t.m)?;
    Ok(StochasticMatrix::from_product(m, f.class.looser(t.class)))
}

/// Divides every row of a nonnegative matrix by its sum.
pub fn normalize_rows(m: &Matrix) -> Result<StochasticMatrix, MatrixError> {
    check_nonnegative(m)?;
    let n = m.dim();
    let mut data = Vec::with_capacity(n * n);
    for (i, r) in m.rows().enumerate() {
        let s = compensated_sum(r.iter().copied());
        if s <= 0.0 {
            return Err(MatrixError::ZeroRow { row: i });
        }
        data.extend(r.iter().map(|v| v / s));
    }
    Ok(StochasticMatrix::from_product(Matrix { n, data }, ToleranceClass::Strict))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    pub tolerance: f64,
    pub worst_row: usize,
    /// Largest `|row sum - 1|` over all rows.
    pub worst_deviation: f64,
    /// Rows whose sums miss 1 by more than the tolerance.
    pub offending_rows: Vec<usize>,
    /// Entries outside `[-tol, 1 + tol]`.
    pub offending_entries: Vec<(usize, usize)>,
}

pub fn validate_stochastic(m: &Matrix, tol: f64) -> ValidationReport {
    let mut worst_row = 0;
    let mut worst_deviation: f64 = 0.0;
    let mut offending_rows = Vec::new();
    let mut offending_entries = Vec::new();
    for (i, r) in m.rows().enumerate() {
        let dev = (compensated_sum(r.iter().copied()) - 1.0).abs();
        if dev > worst_deviation {
            worst_deviation = dev;
            worst_row = i;
        }
        if dev > tol {
            offending_rows.push(i);
        }
        for (j, v) in r.iter().enumerate() {
            if *v < -tol || *v > 1.0 + tol {
                offending_entries.push((i, j));
            }
        }
    }
    ValidationReport {
        passed: offending_rows.is_empty() && offending_entries.is_empty(),
        tolerance: tol,
        worst_row,
        worst_deviation,
        offending_rows,
        offending_entries,
    }
}
