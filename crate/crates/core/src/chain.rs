//! Structural analysis of a stochastic matrix as a finite Markov chain.
//!
//! Edges are the exactly-positive entries; no thresholding is applied, so a
//! tiny but legitimate transition probability still counts as an edge.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::stochmat::{compensated_sum, Matrix, MatrixError, StochasticMatrix};

const STATIONARY_MAX_ITERATIONS: usize = 1_000_000;
const STATIONARY_STEP_TOLERANCE: f64 = 1e-15;
const METHOD_AGREEMENT: f64 = 1e-10;
const SUBDOMINANT_TOLERANCE: f64 = 1e-9;
const SUBDOMINANT_MAX_ITERATIONS: usize = 10_000;
const POWER_LIMIT_MAX_POWERS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("chain is not irreducible ({classes} communication classes)")]
    NotIrreducible { classes: usize },
    #[error("matrix is not regular; the stationary vector need not be unique")]
    NotRegular,
    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("power iteration and linear solve disagree by {gap:e}")]
    MethodsDisagree { gap: f64 },
    #[error("linear system for the stationary vector is singular")]
    Singular,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Communication classes: strongly connected components of the graph with an
/// edge `i -> j` whenever `T(i, j) > 0`.
///
/// Each class is sorted, and classes are ordered by their smallest state.
pub fn communication_classes(t: &Matrix) -> Vec<Vec<usize>> {
    let n = t.dim();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if t.get(i, j) > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|ix| ix.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    classes.sort_unstable_by_key(|c| c[0]);
    classes
}

pub fn is_irreducible(t: &Matrix) -> bool {
    communication_classes(t).len() == 1
}

/// Period of an irreducible chain.
///
/// Labels states with their BFS depth from state 0; the period is the gcd of
/// `depth(u) + 1 - depth(v)` over all edges `u -> v`.
pub fn period(t: &Matrix) -> Result<usize, ChainError> {
    let classes = communication_classes(t).len();
    if classes != 1 {
        return Err(ChainError::NotIrreducible { classes });
    }
    let n = t.dim();
    let mut depth = vec![usize::MAX; n];
    depth[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if t.get(u, v) > 0.0 && depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0usize;
    for u in 0..n {
        for v in 0..n {
            if t.get(u, v) > 0.0 {
                let diff = (depth[u] as i64 + 1 - depth[v] as i64).unsigned_abs() as usize;
                g = gcd(g, diff);
            }
        }
    }
    // An irreducible chain always has a cycle, so g > 0.
    Ok(g.max(1))
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Support pattern of a nonnegative matrix, one bitset per row.
#[derive(Clone, PartialEq, Eq)]
struct Pattern {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Pattern {
    fn of(t: &Matrix) -> Self {
        let n = t.dim();
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for i in 0..n {
            for j in 0..n {
                if t.get(i, j) > 0.0 {
                    bits[i * words + j / 64] |= 1 << (j % 64);
                }
            }
        }
        Self { n, words, bits }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.row(i)[j / 64] >> (j % 64) & 1 == 1
    }

    /// Pattern of the product `self * other`.
    fn times(&self, other: &Pattern) -> Pattern {
        let mut bits = vec![0u64; self.bits.len()];
        for i in 0..self.n {
            let out = &mut bits[i * self.words..(i + 1) * self.words];
            for k in 0..self.n {
                if self.has(i, k) {
                    for (o, w) in out.iter_mut().zip(other.row(k)) {
                        *o |= w;
                    }
                }
            }
        }
        Pattern { n: self.n, words: self.words, bits }
    }

    fn is_full(&self) -> bool {
        let tail = self.n % 64;
        (0..self.n).all(|i| {
            let r = self.row(i);
            r.iter().enumerate().all(|(w, bits)| {
                if w + 1 == self.words && tail != 0 {
                    *bits == (1u64 << tail) - 1
                } else {
                    *bits == u64::MAX
                }
            })
        })
    }
}

/// Smallest `k` with every entry of `T^k` strictly positive, if any.
///
/// Searches `k = 1 ..= (n-1)^2 + 1`. Positivity of a power of a nonnegative
/// matrix depends only on the support, so the search runs on bit patterns.
pub fn regularity_index(t: &Matrix) -> Option<usize> {
    let n = t.dim();
    let base = Pattern::of(t);
    let bound = (n - 1) * (n - 1) + 1;
    if base.is_full() {
        return Some(1);
    }
    // Primitive iff irreducible and aperiodic; skip the search otherwise.
    if !matches!(period(t), Ok(1)) {
        return None;
    }
    let mut acc = base.clone();
    for k in 2..=bound {
        acc = acc.times(&base);
        if acc.is_full() {
            return Some(k);
        }
    }
    None
}

/// `(regular, k)` where `k` is the regularity index when regular.
pub fn is_regular(t: &Matrix) -> (bool, Option<usize>) {
    let k = regularity_index(t);
    (k.is_some(), k)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainClassification {
    pub classes: Vec<Vec<usize>>,
    pub irreducible: bool,
    /// Defined for irreducible chains only.
    pub period: Option<usize>,
    pub regular: bool,
    pub regularity_index: Option<usize>,
}

pub fn classify(t: &Matrix) -> ChainClassification {
    let classes = communication_classes(t);
    let irreducible = classes.len() == 1;
    let period = if irreducible { period(t).ok() } else { None };
    let regularity_index = regularity_index(t);
    ChainClassification {
        classes,
        irreducible,
        period,
        regular: regularity_index.is_some(),
        regularity_index,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationaryMethod {
    PowerIteration,
    LinearSolve,
}

impl StationaryMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            StationaryMethod::PowerIteration => "power-iteration",
            StationaryMethod::LinearSolve => "linear-solve",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryResult {
    pub pi: Vec<f64>,
    /// `max_j |(pi T)_j - pi_j|`.
    pub residual: f64,
    pub method: StationaryMethod,
}

fn residual(t: &Matrix, pi: &[f64]) -> f64 {
    t.left_mul_vec(pi).iter().zip(pi).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
}

fn normalize_l1(v: &mut [f64]) {
    let s = compensated_sum(v.iter().copied());
    v.iter_mut().for_each(|x| *x /= s);
}

/// Left fixed vector by power iteration from the uniform vector.
pub fn stationary_power(t: &Matrix) -> Result<StationaryResult, ChainError> {
    let n = t.dim();
    let mut x = vec![1.0 / n as f64; n];
    let tolerance = STATIONARY_STEP_TOLERANCE.max(4.0 * n as f64 * f64::EPSILON);
    let mut previous = f64::INFINITY;
    for _ in 0..STATIONARY_MAX_ITERATIONS {
        let mut next = t.left_mul_vec(&x);
        normalize_l1(&mut next);
        let step = next.iter().zip(&x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        // Below 1e-13 a step that no longer shrinks is rounding noise.
        if step <= tolerance || (step < 1e-13 && step >= previous) {
            let residual = residual(t, &x);
            return Ok(StationaryResult { pi: x, residual, method: StationaryMethod::PowerIteration });
        }
        previous = step;
    }
    Err(ChainError::NoConvergence { what: "stationary power iteration", iterations: STATIONARY_MAX_ITERATIONS })
}

/// Solves `pi (T - I) = 0` with one equation replaced by `sum(pi) = 1`.
pub fn stationary_linear(t: &Matrix) -> Result<StationaryResult, ChainError> {
    let n = t.dim();
    // Row j of the system is column j of (T - I).
    let mut a = DMatrix::from_fn(n, n, |j, i| t.get(i, j) - if i == j { 1.0 } else { 0.0 });
    for i in 0..n {
        a[(n - 1, i)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let sol = a.lu().solve(&b).ok_or(ChainError::Singular)?;
    let mut pi: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
    normalize_l1(&mut pi);
    let residual = residual(t, &pi);
    Ok(StationaryResult { pi, residual, method: StationaryMethod::LinearSolve })
}

/// Stationary vector of a regular chain.
///
/// Both routes are computed and must agree within 1e-10; the one with the
/// smaller residual is returned.
pub fn stationary(t: &Matrix) -> Result<StationaryResult, ChainError> {
    if regularity_index(t).is_none() {
        return Err(ChainError::NotRegular);
    }
    let power = stationary_power(t)?;
    let linear = stationary_linear(t)?;
    let gap = power.pi.iter().zip(&linear.pi).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if gap > METHOD_AGREEMENT {
        return Err(ChainError::MethodsDisagree { gap });
    }
    Ok(if linear.residual < power.residual { linear } else { power })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerLimit {
    pub limit: StochasticMatrix,
    /// Exponent `n` of the returned power `T^n`.
    pub power: usize,
}

/// Largest per-column spread `max_j (max_i M_ij - min_i M_ij)`.
fn row_spread(m: &Matrix) -> f64 {
    let n = m.dim();
    (0..n)
        .map(|j| {
            let col = (0..n).map(|i| m.get(i, j));
            col.clone().fold(f64::MIN, f64::max) - col.fold(f64::MAX, f64::min)
        })
        .fold(0.0, f64::max)
}

/// `T^n` for the first `n` with `max |T^{n+1} - T^n| < tol` and rows of
/// `T^n` agreeing within `tol`.
///
/// `pi` is a convex combination of the rows of `T^n`, so the second
/// condition puts every row within `tol` of `pi`; the first alone does not
/// when the chain mixes slowly.
pub fn power_limit(t: &StochasticMatrix, tol: f64) -> Result<PowerLimit, ChainError> {
    if regularity_index(t).is_none() {
        return Err(ChainError::NotRegular);
    }
    let mut current = t.clone();
    for n in 1..=POWER_LIMIT_MAX_POWERS {
        let next = crate::stochmat::matmul(&current, t)?;
        if next.sub(&current)?.max_abs() < tol && row_spread(&current) < tol {
            return Ok(PowerLimit { limit: current, power: n });
        }
        current = next;
    }
    Err(ChainError::NoConvergence { what: "matrix powers", iterations: POWER_LIMIT_MAX_POWERS })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumSummary {
    pub dominant: f64,
    pub subdominant_modulus: f64,
    pub gap: f64,
}

/// Some probability vector fixed by `T`; unique when `T` is regular.
///
/// Least-squares solution of `pi (T - I) = 0, sum(pi) = 1`, which also
/// covers reducible chains.
fn left_fixed_vector(t: &Matrix) -> Result<Vec<f64>, ChainError> {
    let n = t.dim();
    let a = DMatrix::from_fn(n + 1, n, |r, i| {
        if r == n {
            1.0
        } else {
            t.get(i, r) - if i == r { 1.0 } else { 0.0 }
        }
    });
    let mut b = DVector::zeros(n + 1);
    b[n] = 1.0;
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-12).map_err(|_| ChainError::Singular)?;
    Ok(sol.iter().copied().collect())
}

/// Moduli of the roots of `z^2 - a z - b`.
fn quadratic_modulus(a: f64, b: f64) -> f64 {
    let disc = a * a + 4.0 * b;
    if disc >= 0.0 {
        let s = disc.sqrt();
        ((a + s) / 2.0).abs().max(((a - s) / 2.0).abs())
    } else {
        // Complex pair with product -b.
        (-b).sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Fits `v1 = mu v0` and, failing that, `v2 = a v1 + b v0`.
/// Returns (modulus estimate, relative residual of the accepted fit).
fn recurrence_fit(v0: &[f64], v1: &[f64], v2: &[f64]) -> (f64, f64) {
    let n1 = dot(v1, v1).sqrt();
    let mu = dot(v1, v0) / dot(v0, v0);
    let r1: f64 = v1.iter().zip(v0).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt() / n1;
    if r1 <= SUBDOMINANT_TOLERANCE {
        return (mu.abs(), r1);
    }
    // Normal equations for [v1 v0] [a b]^T = v2.
    let (g11, g12, g22) = (dot(v1, v1), dot(v1, v0), dot(v0, v0));
    let (h1, h2) = (dot(v1, v2), dot(v0, v2));
    let det = g11 * g22 - g12 * g12;
    if det.abs() <= f64::EPSILON * g11 * g22 {
        return (mu.abs(), r1);
    }
    let a = (h1 * g22 - h2 * g12) / det;
    let b = (g11 * h2 - g12 * h1) / det;
    let n2 = dot(v2, v2).sqrt();
    let r2: f64 = (0..v0.len()).map(|k| (v2[k] - a * v1[k] - b * v0[k]).powi(2)).sum::<f64>().sqrt() / n2;
    (quadratic_modulus(a, b), r1.min(r2))
}

/// `|lambda_2|`: spectral radius of `T - 1 pi`, by power iteration.
///
/// Deflating with the fixed vector removes the eigenvalue 1 belonging to the
/// all-ones right eigenvector and keeps every other eigenvalue. The modulus is
/// read off a one- or two-term linear recurrence fitted to successive
/// iterates, which handles real and complex-conjugate dominant pairs alike.
pub fn subdominant_modulus(t: &Matrix) -> Result<SpectrumSummary, ChainError> {
    let n = t.dim();
    let pi = left_fixed_vector(t)?;
    let dominant = dot(&t.left_mul_vec(&pi), &pi) / dot(&pi, &pi);
    let deflated = Matrix::new(n, (0..n * n).map(|idx| t.get(idx / n, idx % n) - pi[idx % n]).collect())?;
    let summary = |m: f64| SpectrumSummary { dominant, subdominant_modulus: m, gap: 1.0 - m };
    if n == 1 {
        return Ok(summary(0.0));
    }

    let mut v: Vec<f64> = (0..n).map(|j| 1.0 + ((j as f64 + 1.0) * 0.754_877_666_246_692_7).fract()).collect();
    let mut previous = f64::NAN;
    for _ in 0..SUBDOMINANT_MAX_ITERATIONS {
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            return Ok(summary(0.0));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let v1 = deflated.right_mul_vec(&v);
        if dot(&v1, &v1).sqrt() <= 1e-13 {
            return Ok(summary(0.0));
        }
        let v2 = deflated.right_mul_vec(&v1);
        let (estimate, fit_residual) = recurrence_fit(&v, &v1, &v2);
        if fit_residual <= SUBDOMINANT_TOLERANCE && (estimate - previous).abs() <= 1e-12 {
            return Ok(summary(estimate.min(1.0)));
        }
        if fit_residual <= 1e-13 {
            return Ok(summary(estimate.min(1.0)));
        }
        previous = estimate;
        v = v1;
    }
    // Three or more eigenvalues of nearly equal modulus defeat the two-term
    // fit; take the spectral radius of the deflated matrix from its Schur form.
    deflated_radius(&deflated).map(|m| summary(m.min(1.0)))
}

fn deflated_radius(b: &Matrix) -> Result<f64, ChainError> {
    let n = b.dim();
    let schur = DMatrix::from_row_slice(n, n, b.as_slice())
        .try_schur(f64::EPSILON, SUBDOMINANT_MAX_ITERATIONS)
        .ok_or(ChainError::NoConvergence { what: "subdominant modulus", iterations: SUBDOMINANT_MAX_ITERATIONS })?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `key: value` summary used by `gwforest analyze`.
///
/// Keys: classes, irreducible, period, regular, regularity_index, pi,
/// residual, subdominant_modulus. States are 0-based; `classes_1based`
/// repeats the partition with 1-based labels.
pub fn analysis_summary(t: &Matrix) -> String {
    let c = classify(t);
    let fmt_classes = |offset: usize| {
        c.classes
            .iter()
            .map(|cl| format!("{{{}}}", cl.iter().map(|s| (s + offset).to_string()).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let opt = |v: Option<usize>| v.map_or_else(|| "none".to_string(), |k| k.to_string());
    let mut out = String::new();
    let _ = writeln!(out, "classes: {}", fmt_classes(0));
    let _ = writeln!(out, "classes_1based: {}", fmt_classes(1));
    let _ = writeln!(out, "irreducible: {}", c.irreducible);
    let _ = writeln!(out, "period: {}", opt(c.period));
    let _ = writeln!(out, "regular: {}", c.regular);
    let _ = writeln!(out, "regularity_index: {}", opt(c.regularity_index));
    match stationary(t) {
        Ok(s) => {
            let pi: Vec<String> = s.pi.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "pi: {}", pi.join(","));
            let _ = writeln!(out, "residual: {:.16e}", s.residual);
        }
        Err(_) => {
            let _ = writeln!(out, "pi: none");
            let _ = writeln!(out, "residual: none");
        }
    }
    match subdominant_modulus(t) {
        Ok(s) => {
            let _ = writeln!(out, "subdominant_modulus: {:.16e}", s.subdominant_modulus);
        }
        Err(_) => {
            let _ = writeln!(out, "subdominant_modulus: none");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exact_p() -> Matrix {
        Matrix::from_rows(&[[0.0, 5.0 / 8.0, 3.0 / 8.0], [5.0 / 13.0, 0.0, 8.0 / 13.0], [3.0 / 11.0, 8.0 / 11.0, 0.0]]).unwrap()
    }

    fn swap() -> Matrix {
        Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    #[test]
    fn classes_of_examples() {
        assert_eq!(communication_classes(&exact_p()), vec![vec![0, 1, 2]]);
        assert_eq!(communication_classes(&Matrix::identity(2)), vec![vec![0], vec![1]]);
        let block = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]]).unwrap();
        assert_eq!(communication_classes(&block), vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn one_way_edge_does_not_merge_classes() {
        let m = Matrix::from_rows(&[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]]).unwrap();
        assert_eq!(communication_classes(&m), vec![vec![0], vec![1, 2]]);
        assert!(!is_irreducible(&m));
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&exact_p()));
        assert!(!is_irreducible(&Matrix::identity(3)));
        assert!(is_irreducible(&swap()));
    }

    #[test]
    fn period_examples() {
        assert_eq!(period(&swap()).unwrap(), 2);
        assert_eq!(period(&exact_p()).unwrap(), 1);
        let lazy = Matrix::from_rows(&[[0.5, 0.5], [1.0, 0.0]]).unwrap();
        assert_eq!(period(&lazy).unwrap(), 1);
        let cycle3 = Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(period(&cycle3).unwrap(), 3);
        assert_eq!(period(&Matrix::identity(2)), Err(ChainError::NotIrreducible { classes: 2 }));
    }

    #[test]
    fn regularity_examples() {
        assert_eq!(is_regular(&exact_p()), (true, Some(2)));
        assert_eq!(is_regular(&Matrix::identity(3)), (false, None));
        assert_eq!(is_regular(&swap()), (false, None));
        assert_eq!(is_regular(&Matrix::identity(1)), (true, Some(1)));
    }

    #[test]
    fn regularity_index_hits_wielandt_bound() {
        // Wielandt matrix: cycle 0->1->..->n-1->0 plus chord n-1 -> 1.
        let n = 5;
        let mut m = Matrix::zeros(n);
        let mut data = m.clone().into_vec();
        for i in 0..n - 1 {
            data[i * n + i + 1] = 1.0;
        }
        data[(n - 1) * n] = 0.5;
        data[(n - 1) * n + 1] = 0.5;
        m = Matrix::new(n, data).unwrap();
        assert_eq!(regularity_index(&m), Some((n - 1) * (n - 1) + 1));
    }

    #[test]
    fn stationary_of_reference_chain_is_degree_vector() {
        let s = stationary(&exact_p()).unwrap();
        let expected = [8.0 / 32.0, 13.0 / 32.0, 11.0 / 32.0];
        for (a, b) in s.pi.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert!(s.residual <= 1e-14);
    }

    #[test]
    fn stationary_of_doubly_stochastic_is_uniform() {
        let m = Matrix::from_rows(&[[0.2, 0.3, 0.5], [0.5, 0.2, 0.3], [0.3, 0.5, 0.2]]).unwrap();
        for v in stationary(&m).unwrap().pi {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn stationary_requires_regularity() {
        assert_eq!(stationary(&swap()).unwrap_err(), ChainError::NotRegular);
    }

    #[test]
    fn power_limit_of_rank_one_returns_first_power() {
        let m = StochasticMatrix::from_rows(&[[0.2, 0.8], [0.2, 0.8]]).unwrap();
        assert_eq!(power_limit(&m, 1e-10).unwrap().power, 1);
    }

    #[test]
    fn power_limit_rows_are_stationary() {
        let p = StochasticMatrix::strict(exact_p()).unwrap();
        let lim = power_limit(&p, 1e-10).unwrap();
        let expected = [8.0 / 32.0, 13.0 / 32.0, 11.0 / 32.0];
        for r in lim.limit.rows() {
            for (a, b) in r.iter().zip(expected) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn subdominant_examples() {
        let rank_one = Matrix::from_rows(&[[0.2, 0.8], [0.2, 0.8]]).unwrap();
        assert_abs_diff_eq!(subdominant_modulus(&rank_one).unwrap().subdominant_modulus, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(subdominant_modulus(&Matrix::identity(3)).unwrap().subdominant_modulus, 1.0, epsilon = 1e-12);
        // lambda^2 + lambda + 30/143 has roots (-1 +- sqrt(23/143)) / 2.
        let expected = (1.0 + (23.0f64 / 143.0).sqrt()) / 2.0;
        let s = subdominant_modulus(&exact_p()).unwrap();
        assert_abs_diff_eq!(s.subdominant_modulus, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(s.dominant, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn subdominant_of_complex_pair() {
        // Three-cycle mixed with the identity: eigenvalues 1 and 0.5 + 0.5 w, |.| = 0.5.
        let m = Matrix::from_rows(&[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]).unwrap();
        assert_abs_diff_eq!(subdominant_modulus(&m).unwrap().subdominant_modulus, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn subdominant_of_periodic_chain() {
        assert_abs_diff_eq!(subdominant_modulus(&swap()).unwrap().subdominant_modulus, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn summary_has_all_keys() {
        let text = analysis_summary(&exact_p());
        for key in ["classes", "irreducible", "period", "regular", "regularity_index", "pi", "residual", "subdominant_modulus"] {
            assert!(text.lines().any(|l| l.starts_with(&format!("{key}: "))), "missing {key}");
        }
        assert!(text.contains("classes: {0,1,2}"));
        assert!(text.contains("classes_1based: {1,2,3}"));
        assert!(text.contains("regularity_index: 2"));
    }
}
