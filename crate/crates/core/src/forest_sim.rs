//! Seeded Monte Carlo sampler of single-lineage (degenerated) forests.
//!
//! Every tree has one typed root and every parent has exactly one child, so a
//! tree is a lineage and its generation-`g` member is a single type. Sampling
//! that type many times per root estimates the generation law.
//!
//! Randomness comes from ChaCha8, a counter-based cipher: the seed is the key,
//! `(root, replicate)` selects the stream and the draw index is the position
//! in that stream. Results therefore do not depend on how replicates are
//! scheduled across threads.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::stochmat::{Matrix, MatrixError, StochasticMatrix, ToleranceClass};

pub const DEFAULT_DEPTH_CAP: usize = 10_000;

/// Replicates handed to one rayon task.
const CHUNK: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("generation {requested} is outside 1..={configured}")]
    GenerationOutOfRange { requested: usize, configured: usize },
    #[error("recursion depth {depth} exceeds the cap of {cap}")]
    RecursionDepthExceeded { depth: usize, cap: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("replicates must be at least 1")]
    NoReplicates,
    #[error("root type {root} out of range for {n} types")]
    RootOutOfRange { root: usize, n: usize },
    #[error("mechanism does not match the requested estimate")]
    WrongMechanism,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Categorical samplers, one per row of a stochastic matrix.
#[derive(Clone, Debug)]
pub struct RowSampler {
    rows: Vec<WeightedIndex<f64>>,
}

impl RowSampler {
    pub fn new(m: &StochasticMatrix) -> Self {
        let rows = m
            .rows()
            .map(|r| WeightedIndex::new(r.iter().copied()).expect("stochastic rows have positive mass"))
            .collect();
        Self { rows }
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, from: usize, rng: &mut R) -> usize {
        self.rows[from].sample(rng)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mechanism {
    /// Branching with `P`, then mutation with `T` in every later generation.
    PureMutation { p: StochasticMatrix, t: StochasticMatrix },
    /// Branching-mutation with probability `alpha`, immigration from `Y` otherwise.
    Immigration { p: StochasticMatrix, y: StochasticMatrix, alpha: f64 },
}

impl Mechanism {
    pub fn label(&self) -> &'static str {
        match self {
            Mechanism::PureMutation { .. } => "pure-mutation",
            Mechanism::Immigration { .. } => "immigration",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Mechanism::PureMutation { .. } => None,
            Mechanism::Immigration { alpha, .. } => Some(*alpha),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Mechanism::PureMutation { p, .. } | Mechanism::Immigration { p, .. } => p.dim(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub generations: usize,
    pub replicates: u64,
    pub seed: u64,
    pub mechanism: Mechanism,
    pub depth_cap: usize,
}

impl SimConfig {
    pub fn new(generations: usize, replicates: u64, seed: u64, mechanism: Mechanism) -> Result<Self, SimError> {
        if replicates == 0 {
            return Err(SimError::NoReplicates);
        }
        match &mechanism {
            Mechanism::PureMutation { p, t } if p.dim() != t.dim() => {
                return Err(MatrixError::DimensionMismatch { left: p.dim(), right: t.dim() }.into());
            }
            Mechanism::Immigration { p, y, alpha } => {
                if p.dim() != y.dim() {
                    return Err(MatrixError::DimensionMismatch { left: p.dim(), right: y.dim() }.into());
                }
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(SimError::InvalidAlpha(*alpha));
                }
            }
            _ => {}
        }
        Ok(Self { generations, replicates, seed, mechanism, depth_cap: DEFAULT_DEPTH_CAP })
    }
}

/// Counts of child types per root type, with their row frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalLaw {
    /// Row `i`: how often a type-`i` root had each child type.
    pub counts: Vec<Vec<u64>>,
    pub frequencies: StochasticMatrix,
    pub replicates: u64,
    pub generation: usize,
    pub seed: u64,
    pub mechanism: &'static str,
    pub alpha: Option<f64>,
}

impl EmpiricalLaw {
    fn from_counts(counts: Vec<Vec<u64>>, config: &SimConfig, generation: usize) -> Result<Self, SimError> {
        let n = counts.len();
        let r = config.replicates as f64;
        let data = counts.iter().flat_map(|row| row.iter().map(move |c| *c as f64 / r)).collect();
        let frequencies = StochasticMatrix::new(Matrix::new(n, data)?, ToleranceClass::Strict)?;
        Ok(Self {
            counts,
            frequencies,
            replicates: config.replicates,
            generation,
            seed: config.seed,
            mechanism: config.mechanism.label(),
            alpha: config.mechanism.alpha(),
        })
    }

    /// Largest per-row total-variation distance to an analytic law.
    pub fn max_row_tv(&self, analytic: &Matrix) -> f64 {
        self.frequencies
            .rows()
            .zip(analytic.rows())
            .map(|(a, b)| total_variation(a, b))
            .fold(0.0, f64::max)
    }

    /// Dense-matrix text of the frequencies behind one header comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let alpha = self.alpha.map_or_else(|| "none".to_string(), |a| format!("{a}"));
        let _ = writeln!(
            out,
            "# generation={} replicates={} seed={} mechanism={} alpha={}",
            self.generation, self.replicates, self.seed, self.mechanism, alpha
        );
        out.push_str(&crate::format::matrix_to_string(&self.frequencies));
        out
    }
}

/// Half the L1 distance between two probability vectors.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Generator for the `(root, replicate)` stream, positioned at draw 0.
pub fn stream(seed: u64, root: usize, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(root, replicate));
    rng.set_word_pos(0);
    rng
}

fn stream_id(root: usize, replicate: u64) -> u64 {
    // 24 bits of root type, 40 bits of replicate index.
    ((root as u64) << 40) | (replicate & ((1 << 40) - 1))
}

/// Child type of a `root` lineage in generation `g >= 1`: one branching draw
/// from `P(root, .)`, then `g - 1` mutation draws chained through `T`.
pub fn sample_generation_child<R: Rng + ?Sized>(
    g: usize,
    root: usize,
    branching: &RowSampler,
    mutation: &RowSampler,
    rng: &mut R,
) -> usize {
    let mut child = branching.draw(root, rng);
    for _ in 1..g {
        child = mutation.draw(child, rng);
    }
    child
}

/// Child type under immigration at depth `n`.
///
/// Mirrors `F_n = alpha F_{n-1} P + (1 - alpha) Y` with `F_0 = P`: with
/// probability `alpha` take the depth-`n-1` child and mutate it once through
/// `P`, otherwise draw an immigrant from `Y(root, .)`. Unrolled, that is a run
/// of `j` successes followed by either an immigrant (then `j` mutations) or
/// reaching depth 0 (a draw from `P(root, .)`, then `n` mutations).
pub fn sample_pagerank_child<R: Rng + ?Sized>(
    n: usize,
    root: usize,
    alpha: f64,
    p: &RowSampler,
    y: &RowSampler,
    rng: &mut R,
    depth_cap: usize,
) -> Result<usize, SimError> {
    if n > depth_cap {
        return Err(SimError::RecursionDepthExceeded { depth: n, cap: depth_cap });
    }
    let mut successes = 0;
    let mut child = None;
    while successes < n {
        if rng.random::<f64>() < alpha {
            successes += 1;
        } else {
            child = Some(y.draw(root, rng));
            break;
        }
    }
    let mut child = match child {
        Some(c) => c,
        None => p.draw(root, rng),
    };
    for _ in 0..successes {
        child = p.draw(child, rng);
    }
    Ok(child)
}

fn tally<F>(n: usize, replicates: u64, seed: u64, sample: F) -> Result<Vec<Vec<u64>>, SimError>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<usize, SimError> + Sync,
{
    let chunks = replicates.div_ceil(CHUNK);
    (0..n)
        .map(|root| {
            let partial: Result<Vec<Vec<u64>>, SimError> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut counts = vec![0u64; n];
                    let base = ChaCha8Rng::seed_from_u64(seed);
                    for rep in c * CHUNK..((c + 1) * CHUNK).min(replicates) {
                        let mut rng = base.clone();
                        rng.set_stream(stream_id(root, rep));
                        rng.set_word_pos(0);
                        counts[sample(root, &mut rng)?] += 1;
                    }
                    Ok(counts)
                })
                .collect();
            Ok(partial?.into_iter().fold(vec![0u64; n], |mut acc, part| {
                acc.iter_mut().zip(part).for_each(|(a, b)| *a += b);
                acc
            }))
        })
        .collect()
}

/// Empirical law of generation `g` under the pure-mutation mechanism.
pub fn estimate_law(config: &SimConfig, g: usize) -> Result<EmpiricalLaw, SimError> {
    let Mechanism::PureMutation { p, t } = &config.mechanism else {
        return Err(SimError::WrongMechanism);
    };
    if g == 0 || g > config.generations {
        return Err(SimError::GenerationOutOfRange { requested: g, configured: config.generations });
    }
    let (branching, mutation) = (RowSampler::new(p), RowSampler::new(t));
    let counts = tally(config.mechanism.dim(), config.replicates, config.seed, |root, rng| {
        Ok(sample_generation_child(g, root, &branching, &mutation, rng))
    })?;
    EmpiricalLaw::from_counts(counts, config, g)
}

/// Empirical law of depth `n` under the immigration mechanism.
pub fn estimate_pagerank_law(config: &SimConfig, n: usize) -> Result<EmpiricalLaw, SimError> {
    let Mechanism::Immigration { p, y, alpha } = &config.mechanism else {
        return Err(SimError::WrongMechanism);
    };
    if n > config.generations {
        return Err(SimError::GenerationOutOfRange { requested: n, configured: config.generations });
    }
    let (ps, ys) = (RowSampler::new(p), RowSampler::new(y));
    let cap = config.depth_cap;
    let counts = tally(config.mechanism.dim(), config.replicates, config.seed, |root, rng| {
        sample_pagerank_child(n, root, *alpha, &ps, &ys, rng, cap)
    })?;
    EmpiricalLaw::from_counts(counts, config, n)
}
