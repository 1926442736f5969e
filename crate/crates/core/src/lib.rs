//! Graph diffusion and PageRank read as a two-phase (branching, then
//! mutation) multi-type Galton-Watson forest with a degenerated branching law.
//!
//! The crate is organised bottom-up:
//!
//! - [`stochmat`]: dense square matrices, row-stochastic validation, products
//!   and difference norms.
//! - [`chain`]: finite Markov chain structure (communication classes, period,
//!   regularity), stationary vectors and the subdominant eigenvalue modulus.
//! - [`evolution`]: the iteration engines (plain diffusion, PageRank with
//!   immigration, block form, alternating mutation schedules) with fixed-point
//!   and period-2 detection.
//! - [`forest_sim`]: a seeded Monte Carlo sampler of single-lineage trees that
//!   checks the analytic generation laws.
//! - [`format`]: the dense-matrix and edge-list text formats.
//! - [`cli`] and [`verify`]: the command-line driver and the reproduction suite
//!   behind `gwforest verify`.

pub mod chain;
pub mod cli;
pub mod evolution;
pub mod fixtures;
pub mod forest_sim;
pub mod format;
pub mod stochmat;
pub mod verify;

pub use chain::{ChainClassification, ChainError, SpectrumSummary, StationaryMethod, StationaryResult};
pub use evolution::{
    Comparison, ConvergenceCriterion, ConvergenceReport, Convention, EvolutionError, Mode,
    TwoPhaseScheme, Variant,
};
pub use forest_sim::{EmpiricalLaw, Mechanism, SimConfig, SimError};
pub use stochmat::{AffinityMatrix, Matrix, MatrixError, MatrixNorm, StochasticMatrix, ToleranceClass};
