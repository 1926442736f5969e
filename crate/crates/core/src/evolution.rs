//! Two-phase iteration engines.
//!
//! One update step is a branching phase followed by a mutation phase. With
//! branching law `F` and mutation matrix `M` the next law is `F M`; with
//! immigration at rate `1 - alpha` it becomes `alpha F M + (1 - alpha) Y`,
//! which is also the block product `[alpha F | (1 - alpha) I] [M; Y]`.
//!
//! Alternating schedules swap in a second operator on even steps. Step `s`
//! (the one producing `F_s` from `F_{s-1}`, `s >= 1`) is odd or even
//! according to a [`Convention`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::chain;
use crate::stochmat::{compensated_sum, matmul, Matrix, MatrixError, MatrixNorm, StochasticMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("alpha must lie in (0, 1], got {0}; with alpha = 0 the fixed point is Y itself")]
    InvalidAlpha(f64),
    #[error("lambda must lie in (0, 1], got {0}")]
    InvalidLambda(f64),
    #[error("generation must be at least 1")]
    InvalidGeneration,
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("max_iterations must be at least 1")]
    InvalidMaxIterations,
}

/// Whether the step producing `F_1` uses the odd rule or the even rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Convention {
    #[default]
    FirstStepOdd,
    FirstStepEven,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::FirstStepOdd, Convention::FirstStepEven];

    /// True when step `s` (1-based) applies the odd rule.
    pub fn is_odd_step(self, s: usize) -> bool {
        match self {
            Convention::FirstStepOdd => s % 2 == 1,
            Convention::FirstStepEven => s.is_multiple_of(2),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::FirstStepOdd => "first-odd",
            Convention::FirstStepEven => "first-even",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-odd" | "first-step-odd" => Ok(Convention::FirstStepOdd),
            "first-even" | "first-step-even" => Ok(Convention::FirstStepEven),
            other => Err(format!("unknown convention `{other}` (expected first-odd or first-even)")),
        }
    }
}

/// Which part of the even-step operator of alternating PageRank changes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `lambda [P; Y] + (1 - lambda) [I; J]`.
    Both,
    /// `[(lambda P + (1 - lambda) I); Y]`.
    BranchingOnly,
    /// `[P; (lambda Y + (1 - lambda) J)]`.
    ImmigrationOnly,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Both => "both",
            Variant::BranchingOnly => "branching",
            Variant::ImmigrationOnly => "immigration",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(Variant::Both),
            "branching" | "branching-only" => Ok(Variant::BranchingOnly),
            "immigration" | "immigration-only" => Ok(Variant::ImmigrationOnly),
            other => Err(format!("unknown variant `{other}` (expected both, branching or immigration)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Comparison {
    #[default]
    StrictLess,
    LessOrEqual,
}

impl Comparison {
    pub fn holds(self, value: f64, epsilon: f64) -> bool {
        match self {
            Comparison::StrictLess => value < epsilon,
            Comparison::LessOrEqual => value <= epsilon,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::StrictLess => "lt",
            Comparison::LessOrEqual => "le",
        }
    }
}

impl FromStr for Comparison {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lt" => Ok(Comparison::StrictLess),
            "le" => Ok(Comparison::LessOrEqual),
            other => Err(format!("unknown comparison `{other}` (expected lt or le)")),
        }
    }
}

/// Stopping rule for the engines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceCriterion {
    pub norm: MatrixNorm,
    pub epsilon: f64,
    pub comparison: Comparison,
    pub max_iterations: usize,
    pub cycle_detection: bool,
}

impl Default for ConvergenceCriterion {
    fn default() -> Self {
        Self {
            norm: MatrixNorm::Frobenius,
            epsilon: 1e-8,
            comparison: Comparison::StrictLess,
            max_iterations: 10_000,
            cycle_detection: false,
        }
    }
}

impl ConvergenceCriterion {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    pub fn norm(mut self, norm: MatrixNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn comparison(mut self, comparison: Comparison) -> Self {
        self.comparison = comparison;
        self
    }

    pub fn max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn cycle_detection(mut self, on: bool) -> Self {
        self.cycle_detection = on;
        self
    }

    fn validate(&self) -> Result<(), EvolutionError> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(EvolutionError::InvalidEpsilon(self.epsilon));
        }
        if self.max_iterations == 0 {
            return Err(EvolutionError::InvalidMaxIterations);
        }
        Ok(())
    }

    pub fn meets(&self, value: f64) -> bool {
        self.comparison.holds(value, self.epsilon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    FixedPoint,
    Period2,
    Exhausted,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FixedPoint => "fixed-point",
            Mode::Period2 => "period-2",
            Mode::Exhausted => "exhausted",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `||F_s - F_{s-1}||`.
    pub one_step: f64,
    /// `||F_s - F_{s-2}||`, absent at the first step.
    pub two_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub mode: Mode,
    /// Update steps performed; `F_0` is not counted.
    pub iterations: usize,
    /// One state for a fixed point (or exhaustion), two for a period-2 cycle.
    pub final_states: Vec<StochasticMatrix>,
    pub trace: Vec<TraceEntry>,
    pub criterion: ConvergenceCriterion,
    /// Set for alternating schedules.
    pub convention: Option<Convention>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.mode != Mode::Exhausted
    }

    pub fn final_state(&self) -> &StochasticMatrix {
        self.final_states.last().expect("report always carries a state")
    }
}

/// One mutation-phase operator: the mutation matrix for the branching
/// mechanism and, with immigration, the immigration matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOperator {
    pub mutation: StochasticMatrix,
    pub immigration: Option<StochasticMatrix>,
}

/// Which algebraic route evaluates a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateForm {
    /// `alpha F M + (1 - alpha) Y`.
    Standard,
    /// `[alpha F | (1 - alpha) I] [M; Y]`, summed over all `2n` terms.
    Block,
}

/// A configured iteration: initial law, mutation schedule and immigration.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhaseScheme {
    initial: StochasticMatrix,
    alpha: f64,
    odd: StepOperator,
    even: Option<StepOperator>,
    convention: Convention,
}

fn check_alpha(alpha: f64) -> Result<(), EvolutionError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(EvolutionError::InvalidAlpha(alpha))
    }
}

fn check_lambda(lambda: f64) -> Result<(), EvolutionError> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(EvolutionError::InvalidLambda(lambda))
    }
}

fn check_dims(mats: &[&StochasticMatrix]) -> Result<(), EvolutionError> {
    let n = mats[0].dim();
    for m in mats {
        if m.dim() != n {
            return Err(MatrixError::DimensionMismatch { left: n, right: m.dim() }.into());
        }
    }
    Ok(())
}

impl TwoPhaseScheme {
    /// `F_0 = P`, `F_s = F_{s-1} P`.
    pub fn diffusion(p: &StochasticMatrix) -> Self {
        Self::constant(p.clone(), p.clone())
    }

    /// `F_0 = initial`, `F_s = F_{s-1} T`.
    pub fn constant(initial: StochasticMatrix, t: StochasticMatrix) -> Self {
        Self {
            initial,
            alpha: 1.0,
            odd: StepOperator { mutation: t, immigration: None },
            even: None,
            convention: Convention::default(),
        }
    }

    /// `F_0 = P`, `F_s = alpha F_{s-1} P + (1 - alpha) Y`.
    pub fn pagerank(p: &StochasticMatrix, y: &StochasticMatrix, alpha: f64) -> Result<Self, EvolutionError> {
        check_alpha(alpha)?;
        check_dims(&[p, y])?;
        Ok(Self {
            initial: p.clone(),
            alpha,
            odd: StepOperator { mutation: p.clone(), immigration: Some(y.clone()) },
            even: None,
            convention: Convention::default(),
        })
    }

    /// Odd steps mutate with `P`, even steps with `lambda P + (1 - lambda) I`.
    pub fn alternating_diffusion(p: &StochasticMatrix, lambda: f64, convention: Convention) -> Result<Self, EvolutionError> {
        check_lambda(lambda)?;
        let lazy = p.blend(lambda, &StochasticMatrix::identity(p.dim()))?;
        Ok(Self {
            initial: p.clone(),
            alpha: 1.0,
            odd: StepOperator { mutation: p.clone(), immigration: None },
            even: Some(StepOperator { mutation: lazy, immigration: None }),
            convention,
        })
    }

    /// Odd steps use `[P; Y]`; even steps change per `variant`.
    pub fn alternating_pagerank(
        p: &StochasticMatrix,
        y: &StochasticMatrix,
        j: &StochasticMatrix,
        lambda: f64,
        alpha: f64,
        variant: Variant,
        convention: Convention,
    ) -> Result<Self, EvolutionError> {
        check_alpha(alpha)?;
        check_lambda(lambda)?;
        check_dims(&[p, y, j])?;
        let lazy = p.blend(lambda, &StochasticMatrix::identity(p.dim()))?;
        let mixed = y.blend(lambda, j)?;
        let even = match variant {
            Variant::Both => StepOperator { mutation: lazy, immigration: Some(mixed) },
            Variant::BranchingOnly => StepOperator { mutation: lazy, immigration: Some(y.clone()) },
            Variant::ImmigrationOnly => StepOperator { mutation: p.clone(), immigration: Some(mixed) },
        };
        Ok(Self {
            initial: p.clone(),
            alpha,
            odd: StepOperator { mutation: p.clone(), immigration: Some(y.clone()) },
            even: Some(even),
            convention,
        })
    }

    pub fn initial(&self) -> &StochasticMatrix {
        &self.initial
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_alternating(&self) -> bool {
        self.even.is_some()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Operator applied at step `s` (1-based).
    pub fn operator_for_step(&self, s: usize) -> &StepOperator {
        match &self.even {
            Some(even) if !self.convention.is_odd_step(s) => even,
            _ => &self.odd,
        }
    }

    /// `F_s` from `F_{s-1}`.
    pub fn step(&self, f: &StochasticMatrix, s: usize, form: UpdateForm) -> Result<StochasticMatrix, EvolutionError> {
        let op = self.operator_for_step(s);
        let y = match &op.immigration {
            Some(y) if self.alpha < 1.0 => y,
            _ => {
                // Without immigration both forms reduce to F M.
                return Ok(matmul(f, &op.mutation)?);
            }
        };
        Ok(match form {
            UpdateForm::Standard => immigration_step(f, &op.mutation, y, self.alpha)?,
            UpdateForm::Block => block_step(f, &op.mutation, y, self.alpha)?,
        })
    }

    /// `F_0, F_1, ..., F_steps`.
    pub fn trajectory(&self, steps: usize, form: UpdateForm) -> Result<Vec<StochasticMatrix>, EvolutionError> {
        let mut states = Vec::with_capacity(steps + 1);
        states.push(self.initial.clone());
        for s in 1..=steps {
            let next = self.step(&states[s - 1], s, form)?;
            states.push(next);
        }
        Ok(states)
    }

    pub fn run(&self, criterion: &ConvergenceCriterion) -> Result<ConvergenceReport, EvolutionError> {
        self.run_with_form(criterion, UpdateForm::Standard)
    }

    /// Iterates until the criterion fires or `max_iterations` steps are spent.
    ///
    /// Exhaustion is reported through [`Mode::Exhausted`], not as an error.
    pub fn run_with_form(&self, criterion: &ConvergenceCriterion, form: UpdateForm) -> Result<ConvergenceReport, EvolutionError> {
        criterion.validate()?;
        let mut warnings = Vec::new();
        if !self.is_alternating() && self.alpha >= 1.0 && chain::regularity_index(&self.odd.mutation).is_none() {
            warnings.push("mutation matrix is not regular; the iteration need not converge".to_string());
        }
        for op in std::iter::once(&self.odd).chain(&self.even) {
            if let Some(y) = &op.immigration {
                if !y.has_identical_rows(1e-12) {
                    warnings.push("immigration matrix rows are not identical".to_string());
                    break;
                }
            }
        }

        let mut before_prev: Option<StochasticMatrix> = None;
        let mut prev = self.initial.clone();
        let mut trace = Vec::new();
        for s in 1..=criterion.max_iterations {
            let next = self.step(&prev, s, form)?;
            let one_step = criterion.norm.of(&next.sub(&prev)?);
            let two_step = match &before_prev {
                Some(bp) => Some(criterion.norm.of(&next.sub(bp)?)),
                None => None,
            };
            trace.push(TraceEntry { iteration: s, one_step, two_step });
            match step_verdict(one_step, two_step, criterion) {
                Some(Mode::FixedPoint) => {
                    return Ok(self.report(Mode::FixedPoint, s, vec![next], trace, criterion, warnings));
                }
                Some(Mode::Period2) => {
                    return Ok(self.report(Mode::Period2, s, vec![prev, next], trace, criterion, warnings));
                }
                _ => {}
            }
            before_prev = Some(prev);
            prev = next;
        }
        let n = criterion.max_iterations;
        Ok(self.report(Mode::Exhausted, n, vec![prev], trace, criterion, warnings))
    }

    fn report(
        &self,
        mode: Mode,
        iterations: usize,
        final_states: Vec<StochasticMatrix>,
        trace: Vec<TraceEntry>,
        criterion: &ConvergenceCriterion,
        warnings: Vec<String>,
    ) -> ConvergenceReport {
        ConvergenceReport {
            mode,
            iterations,
            final_states,
            trace,
            criterion: *criterion,
            convention: self.is_alternating().then_some(self.convention),
            warnings,
        }
    }
}

/// Cycle margin: a period-2 verdict needs the one-step difference at least
/// this many times epsilon.
pub const CYCLE_MARGIN: f64 = 10.0;

fn step_verdict(one_step: f64, two_step: Option<f64>, criterion: &ConvergenceCriterion) -> Option<Mode> {
    if criterion.meets(one_step) {
        return Some(Mode::FixedPoint);
    }
    if criterion.cycle_detection {
        if let Some(d2) = two_step {
            if criterion.meets(d2) && one_step >= CYCLE_MARGIN * criterion.epsilon {
                return Some(Mode::Period2);
            }
        }
    }
    None
}

fn immigration_step(f: &StochasticMatrix, m: &StochasticMatrix, y: &StochasticMatrix, alpha: f64) -> Result<StochasticMatrix, MatrixError> {
    let fm = f.matmul(m)?;
    let n = f.dim();
    if y.dim() != n {
        return Err(MatrixError::DimensionMismatch { left: n, right: y.dim() });
    }
    let data = fm.as_slice().iter().zip(y.as_slice()).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
    Ok(StochasticMatrix::from_product(Matrix::new(n, data)?, f.class()))
}

fn block_step(f: &StochasticMatrix, m: &StochasticMatrix, y: &StochasticMatrix, alpha: f64) -> Result<StochasticMatrix, MatrixError> {
    let n = f.dim();
    if m.dim() != n || y.dim() != n {
        return Err(MatrixError::DimensionMismatch { left: n, right: if m.dim() != n { m.dim() } else { y.dim() } });
    }
    // Row i of the n x 2n branching law is [alpha F_i | (1 - alpha) e_i].
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        let branching: Vec<f64> = f
            .row(i)
            .iter()
            .map(|v| alpha * v)
            .chain((0..n).map(|k| if k == i { 1.0 - alpha } else { 0.0 }))
            .collect();
        for j in 0..n {
            let column = (0..n).map(|k| m.get(k, j)).chain((0..n).map(|k| y.get(k, j)));
            data.push(compensated_sum(branching.iter().zip(column).map(|(a, b)| a * b)));
        }
    }
    Ok(StochasticMatrix::from_product(Matrix::new(n, data)?, f.class()))
}

/// One branching-then-mutation step, `F T`.
pub fn diffuse_step(f: &StochasticMatrix, t: &StochasticMatrix) -> Result<StochasticMatrix, EvolutionError> {
    Ok(matmul(f, t)?)
}

/// Probability that a type-`i` root has a type-`j` child after one mutation
/// phase: the no-mutation term `P(i,j) T(j,j)` plus the mutation terms
/// `P(i,k) T(k,j)` for `k != j`.
pub fn mutation_compose_entrywise(prev: &Matrix, t: &Matrix, i: usize, j: usize) -> Result<f64, EvolutionError> {
    if prev.dim() != t.dim() {
        return Err(MatrixError::DimensionMismatch { left: prev.dim(), right: t.dim() }.into());
    }
    let stay = prev.try_get(i, j)? * t.try_get(j, j)?;
    let mutate: f64 = (0..t.dim()).filter(|&k| k != j).map(|k| prev.get(i, k) * t.get(k, j)).sum();
    Ok(stay + mutate)
}

/// Law of generation `n`: `P T^{n-1}`.
pub fn generation_law(p: &StochasticMatrix, t: &StochasticMatrix, n: usize) -> Result<StochasticMatrix, EvolutionError> {
    if n == 0 {
        return Err(EvolutionError::InvalidGeneration);
    }
    check_dims(&[p, t])?;
    let mut law = p.clone();
    for _ in 1..n {
        law = matmul(&law, t)?;
    }
    Ok(law)
}

pub fn run_diffusion(p: &StochasticMatrix, criterion: &ConvergenceCriterion) -> Result<ConvergenceReport, EvolutionError> {
    TwoPhaseScheme::diffusion(p).run(criterion)
}

pub fn run_pagerank(
    p: &StochasticMatrix,
    y: &StochasticMatrix,
    alpha: f64,
    criterion: &ConvergenceCriterion,
) -> Result<ConvergenceReport, EvolutionError> {
    TwoPhaseScheme::pagerank(p, y, alpha)?.run(criterion)
}

pub fn run_block_form(
    p: &StochasticMatrix,
    y: &StochasticMatrix,
    alpha: f64,
    criterion: &ConvergenceCriterion,
) -> Result<ConvergenceReport, EvolutionError> {
    TwoPhaseScheme::pagerank(p, y, alpha)?.run_with_form(criterion, UpdateForm::Block)
}

/// `F_n = alpha^n P^{n+1} + (1 - alpha) Y sum_{k<n} alpha^k P^k` for `n >= 1`.
pub fn pagerank_closed_form(p: &StochasticMatrix, y: &StochasticMatrix, alpha: f64, n: usize) -> Result<StochasticMatrix, EvolutionError> {
    check_alpha(alpha)?;
    check_dims(&[p, y])?;
    if n == 0 {
        return Err(EvolutionError::InvalidGeneration);
    }
    let dim = p.dim();
    // series = sum_{k<n} (alpha P)^k, accumulated alongside the powers.
    let mut power = Matrix::identity(dim);
    let mut series = vec![0.0; dim * dim];
    let mut scale = 1.0;
    for _ in 0..n {
        for (s, v) in series.iter_mut().zip(power.as_slice()) {
            *s += scale * v;
        }
        power = power.matmul(p)?;
        scale *= alpha;
    }
    // After the loop: power = P^n, scale = alpha^n.
    let lead = power.matmul(p)?;
    let tail = y.matmul(&Matrix::new(dim, series)?)?;
    let data = lead
        .as_slice()
        .iter()
        .zip(tail.as_slice())
        .map(|(a, b)| scale * a + (1.0 - alpha) * b)
        .collect();
    Ok(StochasticMatrix::from_product(Matrix::new(dim, data)?, p.class()))
}

pub fn run_alternating_diffusion(
    p: &StochasticMatrix,
    lambda: f64,
    criterion: &ConvergenceCriterion,
    convention: Convention,
) -> Result<ConvergenceReport, EvolutionError> {
    TwoPhaseScheme::alternating_diffusion(p, lambda, convention)?.run(criterion)
}

#[allow(clippy::too_many_arguments)]
pub fn run_alternating_pagerank(
    p: &StochasticMatrix,
    y: &StochasticMatrix,
    j: &StochasticMatrix,
    lambda: f64,
    alpha: f64,
    variant: Variant,
    criterion: &ConvergenceCriterion,
    convention: Convention,
) -> Result<ConvergenceReport, EvolutionError> {
    TwoPhaseScheme::alternating_pagerank(p, y, j, lambda, alpha, variant, convention)?.run(criterion)
}

#[derive(Clone, Debug, PartialEq)]
pub enum CycleVerdict {
    FixedPoint(Matrix),
    Period2(Matrix, Matrix),
    None,
}

/// Classifies the tail of a state sequence.
///
/// Fixed point when the latest one-step difference meets the criterion;
/// period-2 when the latest two-step difference does while the one-step
/// difference is at least ten times epsilon. Needs three states.
pub fn detect_cycle(states: &[Matrix], criterion: &ConvergenceCriterion) -> CycleVerdict {
    let len = states.len();
    if len < 3 {
        return CycleVerdict::None;
    }
    let (a, b, c) = (&states[len - 3], &states[len - 2], &states[len - 1]);
    let (Ok(d1), Ok(d2)) = (c.sub(b), c.sub(a)) else {
        return CycleVerdict::None;
    };
    let cycle_on = ConvergenceCriterion { cycle_detection: true, ..*criterion };
    match step_verdict(criterion.norm.of(&d1), Some(criterion.norm.of(&d2)), &cycle_on) {
        Some(Mode::FixedPoint) => CycleVerdict::FixedPoint(c.clone()),
        Some(Mode::Period2) => CycleVerdict::Period2(b.clone(), c.clone()),
        _ => CycleVerdict::None,
    }
}
