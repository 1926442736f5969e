//! C ABI over the `gwforest` library.
//!
//! Objects cross the boundary as opaque handles (`GwMatrix`, `GwReport`)
//! created and freed by this library. Every fallible function returns a
//! [`GwStatus`]; on failure [`gw_last_error`] describes the cause. Panics are
//! caught at the boundary and reported as [`GwStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gwforest::chain::{self, ChainError};
use gwforest::evolution::{
    self, Comparison, ConvergenceCriterion, ConvergenceReport, Convention, EvolutionError, Mode, Variant,
};
use gwforest::forest_sim::{estimate_law, estimate_pagerank_law, Mechanism, SimConfig, SimError};
use gwforest::stochmat::{self, AffinityMatrix, Matrix, MatrixError, MatrixNorm, StochasticMatrix};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotStochastic = 3,
    DimensionMismatch = 4,
    NotRegular = 5,
    NoConvergence = 6,
    BufferTooSmall = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwNorm {
    Frobenius = 0,
    Spectral = 1,
    Max = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwComparison {
    Less = 0,
    LessOrEqual = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwConvention {
    FirstStepOdd = 0,
    FirstStepEven = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwVariant {
    Both = 0,
    BranchingOnly = 1,
    ImmigrationOnly = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwMode {
    FixedPoint = 0,
    Period2 = 1,
    Exhausted = 2,
}

/// Stopping rule of an iteration run.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GwCriterion {
    pub norm: GwNorm,
    pub epsilon: f64,
    pub comparison: GwComparison,
    pub max_iterations: usize,
    pub cycle_detection: bool,
}

/// Opaque dense square matrix.
pub struct GwMatrix(Matrix);

/// Opaque result of an iteration run.
pub struct GwReport(ConvergenceReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

struct Failure(GwStatus, String);

impl From<MatrixError> for Failure {
    fn from(e: MatrixError) -> Self {
        let status = match e {
            MatrixError::DimensionMismatch { .. } => GwStatus::DimensionMismatch,
            MatrixError::NotStochastic { .. } | MatrixError::ZeroRow { .. } => GwStatus::NotStochastic,
            _ => GwStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        let status = match &e {
            ChainError::NotRegular | ChainError::NotIrreducible { .. } => GwStatus::NotRegular,
            ChainError::NoConvergence { .. } | ChainError::MethodsDisagree { .. } | ChainError::Singular => GwStatus::NoConvergence,
            ChainError::Matrix(m) => Failure::from(m.clone()).0,
        };
        Failure(status, e.to_string())
    }
}

impl From<EvolutionError> for Failure {
    fn from(e: EvolutionError) -> Self {
        let status = match &e {
            EvolutionError::Matrix(m) => Failure::from(m.clone()).0,
            _ => GwStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match &e {
            SimError::Matrix(m) => Failure::from(m.clone()).0,
            _ => GwStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GwStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> GwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GwStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {message}"));
            GwStatus::Panic
        }
    }
}

unsafe fn matrix_ref<'a>(m: *const GwMatrix, what: &str) -> Result<&'a Matrix, Failure> {
    m.as_ref().map(|h| &h.0).ok_or_else(|| null(what))
}

unsafe fn stochastic(m: *const GwMatrix, what: &str) -> Result<StochasticMatrix, Failure> {
    Ok(StochasticMatrix::strict(matrix_ref(m, what)?.clone())?)
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn emit_matrix(out: *mut *mut GwMatrix, m: Matrix) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(GwMatrix(m))), "out")
}

unsafe fn emit_report(out: *mut *mut GwReport, r: ConvergenceReport) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(GwReport(r))), "out")
}

unsafe fn read_square(n: usize, data: *const f64) -> Result<Matrix, Failure> {
    if data.is_null() {
        return Err(null("data"));
    }
    let len = n.checked_mul(n).ok_or_else(|| Failure(GwStatus::InvalidArgument, "dimension overflows".into()))?;
    Ok(Matrix::new(n, std::slice::from_raw_parts(data, len).to_vec())?)
}

fn criterion(c: &GwCriterion) -> ConvergenceCriterion {
    let norm = match c.norm {
        GwNorm::Frobenius => MatrixNorm::Frobenius,
        GwNorm::Spectral => MatrixNorm::Spectral,
        GwNorm::Max => MatrixNorm::MaxEntrywise,
    };
    let comparison = match c.comparison {
        GwComparison::Less => Comparison::StrictLess,
        GwComparison::LessOrEqual => Comparison::LessOrEqual,
    };
    ConvergenceCriterion::with_epsilon(c.epsilon)
        .norm(norm)
        .comparison(comparison)
        .max_iterations(c.max_iterations)
        .cycle_detection(c.cycle_detection)
}

unsafe fn criterion_from(c: *const GwCriterion) -> Result<ConvergenceCriterion, Failure> {
    c.as_ref().map(criterion).ok_or_else(|| null("criterion"))
}

fn convention(c: GwConvention) -> Convention {
    match c {
        GwConvention::FirstStepOdd => Convention::FirstStepOdd,
        GwConvention::FirstStepEven => Convention::FirstStepEven,
    }
}

/// Message describing the last failure on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default criterion: Frobenius norm, epsilon 1e-8, strict comparison,
/// 10000 iterations, no cycle detection.
#[no_mangle]
pub extern "C" fn gw_criterion_default() -> GwCriterion {
    GwCriterion {
        norm: GwNorm::Frobenius,
        epsilon: 1e-8,
        comparison: GwComparison::Less,
        max_iterations: 10_000,
        cycle_detection: false,
    }
}

/// Copies `n * n` row-major entries into a new matrix handle.
///
/// # Safety
/// `data` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_matrix_new(n: usize, data: *const f64, out: *mut *mut GwMatrix) -> GwStatus {
    guard(|| emit_matrix(out, read_square(n, data)?))
}

/// Divides each row by its sum.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_matrix_normalize(m: *const GwMatrix, out: *mut *mut GwMatrix) -> GwStatus {
    guard(|| emit_matrix(out, stochmat::normalize_rows(matrix_ref(m, "m")?)?.into_matrix()))
}

/// Transition matrix `D^-1 A` of a nonnegative affinity matrix.
///
/// # Safety
/// `data` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_matrix_from_affinity(n: usize, data: *const f64, out: *mut *mut GwMatrix) -> GwStatus {
    guard(|| {
        let a = AffinityMatrix::new(read_square(n, data)?)?;
        emit_matrix(out, stochmat::build_transition(&a)?.into_matrix())
    })
}

/// # Safety
/// `m` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gw_matrix_free(m: *mut GwMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of `m`, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gw_matrix_dim(m: *const GwMatrix) -> usize {
    m.as_ref().map_or(0, |h| h.0.dim())
}

/// Copies the row-major entries into `buf`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gw_matrix_copy(m: *const GwMatrix, buf: *mut f64, len: usize) -> GwStatus {
    guard(|| {
        let data = matrix_ref(m, "m")?.as_slice();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < data.len() {
            return Err(Failure(GwStatus::BufferTooSmall, format!("need {} doubles, got {len}", data.len())));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// Product of two row-stochastic matrices.
///
/// # Safety
/// `a`, `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_matmul(a: *const GwMatrix, b: *const GwMatrix, out: *mut *mut GwMatrix) -> GwStatus {
    guard(|| emit_matrix(out, stochmat::matmul(&stochastic(a, "a")?, &stochastic(b, "b")?)?.into_matrix()))
}

/// `||f - g||` in the chosen norm.
///
/// # Safety
/// `f`, `g` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_diff_norm(f: *const GwMatrix, g: *const GwMatrix, norm: GwNorm, out: *mut f64) -> GwStatus {
    guard(|| {
        let c = criterion(&GwCriterion { norm, ..gw_criterion_default() });
        let d = stochmat::diff_norm(matrix_ref(f, "f")?, matrix_ref(g, "g")?, c.norm)?;
        write_out(out, d, "out")
    })
}

/// Regularity test; `index` receives the smallest `k` with `T^k > 0`, or 0.
///
/// # Safety
/// `t` must be a live handle; `regular` and `index` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_chain_is_regular(t: *const GwMatrix, regular: *mut bool, index: *mut usize) -> GwStatus {
    guard(|| {
        let (r, k) = chain::is_regular(matrix_ref(t, "t")?);
        write_out(regular, r, "regular")?;
        write_out(index, k.unwrap_or(0), "index")
    })
}

/// Period of an irreducible chain.
///
/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_chain_period(t: *const GwMatrix, out: *mut usize) -> GwStatus {
    guard(|| write_out(out, chain::period(matrix_ref(t, "t")?)?, "out"))
}

/// Stationary vector of a regular chain, written to `pi[0..n]`.
///
/// # Safety
/// `t` must be a live handle; `pi` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gw_chain_stationary(t: *const GwMatrix, pi: *mut f64, len: usize) -> GwStatus {
    guard(|| {
        let m = matrix_ref(t, "t")?;
        if pi.is_null() {
            return Err(null("pi"));
        }
        if len < m.dim() {
            return Err(Failure(GwStatus::BufferTooSmall, format!("need {} doubles, got {len}", m.dim())));
        }
        let s = chain::stationary(m)?;
        ptr::copy_nonoverlapping(s.pi.as_ptr(), pi, s.pi.len());
        Ok(())
    })
}

/// Second-largest eigenvalue modulus of a stochastic matrix.
///
/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gw_chain_subdominant_modulus(t: *const GwMatrix, out: *mut f64) -> GwStatus {
    guard(|| write_out(out, chain::subdominant_modulus(matrix_ref(t, "t")?)?.subdominant_modulus, "out"))
}

/// `F <- F P` from `F_0 = P`.
///
/// # Safety
/// `p` must be a live handle; `criterion` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gw_run_diffusion(p: *const GwMatrix, criterion: *const GwCriterion, out: *mut *mut GwReport) -> GwStatus {
    guard(|| emit_report(out, evolution::run_diffusion(&stochastic(p, "p")?, &criterion_from(criterion)?)?))
}

/// `F <- alpha F P + (1 - alpha) Y` from `F_0 = P`.
///
/// # Safety
/// `p`, `y` must be live handles; `criterion` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gw_run_pagerank(
    p: *const GwMatrix,
    y: *const GwMatrix,
    alpha: f64,
    criterion: *const GwCriterion,
    out: *mut *mut GwReport,
) -> GwStatus {
    guard(|| {
        let r = evolution::run_pagerank(&stochastic(p, "p")?, &stochastic(y, "y")?, alpha, &criterion_from(criterion)?)?;
        emit_report(out, r)
    })
}

/// Diffusion with `lambda P + (1 - lambda) I` on even steps.
///
/// # Safety
/// `p` must be a live handle; `criterion` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gw_run_alternating_diffusion(
    p: *const GwMatrix,
    lambda: f64,
    convention: GwConvention,
    criterion: *const GwCriterion,
    out: *mut *mut GwReport,
) -> GwStatus {
    guard(|| {
        let r = evolution::run_alternating_diffusion(&stochastic(p, "p")?, lambda, &criterion_from(criterion)?, self::convention(convention))?;
        emit_report(out, r)
    })
}

/// PageRank with an alternating schedule selected by `variant`.
///
/// # Safety
/// `p`, `y`, `j` must be live handles; `criterion` readable; `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn gw_run_alternating_pagerank(
    p: *const GwMatrix,
    y: *const GwMatrix,
    j: *const GwMatrix,
    lambda: f64,
    alpha: f64,
    variant: GwVariant,
    convention: GwConvention,
    criterion: *const GwCriterion,
    out: *mut *mut GwReport,
) -> GwStatus {
    guard(|| {
        let variant = match variant {
            GwVariant::Both => Variant::Both,
            GwVariant::BranchingOnly => Variant::BranchingOnly,
            GwVariant::ImmigrationOnly => Variant::ImmigrationOnly,
        };
        let r = evolution::run_alternating_pagerank(
            &stochastic(p, "p")?,
            &stochastic(y, "y")?,
            &stochastic(j, "j")?,
            lambda,
            alpha,
            variant,
            &criterion_from(criterion)?,
            self::convention(convention),
        )?;
        emit_report(out, r)
    })
}

/// # Safety
/// `r` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gw_report_free(r: *mut GwReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gw_report_mode(r: *const GwReport) -> GwMode {
    match r.as_ref().map(|h| h.0.mode) {
        Some(Mode::FixedPoint) => GwMode::FixedPoint,
        Some(Mode::Period2) => GwMode::Period2,
        _ => GwMode::Exhausted,
    }
}

/// Update steps performed, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gw_report_iterations(r: *const GwReport) -> usize {
    r.as_ref().map_or(0, |h| h.0.iterations)
}

/// Number of final states: 1, or 2 for a period-2 cycle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gw_report_state_count(r: *const GwReport) -> usize {
    r.as_ref().map_or(0, |h| h.0.final_states.len())
}

/// Copies final state `k` into a new matrix handle.
///
/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gw_report_state(r: *const GwReport, k: usize, out: *mut *mut GwMatrix) -> GwStatus {
    guard(|| {
        let report = &r.as_ref().ok_or_else(|| null("r"))?.0;
        let state = report
            .final_states
            .get(k)
            .ok_or_else(|| Failure(GwStatus::InvalidArgument, format!("state {k} of {}", report.final_states.len())))?;
        emit_matrix(out, state.matrix().clone())
    })
}

/// Monte Carlo law of one lineage.
///
/// With `alpha` in (0, 1) the immigration mechanism with matrices `p` and
/// `t_or_y` is sampled at depth `generation`; with `alpha < 0` the pure
/// mutation mechanism (branching `p`, mutation `t_or_y`) at generation
/// `generation >= 1`. `out` receives the row frequencies.
///
/// # Safety
/// `p`, `t_or_y` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gw_simulate(
    p: *const GwMatrix,
    t_or_y: *const GwMatrix,
    alpha: f64,
    generation: usize,
    replicates: u64,
    seed: u64,
    out: *mut *mut GwMatrix,
) -> GwStatus {
    guard(|| {
        let (p, other) = (stochastic(p, "p")?, stochastic(t_or_y, "t_or_y")?);
        let law = if alpha < 0.0 {
            let cfg = SimConfig::new(generation, replicates, seed, Mechanism::PureMutation { p, t: other })?;
            estimate_law(&cfg, generation)?
        } else {
            let cfg = SimConfig::new(generation, replicates, seed, Mechanism::Immigration { p, y: other, alpha })?;
            estimate_pagerank_law(&cfg, generation)?
        };
        emit_matrix(out, law.frequencies.into_matrix())
    })
}
