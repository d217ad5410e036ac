//! C ABI over the `walkwait` library.
//!
//! Scenarios and arrival laws are opaque heap handles created by the
//! `*_new`/constructor functions and released with the matching `*_free`.
//! Every fallible call returns a `WwStatus`; on failure a message is kept
//! per thread and can be read with `ww_last_error`. Output pointers are only
//! written on `WW_STATUS_OK`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use walkwait::engine::{self, EngineError};
use walkwait::numerics::NumericsError;
use walkwait::{mcsim, ArrivalDistribution, EvalBreakdown, FormulaVariant, Scenario, StrategyKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidScenario = 2,
    InvalidDistribution = 3,
    RequiresUniform = 4,
    AssumptionViolated = 5,
    NoSignChange = 6,
    InvalidBracket = 7,
    Numerics = 8,
    InvalidArgument = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WwVariant {
    OriginalExpr = 0,
    OriginalEq4 = 1,
    DistanceCorrected = 2,
    FullyCorrected = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WwStrategy {
    WalkThenWait = 0,
    WaitAtStop1 = 1,
    WalkAll = 2,
}

impl From<WwVariant> for FormulaVariant {
    fn from(v: WwVariant) -> Self {
        match v {
            WwVariant::OriginalExpr => FormulaVariant::OriginalExpr,
            WwVariant::OriginalEq4 => FormulaVariant::OriginalEq4,
            WwVariant::DistanceCorrected => FormulaVariant::DistanceCorrectedOnly,
            WwVariant::FullyCorrected => FormulaVariant::FullyCorrected,
        }
    }
}

impl From<WwStrategy> for StrategyKind {
    fn from(s: WwStrategy) -> Self {
        match s {
            WwStrategy::WalkThenWait => StrategyKind::WalkThenWait,
            WwStrategy::WaitAtStop1 => StrategyKind::WaitAtStop1,
            WwStrategy::WalkAll => StrategyKind::WalkAll,
        }
    }
}

impl From<StrategyKind> for WwStrategy {
    fn from(s: StrategyKind) -> Self {
        match s {
            StrategyKind::WalkThenWait => WwStrategy::WalkThenWait,
            StrategyKind::WaitAtStop1 => WwStrategy::WaitAtStop1,
            StrategyKind::WalkAll => WwStrategy::WalkAll,
        }
    }
}

/// Opaque scenario handle.
pub struct WwScenario(Scenario);

/// Opaque arrival-law handle.
pub struct WwDistribution(ArrivalDistribution);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WwKinematics {
    pub shift_s: f64,
    pub ride_rest: f64,
    pub walk_rest: f64,
    pub walk_all: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WwBreakdown {
    pub pre_walk: f64,
    pub board_term: f64,
    pub fallback_term: f64,
    pub total: f64,
    pub p_board: f64,
    pub p_missed_early: f64,
    pub p_no_bus: f64,
    pub out_of_support: bool,
}

impl From<EvalBreakdown> for WwBreakdown {
    fn from(b: EvalBreakdown) -> Self {
        WwBreakdown {
            pre_walk: b.pre_walk,
            board_term: b.board_term,
            fallback_term: b.fallback_term,
            total: b.total,
            p_board: b.p_board,
            p_missed_early: b.p_missed_early,
            p_no_bus: b.p_no_bus,
            out_of_support: b.out_of_support,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WwDecision {
    pub walk_then_wait: WwBreakdown,
    pub wait_at_stop1: WwBreakdown,
    pub walk_all: WwBreakdown,
    pub recommended: WwStrategy,
    pub margin: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WwSimStats {
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub freq_board: f64,
    pub freq_missed_early: f64,
    pub freq_no_bus: f64,
}

/// Renewal-mode statistics. `extra_mean` and `extra_stderr` are NaN when no
/// trial was overtaken.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WwRenewalStats {
    pub trials: u64,
    pub overtaken: u64,
    pub freq_overtaken: f64,
    pub extra_mean: f64,
    pub extra_stderr: f64,
    pub weighted_mean: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: WwStatus, msg: impl Into<String>) -> WwStatus {
    set_error(msg.into());
    status
}

fn engine_status(e: &EngineError) -> WwStatus {
    match e {
        EngineError::VariantRequiresUniform(_) => WwStatus::RequiresUniform,
        EngineError::AssumptionViolated { .. } => WwStatus::AssumptionViolated,
        EngineError::InvalidBracket { .. } => WwStatus::InvalidBracket,
        EngineError::NoIndifference { .. } => WwStatus::NoSignChange,
        EngineError::Model(_) => WwStatus::InvalidScenario,
        EngineError::Numerics(NumericsError::NoSignChange { .. }) => WwStatus::NoSignChange,
        EngineError::Numerics(NumericsError::InvalidBracket { .. }) => WwStatus::InvalidBracket,
        EngineError::Numerics(_) => WwStatus::Numerics,
    }
}

fn from_engine(e: EngineError) -> WwStatus {
    fail(engine_status(&e), e.to_string())
}

/// Runs `f`, turning a panic into `WW_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> WwStatus) -> WwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(WwStatus::Panic, "internal panic"),
    }
}

unsafe fn write<T>(out: *mut T, value: T) {
    // SAFETY: callers check `out` for null first.
    unsafe { out.write(value) }
}

macro_rules! deref {
    ($p:expr, $name:literal) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(WwStatus::NullPointer, concat!($name, " is null")),
        }
    };
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(WwStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Message for the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ww_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn ww_status_name(status: WwStatus) -> *const c_char {
    let s: &'static CStr = match status {
        WwStatus::Ok => c"ok",
        WwStatus::NullPointer => c"null pointer",
        WwStatus::InvalidScenario => c"invalid scenario",
        WwStatus::InvalidDistribution => c"invalid distribution",
        WwStatus::RequiresUniform => c"formula requires uniform:0,b arrivals",
        WwStatus::AssumptionViolated => c"assumption violated",
        WwStatus::NoSignChange => c"no sign change",
        WwStatus::InvalidBracket => c"invalid bracket",
        WwStatus::Numerics => c"numerical failure",
        WwStatus::InvalidArgument => c"invalid argument",
        WwStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_scenario_new(d: f64, d2: f64, vw: f64, vb: f64, tw: f64, out: *mut *mut WwScenario) -> WwStatus {
    guard(|| {
        nonnull!(out);
        match Scenario::new(d, d2, vw, vb, tw) {
            Ok(s) => {
                unsafe { write(out, Box::into_raw(Box::new(WwScenario(s)))) };
                WwStatus::Ok
            }
            Err(e) => fail(WwStatus::InvalidScenario, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be null or a handle from `ww_scenario_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ww_scenario_free(s: *mut WwScenario) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// # Safety
/// `s` must be a live scenario handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_scenario_derive(s: *const WwScenario, out: *mut WwKinematics) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        nonnull!(out);
        let k = s.0.derive();
        unsafe {
            write(
                out,
                WwKinematics { shift_s: k.shift_s, ride_rest: k.ride_rest, walk_rest: k.walk_rest, walk_all: k.walk_all },
            )
        };
        WwStatus::Ok
    })
}

fn new_distribution(d: Result<ArrivalDistribution, impl ToString>, out: *mut *mut WwDistribution) -> WwStatus {
    nonnull!(out);
    match d {
        Ok(d) => {
            unsafe { write(out, Box::into_raw(Box::new(WwDistribution(d)))) };
            WwStatus::Ok
        }
        Err(e) => fail(WwStatus::InvalidDistribution, e.to_string()),
    }
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_distribution_uniform(a: f64, b: f64, out: *mut *mut WwDistribution) -> WwStatus {
    guard(|| new_distribution(ArrivalDistribution::uniform(a, b), out))
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_distribution_exponential(rate: f64, out: *mut *mut WwDistribution) -> WwStatus {
    guard(|| new_distribution(ArrivalDistribution::exponential(rate), out))
}

/// Parses `uniform:<a>,<b>` or `exp:<rate>`.
///
/// # Safety
/// `spec` must be null or a NUL-terminated string; `out` null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ww_distribution_parse(spec: *const c_char, out: *mut *mut WwDistribution) -> WwStatus {
    guard(|| {
        nonnull!(spec);
        let text = match unsafe { CStr::from_ptr(spec) }.to_str() {
            Ok(t) => t,
            Err(_) => return fail(WwStatus::InvalidDistribution, "spec is not UTF-8"),
        };
        new_distribution(text.parse::<ArrivalDistribution>(), out)
    })
}

/// # Safety
/// `d` must be null or a handle from a distribution constructor not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ww_distribution_free(d: *mut WwDistribution) {
    if !d.is_null() {
        drop(unsafe { Box::from_raw(d) });
    }
}

/// Expected walk-then-wait time under one formula variant.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_eval(
    s: *const WwScenario,
    dist: *const WwDistribution,
    variant: WwVariant,
    out: *mut WwBreakdown,
) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        let dist = deref!(dist, "distribution");
        nonnull!(out);
        match engine::evaluate(&s.0, &dist.0, variant.into()) {
            Ok(b) => {
                unsafe { write(out, b.into()) };
                WwStatus::Ok
            }
            Err(e) => from_engine(e),
        }
    })
}

/// Corrected expected time for one strategy.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_strategy_total(
    s: *const WwScenario,
    dist: *const WwDistribution,
    strategy: WwStrategy,
    out: *mut WwBreakdown,
) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        let dist = deref!(dist, "distribution");
        nonnull!(out);
        match engine::strategy_total(&s.0, &dist.0, strategy.into()) {
            Ok(b) => {
                unsafe { write(out, b.into()) };
                WwStatus::Ok
            }
            Err(e) => from_engine(e),
        }
    })
}

/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_decide(s: *const WwScenario, dist: *const WwDistribution, out: *mut WwDecision) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        let dist = deref!(dist, "distribution");
        nonnull!(out);
        match engine::decide(&s.0, &dist.0) {
            Ok(r) => {
                let d = WwDecision {
                    walk_then_wait: r.walk_then_wait.into(),
                    wait_at_stop1: r.wait_at_stop1.into(),
                    walk_all: r.walk_all.into(),
                    recommended: r.recommended.into(),
                    margin: r.margin,
                };
                unsafe { write(out, d) };
                WwStatus::Ok
            }
            Err(e) => from_engine(e),
        }
    })
}

/// Residual term for a uniform headway `tb`, by quadrature and in closed
/// form. Either output may be null.
///
/// # Safety
/// `s` must be live; non-null outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_residual(s: *const WwScenario, tb: f64, quad: *mut f64, closed: *mut f64) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        let q = match engine::residual_uniform(&s.0, tb) {
            Ok(v) => v,
            Err(e) => return from_engine(e),
        };
        let c = match engine::residual_closed_form(&s.0, tb) {
            Ok(v) => v,
            Err(e) => return from_engine(e),
        };
        if !quad.is_null() {
            unsafe { write(quad, q) };
        }
        if !closed.is_null() {
            unsafe { write(closed, c) };
        }
        WwStatus::Ok
    })
}

/// Waiting budget at which walk-then-wait and walk-all tie, searched on
/// `[lo, hi]`.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_breakeven_tw(
    s: *const WwScenario,
    dist: *const WwDistribution,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        let dist = deref!(dist, "distribution");
        nonnull!(out);
        match engine::breakeven_tw(&s.0, &dist.0, lo, hi) {
            Ok(v) => {
                unsafe { write(out, v) };
                WwStatus::Ok
            }
            Err(e) => from_engine(e),
        }
    })
}

/// Stop-2 position at which walk-then-wait and walk-all tie, searched on
/// `[lo, hi]`.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_breakeven_d2(
    s: *const WwScenario,
    dist: *const WwDistribution,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        let dist = deref!(dist, "distribution");
        nonnull!(out);
        match engine::breakeven_d2(&s.0, &dist.0, lo, hi) {
            Ok(v) => {
                unsafe { write(out, v) };
                WwStatus::Ok
            }
            Err(e) => from_engine(e),
        }
    })
}

/// Monte Carlo estimate for one strategy. Results depend only on `seed` and
/// `trials`, not on thread count.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_run_mc(
    s: *const WwScenario,
    strategy: WwStrategy,
    dist: *const WwDistribution,
    trials: u64,
    seed: u64,
    out: *mut WwSimStats,
) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        let dist = deref!(dist, "distribution");
        nonnull!(out);
        if trials == 0 {
            return fail(WwStatus::InvalidArgument, "trials must be positive");
        }
        let r = mcsim::run_mc(&s.0, strategy.into(), &dist.0, trials, seed);
        let stats = WwSimStats {
            trials: r.trials,
            mean: r.mean,
            stderr: r.stderr,
            freq_board: r.freq_board,
            freq_missed_early: r.freq_missed_early,
            freq_no_bus: r.freq_no_bus,
        };
        unsafe { write(out, stats) };
        WwStatus::Ok
    })
}

/// Two-bus renewal simulation with headway `tb`.
///
/// # Safety
/// `s` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ww_run_renewal(
    s: *const WwScenario,
    tb: f64,
    trials: u64,
    seed: u64,
    out: *mut WwRenewalStats,
) -> WwStatus {
    guard(|| {
        let s = deref!(s, "scenario");
        nonnull!(out);
        if trials == 0 {
            return fail(WwStatus::InvalidArgument, "trials must be positive");
        }
        match mcsim::run_renewal(&s.0, tb, trials, seed) {
            Ok(r) => {
                let (extra_mean, extra_stderr) = r.extra_wait.map_or((f64::NAN, f64::NAN), |e| (e.mean, e.stderr));
                let stats = WwRenewalStats {
                    trials: r.trials,
                    overtaken: r.overtaken,
                    freq_overtaken: r.freq_overtaken,
                    extra_mean,
                    extra_stderr,
                    weighted_mean: r.weighted_mean,
                };
                unsafe { write(out, stats) };
                WwStatus::Ok
            }
            Err(e) => from_engine(e),
        }
    })
}
