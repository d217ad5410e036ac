//! Expected-time formulas for the walk-or-wait problem.
//!
//! The two "original" formulas are implemented exactly as they were first
//! written down, including their flaws, so the corrections can be measured
//! against them:
//!
//! * the full expression omits `+ t` in its boarding integrand and charges the
//!   fallback branch with the whole walk `d/vw`, counting `d2` twice;
//! * both use the unshifted arrival density at stop 1 even though the walker
//!   only reaches stop 2 at `d2/vw`.
//!
//! The corrected formulas shift the density by `s = d2/vw - d2/vb`, charge
//! only the remaining walk `(d - d2)/vw`, and use the same shifted density in
//! both branches.

use std::cell::Cell;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::distributions::ArrivalDistribution;
use crate::model::{EvalBreakdown, ModelError, Scenario, StrategyKind};
use crate::numerics::{find_root, integrate, NumericsError, DEFAULT_TOL};

/// Bracket width at which break-even bisection stops.
pub const ROOT_TOL: f64 = 1e-9;

/// Totals closer than this (relative to their size) are treated as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("VariantRequiresUniform: this formula needs an arrival law uniform:0,<t_b>, got {0}")]
    VariantRequiresUniform(ArrivalDistribution),
    #[error(
        "AssumptionViolated: walk time to stop 2 d2/vw = {walk_time} must be < t_b = {headway}; \
         otherwise the bus always passes the walker before the destination and the Mathematician \
         would always choose to wait"
    )]
    AssumptionViolated { walk_time: f64, headway: f64 },
    #[error("InvalidBracket: need lo < hi inside the parameter's valid range (lo = {lo}, hi = {hi})")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error(
        "NoSignChange: no indifference point: {dominant} dominates on bracket \
         (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})"
    )]
    NoIndifference { f_lo: f64, f_hi: f64, dominant: StrategyKind },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The four formula stages that can be evaluated for walk-then-wait.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FormulaVariant {
    OriginalExpr,
    OriginalEq4,
    DistanceCorrectedOnly,
    FullyCorrected,
}

impl FormulaVariant {
    pub const ALL: [FormulaVariant; 4] = [
        Self::OriginalExpr,
        Self::OriginalEq4,
        Self::DistanceCorrectedOnly,
        Self::FullyCorrected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::OriginalExpr => "original-expr",
            Self::OriginalEq4 => "original-eq4",
            Self::DistanceCorrectedOnly => "distance-corrected",
            Self::FullyCorrected => "fully-corrected",
        }
    }

    pub fn requires_uniform(self) -> bool {
        matches!(self, Self::OriginalExpr | Self::OriginalEq4)
    }
}

impl fmt::Display for FormulaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Left-hand side of the original indifference equation and its right-hand
/// side `(d - d2)/vw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eq4Evaluation {
    pub lhs: EvalBreakdown,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionReport {
    pub walk_then_wait: EvalBreakdown,
    pub wait_at_stop1: EvalBreakdown,
    pub walk_all: EvalBreakdown,
    pub recommended: StrategyKind,
    /// Second-best total minus the recommended total.
    pub margin: f64,
}

impl DecisionReport {
    pub fn breakdown(&self, strategy: StrategyKind) -> &EvalBreakdown {
        match strategy {
            StrategyKind::WalkThenWait => &self.walk_then_wait,
            StrategyKind::WaitAtStop1 => &self.wait_at_stop1,
            StrategyKind::WalkAll => &self.walk_all,
        }
    }
}

fn uniform_headway(dist: &ArrivalDistribution) -> Result<f64, EngineError> {
    dist.headway().ok_or(EngineError::VariantRequiresUniform(*dist))
}

/// Mass of `p` on `[0, tw]`.
fn mass_to(p: &ArrivalDistribution, tw: f64) -> f64 {
    p.cdf(tw) - p.cdf(0.0)
}

/// `∫₀^tw pdf(t + shift) (offset + t) dt`, split at the density's jumps.
fn expected_board(dist: &ArrivalDistribution, shift: f64, offset: f64, tw: f64) -> Result<f64, EngineError> {
    let bps = dist.shifted_breakpoints(shift, 0.0, tw);
    let r = integrate(|t| dist.pdf(t + shift) * (offset + t), 0.0, tw, DEFAULT_TOL, &bps)?;
    Ok(r.value)
}

/// The full expected-time expression as originally written, boarding term
/// without `+ t`. `general_p` replaces the density in the fallback weight and
/// defaults to `dist`.
pub fn original_total_expression(
    s: &Scenario,
    dist: &ArrivalDistribution,
    general_p: Option<&ArrivalDistribution>,
) -> Result<EvalBreakdown, EngineError> {
    let tb = uniform_headway(dist)?;
    let p = general_p.unwrap_or(dist);
    let k = s.derive();
    let tw = s.tw();
    let board = integrate(|_| k.ride_rest / tb, 0.0, tw, DEFAULT_TOL, &[])?.value;
    let p_board = mass_to(p, tw);
    let fallback = (1.0 - p_board) * (k.walk_all + tw);
    let mut out = EvalBreakdown::from_terms(s.walk_to_stop2(), board, fallback, (p_board, 0.0, 1.0 - p_board));
    out.out_of_support = tw > tb;
    Ok(out)
}

/// The original indifference equation: boarding term with `+ t`, fallback
/// still charged `d/vw`, and no walk to stop 2 on the left-hand side.
pub fn original_eq4_lhs(
    s: &Scenario,
    dist: &ArrivalDistribution,
    general_p: Option<&ArrivalDistribution>,
) -> Result<Eq4Evaluation, EngineError> {
    let tb = uniform_headway(dist)?;
    let p = general_p.unwrap_or(dist);
    let k = s.derive();
    let tw = s.tw();
    let board = integrate(|t| (k.ride_rest + t) / tb, 0.0, tw, DEFAULT_TOL, &[])?.value;
    let p_board = mass_to(p, tw);
    let fallback = (1.0 - p_board) * (k.walk_all + tw);
    let mut lhs = EvalBreakdown::from_terms(0.0, board, fallback, (p_board, 0.0, 1.0 - p_board));
    lhs.out_of_support = tw > tb;
    Ok(Eq4Evaluation { lhs, rhs: k.walk_rest })
}

/// Fallback term with only the remaining walk charged, still weighted by the
/// unshifted density.
pub fn distance_corrected_term2(s: &Scenario, dist: &ArrivalDistribution) -> f64 {
    let tw = s.tw();
    (1.0 - mass_to(dist, tw)) * (s.derive().walk_rest + tw)
}

/// Distance correction alone: walk to stop 2, unshifted boarding integral
/// with `+ t`, and [`distance_corrected_term2`].
pub fn distance_corrected_total(s: &Scenario, dist: &ArrivalDistribution) -> Result<EvalBreakdown, EngineError> {
    let k = s.derive();
    let tw = s.tw();
    let board = expected_board(dist, 0.0, k.ride_rest, tw)?;
    let p_board = mass_to(dist, tw);
    Ok(EvalBreakdown::from_terms(
        s.walk_to_stop2(),
        board,
        distance_corrected_term2(s, dist),
        (p_board, 0.0, 1.0 - p_board),
    ))
}

/// Stop-1 arrival time of a bus that reaches stop 2 after the walker has
/// waited `t` there.
pub fn t_corrected(s: &Scenario, t: f64) -> f64 {
    t + s.derive().shift_s
}

/// Expected boarding contribution and boarding probability at stop 2 under
/// the shifted density.
pub fn corrected_boarding_integral(s: &Scenario, dist: &ArrivalDistribution) -> Result<(f64, f64), EngineError> {
    let k = s.derive();
    let tw = s.tw();
    let value = expected_board(dist, k.shift_s, k.ride_rest, tw)?;
    let p_board = dist.cdf(k.shift_s + tw) - dist.cdf(k.shift_s);
    Ok((value, p_board))
}

/// Expected remaining time once the walker stands at stop 2.
pub fn corrected_post_stop2(s: &Scenario, dist: &ArrivalDistribution) -> Result<EvalBreakdown, EngineError> {
    let k = s.derive();
    let tw = s.tw();
    let (board, p_board) = corrected_boarding_integral(s, dist)?;
    let fallback = (1.0 - p_board) * (k.walk_rest + tw);
    let p_missed = dist.missed_mass(k.shift_s);
    let p_no_bus = 1.0 - dist.cdf(k.shift_s + tw);
    Ok(EvalBreakdown::from_terms(0.0, board, fallback, (p_board, p_missed, p_no_bus)))
}

/// Expected door-to-door time of walk-then-wait with every correction applied.
pub fn corrected_total(s: &Scenario, dist: &ArrivalDistribution) -> Result<EvalBreakdown, EngineError> {
    let post = corrected_post_stop2(s, dist)?;
    Ok(EvalBreakdown::from_terms(
        s.walk_to_stop2(),
        post.board_term,
        post.fallback_term,
        (post.p_board, post.p_missed_early, post.p_no_bus),
    ))
}

pub fn wait_at_stop1(s: &Scenario, dist: &ArrivalDistribution) -> Result<EvalBreakdown, EngineError> {
    let k = s.derive();
    let tw = s.tw();
    let board = expected_board(dist, 0.0, s.d() / s.vb(), tw)?;
    let p_board = mass_to(dist, tw);
    let fallback = (1.0 - dist.cdf(tw)) * (tw + k.walk_all);
    Ok(EvalBreakdown::from_terms(0.0, board, fallback, (p_board, 0.0, 1.0 - dist.cdf(tw))))
}

pub fn walk_all(s: &Scenario) -> EvalBreakdown {
    EvalBreakdown::deterministic(s.derive().walk_all)
}

/// Total journey time under `variant`. The original indifference equation
/// contributes its left-hand side as printed.
pub fn evaluate(s: &Scenario, dist: &ArrivalDistribution, variant: FormulaVariant) -> Result<EvalBreakdown, EngineError> {
    match variant {
        FormulaVariant::OriginalExpr => original_total_expression(s, dist, None),
        FormulaVariant::OriginalEq4 => original_eq4_lhs(s, dist, None).map(|e| e.lhs),
        FormulaVariant::DistanceCorrectedOnly => distance_corrected_total(s, dist),
        FormulaVariant::FullyCorrected => corrected_total(s, dist),
    }
}

pub fn strategy_total(s: &Scenario, dist: &ArrivalDistribution, strategy: StrategyKind) -> Result<EvalBreakdown, EngineError> {
    match strategy {
        StrategyKind::WalkThenWait => corrected_total(s, dist),
        StrategyKind::WaitAtStop1 => wait_at_stop1(s, dist),
        StrategyKind::WalkAll => Ok(walk_all(s)),
    }
}

fn residual_gate(s: &Scenario, tb: f64) -> Result<f64, EngineError> {
    let walk_time = s.walk_to_stop2();
    if !(tb > 0.0) || !(walk_time < tb) {
        return Err(EngineError::AssumptionViolated { walk_time, headway: tb });
    }
    Ok(walk_time)
}

/// Extra wait when the bus overtakes the walker before stop 2, by quadrature
/// of `(1/tb) [(tb - t) - (d2 - vw t)/vw]` over `[0, d2/vw]`.
pub fn residual_uniform(s: &Scenario, tb: f64) -> Result<f64, EngineError> {
    let walk_time = residual_gate(s, tb)?;
    let (d2, vw) = (s.d2(), s.vw());
    let r = integrate(|t| ((tb - t) - (d2 - vw * t) / vw) / tb, 0.0, walk_time, DEFAULT_TOL, &[])?;
    Ok(r.value)
}

/// Same integral in closed form: `(d2/vw)(tb - d2/vw)/tb`.
pub fn residual_closed_form(s: &Scenario, tb: f64) -> Result<f64, EngineError> {
    let walk_time = residual_gate(s, tb)?;
    Ok(walk_time * (tb - walk_time) / tb)
}

/// Solves `f(x) = 0` on `[lo, hi]` where `f` may fail; negative `f` means
/// waiting at stop 2 beats walking on.
fn solve_indifference<F>(f: F, lo: f64, hi: f64) -> Result<f64, EngineError>
where
    F: Fn(f64) -> Result<f64, EngineError>,
{
    let failure: Cell<Option<EngineError>> = Cell::new(None);
    let g = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let result = find_root(g, lo, hi, ROOT_TOL);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    match result {
        Ok(x) => Ok(x),
        Err(NumericsError::NoSignChange { f_lo, f_hi }) => {
            let dominant = if f_lo < 0.0 { StrategyKind::WalkThenWait } else { StrategyKind::WalkAll };
            Err(EngineError::NoIndifference { f_lo, f_hi, dominant })
        }
        Err(NumericsError::InvalidBracket { lo, hi }) => Err(EngineError::InvalidBracket { lo, hi }),
        Err(e) => Err(e.into()),
    }
}

/// Indifference residual in the waiting budget: expected remaining time at
/// stop 2 minus the remaining walk.
pub fn indifference_in_tw(s: &Scenario, dist: &ArrivalDistribution, tw: f64) -> Result<f64, EngineError> {
    let at = s.with_tw(tw)?;
    Ok(corrected_post_stop2(&at, dist)?.total - at.derive().walk_rest)
}

/// Indifference residual in the stop-2 position.
pub fn indifference_in_d2(s: &Scenario, dist: &ArrivalDistribution, d2: f64) -> Result<f64, EngineError> {
    let at = s.with_d2(d2)?;
    Ok(corrected_post_stop2(&at, dist)?.total - at.derive().walk_rest)
}

/// Waiting budget at which waiting at stop 2 and walking on tie.
///
/// Every scenario ties trivially at `tw = 0`; a bracket starting there is
/// evaluated just inside so that root is not reported.
pub fn breakeven_tw(s: &Scenario, dist: &ArrivalDistribution, lo: f64, hi: f64) -> Result<f64, EngineError> {
    if !(lo < hi) || lo < 0.0 {
        return Err(EngineError::InvalidBracket { lo, hi });
    }
    let lo = if lo == 0.0 { (1e-3 * hi).min(1e-9) } else { lo };
    solve_indifference(|tw| indifference_in_tw(s, dist, tw), lo, hi)
}

/// Stop-2 position at which waiting there and walking on tie, for the
/// scenario's waiting budget.
pub fn breakeven_d2(s: &Scenario, dist: &ArrivalDistribution, lo: f64, hi: f64) -> Result<f64, EngineError> {
    if !(lo < hi) || lo < 0.0 || hi > s.d() {
        return Err(EngineError::InvalidBracket { lo, hi });
    }
    solve_indifference(|d2| indifference_in_d2(s, dist, d2), lo, hi)
}

/// Evaluates the three strategies and recommends the cheapest. Totals tied
/// within [`TIE_TOL`] go to wait-at-stop-1, then walk-then-wait, then walk-all.
pub fn decide(s: &Scenario, dist: &ArrivalDistribution) -> Result<DecisionReport, EngineError> {
    let walk_then_wait = corrected_total(s, dist)?;
    let wait1 = wait_at_stop1(s, dist)?;
    let walk = walk_all(s);

    let preference = [
        (StrategyKind::WaitAtStop1, wait1.total),
        (StrategyKind::WalkThenWait, walk_then_wait.total),
        (StrategyKind::WalkAll, walk.total),
    ];
    let mut best = preference[0];
    for &cand in &preference[1..] {
        if cand.1 < best.1 - TIE_TOL * best.1.abs().max(1.0) {
            best = cand;
        }
    }
    let second = preference
        .iter()
        .filter(|c| c.0 != best.0)
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);

    Ok(DecisionReport {
        walk_then_wait,
        wait_at_stop1: wait1,
        walk_all: walk,
        recommended: best.0,
        margin: (second - best.1).max(0.0),
    })
}
