//! Scenario parameters, validation, and the kinematic quantities derived from them.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A constraint violated by a set of raw scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("NonPositiveDistance: d must be > 0")]
    NonPositiveDistance,
    #[error("Stop2BeyondDestination: d2 must satisfy 0 <= d2 <= d")]
    Stop2BeyondDestination,
    #[error("SpeedOrderViolated: speeds must satisfy vb > vw > 0")]
    SpeedOrderViolated,
    #[error("NegativeWait: tw must be >= 0")]
    NegativeWait,
}

/// Geometry, speeds, and waiting budget of one walk-or-wait problem.
///
/// Lengths and times may be in any units as long as they agree; nothing here
/// converts units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    d: f64,
    d2: f64,
    vw: f64,
    vb: f64,
    tw: f64,
}

impl Scenario {
    /// Validates raw parameters, returning the first violated constraint.
    pub fn new(d: f64, d2: f64, vw: f64, vb: f64, tw: f64) -> Result<Self, ModelError> {
        match Self::violations(d, d2, vw, vb, tw).first() {
            Some(err) => Err(*err),
            None => Ok(Self { d, d2, vw, vb, tw }),
        }
    }

    /// Every constraint the raw parameters violate, in a fixed order.
    ///
    /// NaN inputs fail every comparison they take part in.
    pub fn violations(d: f64, d2: f64, vw: f64, vb: f64, tw: f64) -> Vec<ModelError> {
        let mut out = Vec::new();
        if !(d > 0.0 && d.is_finite()) {
            out.push(ModelError::NonPositiveDistance);
        }
        if !(d2 >= 0.0 && d2 <= d) {
            out.push(ModelError::Stop2BeyondDestination);
        }
        if !(vw > 0.0 && vb > vw && vb.is_finite()) {
            out.push(ModelError::SpeedOrderViolated);
        }
        if !(tw >= 0.0 && tw.is_finite()) {
            out.push(ModelError::NegativeWait);
        }
        out
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn vw(&self) -> f64 {
        self.vw
    }

    pub fn vb(&self) -> f64 {
        self.vb
    }

    pub fn tw(&self) -> f64 {
        self.tw
    }

    /// Same scenario with a different waiting budget.
    pub fn with_tw(&self, tw: f64) -> Result<Self, ModelError> {
        Self::new(self.d, self.d2, self.vw, self.vb, tw)
    }

    /// Same scenario with stop 2 moved to `d2`.
    pub fn with_d2(&self, d2: f64) -> Result<Self, ModelError> {
        Self::new(self.d, d2, self.vw, self.vb, self.tw)
    }

    pub fn with_vw(&self, vw: f64) -> Result<Self, ModelError> {
        Self::new(self.d, self.d2, vw, self.vb, self.tw)
    }

    pub fn with_vb(&self, vb: f64) -> Result<Self, ModelError> {
        Self::new(self.d, self.d2, self.vw, vb, self.tw)
    }

    /// Time for the walker to reach stop 2.
    pub fn walk_to_stop2(&self) -> f64 {
        self.d2 / self.vw
    }

    pub fn derive(&self) -> DerivedKinematics {
        DerivedKinematics {
            shift_s: self.d2 / self.vw - self.d2 / self.vb,
            ride_rest: (self.d - self.d2) / self.vb,
            walk_rest: (self.d - self.d2) / self.vw,
            walk_all: self.d / self.vw,
        }
    }
}

/// Times derived from a [`Scenario`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedKinematics {
    /// Lead of the walker over the bus at stop 2: `d2/vw - d2/vb`.
    pub shift_s: f64,
    /// Bus ride from stop 2 to the destination: `(d - d2)/vb`.
    pub ride_rest: f64,
    /// Walk from stop 2 to the destination: `(d - d2)/vw`.
    pub walk_rest: f64,
    /// Walk from stop 1 to the destination: `d/vw`.
    pub walk_all: f64,
}

/// The three strategies the traveller can follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StrategyKind {
    /// Walk to stop 2, wait there up to `tw`, then walk the rest.
    WalkThenWait,
    /// Wait at stop 1 up to `tw`, then walk the whole way.
    WaitAtStop1,
    /// Walk the whole way immediately.
    WalkAll,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [Self::WalkThenWait, Self::WaitAtStop1, Self::WalkAll];

    pub fn name(self) -> &'static str {
        match self {
            Self::WalkThenWait => "walk-then-wait",
            Self::WaitAtStop1 => "wait-at-stop1",
            Self::WalkAll => "walk-all",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-term decomposition of an expected travel time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalBreakdown {
    /// Walk to stop 2 (`d2/vw`) when it is part of the formula, else 0.
    pub pre_walk: f64,
    /// Expected contribution of the boarding branch.
    pub board_term: f64,
    /// Expected contribution of the no-board branch.
    pub fallback_term: f64,
    pub total: f64,
    pub p_board: f64,
    pub p_missed_early: f64,
    pub p_no_bus: f64,
    /// Set when a literal formula integrated a density past its support.
    pub out_of_support: bool,
}

impl EvalBreakdown {
    pub(crate) fn from_terms(
        pre_walk: f64,
        board_term: f64,
        fallback_term: f64,
        (p_board, p_missed_early, p_no_bus): (f64, f64, f64),
    ) -> Self {
        Self {
            pre_walk,
            board_term,
            fallback_term,
            total: pre_walk + board_term + fallback_term,
            p_board,
            p_missed_early,
            p_no_bus,
            out_of_support: false,
        }
    }

    /// Deterministic outcome: no bus is ever involved.
    pub(crate) fn deterministic(total: f64) -> Self {
        Self::from_terms(0.0, 0.0, total, (0.0, 0.0, 1.0))
    }

    pub fn probability_sum(&self) -> f64 {
        self.p_board + self.p_missed_early + self.p_no_bus
    }
}
