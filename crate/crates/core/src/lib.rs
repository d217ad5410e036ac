//! Expected travel times for the walk-or-wait bus problem.
//!
//! A traveller at bus stop 1 can wait there for the bus, walk to stop 2 and
//! wait there, or walk the whole way. [`engine`] evaluates the expected
//! door-to-door time of each choice, both under the original formulas and
//! under corrected ones that shift the arrival density and stop
//! double-counting the walk to stop 2. [`mcsim`] replays the same journeys by
//! simulation as an independent check.

// NaN must fail these checks, so `!(a < b)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod engine;
pub mod mcsim;
pub mod model;
pub mod numerics;

pub use distributions::{ArrivalDistribution, DistributionError, SeededRng, Support};
pub use engine::{DecisionReport, EngineError, Eq4Evaluation, FormulaVariant};
pub use mcsim::{RenewalStats, SimStats, TrialEvent, TrialOutcome};
pub use model::{DerivedKinematics, EvalBreakdown, ModelError, Scenario, StrategyKind};
pub use numerics::{NumericsError, QuadResult};
