//! Laws for the bus arrival time at stop 1, and the shifted view of them seen
//! by a walker who reaches stop 2 later than the bus would.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Tail mass dropped when truncating an unbounded support.
pub const TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("EmptySupport: uniform needs b > a >= 0 (a = {a}, b = {b})")]
    EmptySupport { a: f64, b: f64 },
    #[error("NonPositiveRate: exponential rate must be > 0 (rate = {0})")]
    NonPositiveRate(f64),
    #[error("invalid distribution spec {0:?}: expected `uniform:<a>,<b>` or `exp:<rate>`")]
    BadSpec(String),
}

/// Bus arrival-time law at stop 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalDistribution {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
}

/// Closed lower end and possibly unbounded upper end of a support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl ArrivalDistribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self, DistributionError> {
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(DistributionError::EmptySupport { a, b });
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self, DistributionError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(DistributionError::NonPositiveRate(rate));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn support(&self) -> Support {
        match *self {
            Self::Uniform { a, b } => Support { lo: a, hi: Some(b) },
            Self::Exponential { .. } => Support { lo: 0.0, hi: None },
        }
    }

    /// Headway `t_b` of a uniform law starting at 0.
    pub fn headway(&self) -> Option<f64> {
        match *self {
            Self::Uniform { a: 0.0, b } => Some(b),
            _ => None,
        }
    }

    /// Finite upper end for integration: the support end, or the
    /// `1 - TAIL_MASS` quantile when unbounded.
    pub fn effective_upper(&self) -> f64 {
        match self.support().hi {
            Some(hi) => hi,
            None => self.quantile(1.0 - TAIL_MASS),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => {
                if (a..=b).contains(&t) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Self::Exponential { rate } => {
                if t >= 0.0 {
                    rate * (-rate * t).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let p = match *self {
            Self::Uniform { a, b } => (t - a) / (b - a),
            Self::Exponential { rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
        };
        p.clamp(0.0, 1.0)
    }

    /// Inverse CDF for `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => a + p * (b - a),
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }

    /// Density of the waiting time at stop 2, `pdf(t + shift_s)`.
    ///
    /// This is sub-normalised: its mass falls short of one by
    /// [`missed_mass`](Self::missed_mass).
    pub fn shifted_pdf(&self, shift_s: f64, t: f64) -> f64 {
        self.pdf(t + shift_s)
    }

    /// Probability that the bus has already passed stop 2 when the walker
    /// gets there.
    pub fn missed_mass(&self, shift_s: f64) -> f64 {
        self.cdf(shift_s)
    }

    /// Points in `[lo, hi]` where `pdf(t + shift)` can jump.
    pub fn shifted_breakpoints(&self, shift: f64, lo: f64, hi: f64) -> Vec<f64> {
        let support = self.support();
        [Some(support.lo), support.hi]
            .into_iter()
            .flatten()
            .map(|edge| edge - shift)
            .filter(|&x| x > lo && x < hi)
            .collect()
    }

    /// One inverse-CDF draw, consuming a single uniform from `rng`.
    pub fn sample(&self, rng: &mut SeededRng) -> f64 {
        self.quantile(rng.next_unit())
    }
}

impl fmt::Display for ArrivalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { a, b } => write!(f, "uniform:{a},{b}"),
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
        }
    }
}

impl FromStr for ArrivalDistribution {
    type Err = DistributionError;

    /// Parses `uniform:<a>,<b>` or `exp:<rate>`.
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let bad = || DistributionError::BadSpec(spec.to_string());
        let number = |s: &str| -> Result<f64, DistributionError> {
            let s = s.trim();
            // Rust accepts "inf"/"nan"; the grammar only admits decimal literals.
            if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit() || b"+-.eE".contains(&c)) {
                return Err(bad());
            }
            s.parse().map_err(|_| bad())
        };
        let (kind, args) = spec.trim().split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "uniform" => {
                let (a, b) = args.split_once(',').ok_or_else(bad)?;
                Self::uniform(number(a)?, number(b)?)
            }
            "exp" => Self::exponential(number(args)?),
            _ => Err(bad()),
        }
    }
}

/// Seeded pseudo-random stream; identical seeds replay identical draws.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream for chunk `index` of a run seeded with `master`.
    pub fn for_chunk(master: u64, index: u64) -> Self {
        Self::new(mix(master ^ mix(index.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

// splitmix64 finaliser
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
