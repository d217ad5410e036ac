//! Monte Carlo journeys, used as an oracle independent of the quadrature
//! formulas.
//!
//! Trials are grouped into fixed chunks of [`CHUNK_TRIALS`]; chunk `i` draws
//! from its own stream seeded by `(seed, i)`. Partial statistics are merged in
//! chunk order, so a run is bitwise reproducible whether chunks execute on
//! one thread or many.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{ArrivalDistribution, SeededRng};
use crate::engine::EngineError;
use crate::model::{Scenario, StrategyKind};

pub const CHUNK_TRIALS: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TrialEvent {
    Boarded,
    /// The bus passed stop 2 before the walker got there.
    MissedEarly,
    NoBusInWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub strategy: StrategyKind,
    pub bus_t1: f64,
    pub event: TrialEvent,
    /// Time at which the walker reaches the destination.
    pub arrival: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimStats {
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub freq_board: f64,
    pub freq_missed_early: f64,
    pub freq_no_bus: f64,
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub count: u64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenewalStats {
    pub trials: u64,
    /// Trials in which bus 1 overtook the walker before stop 2.
    pub overtaken: u64,
    pub freq_overtaken: f64,
    /// Extra wait at stop 2 for bus 2, over overtaken trials only. `None`
    /// when no trial was overtaken.
    pub extra_wait: Option<Estimate>,
    /// `freq_overtaken` times the conditional mean (0 when never overtaken).
    pub weighted_mean: f64,
}

/// Running moments, merged with Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        Moments { n, mean, m2 }
    }

    fn estimate(&self) -> Option<Estimate> {
        if self.n == 0 {
            return None;
        }
        let stderr = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        };
        Some(Estimate { count: self.n, mean: self.mean, stderr })
    }
}

/// Plays one journey given the bus's arrival time at stop 1.
///
/// A bus reaching stop 2 at exactly the walker's arrival instant is boarded.
pub fn simulate_trial(s: &Scenario, strategy: StrategyKind, bus_t1: f64) -> TrialOutcome {
    let tw = s.tw();
    let walk_all = s.d() / s.vw();
    let (event, arrival) = match strategy {
        StrategyKind::WalkThenWait => {
            let at_stop2 = s.d2() / s.vw();
            let bus_at_stop2 = bus_t1 + s.d2() / s.vb();
            let walk_rest = (s.d() - s.d2()) / s.vw();
            if bus_at_stop2 < at_stop2 {
                (TrialEvent::MissedEarly, at_stop2 + tw + walk_rest)
            } else if bus_at_stop2 <= at_stop2 + tw {
                (TrialEvent::Boarded, bus_at_stop2 + (s.d() - s.d2()) / s.vb())
            } else {
                (TrialEvent::NoBusInWindow, at_stop2 + tw + walk_rest)
            }
        }
        StrategyKind::WaitAtStop1 => {
            if bus_t1 <= tw {
                (TrialEvent::Boarded, bus_t1 + s.d() / s.vb())
            } else {
                (TrialEvent::NoBusInWindow, tw + walk_all)
            }
        }
        StrategyKind::WalkAll => (TrialEvent::NoBusInWindow, walk_all),
    };
    TrialOutcome { strategy, bus_t1, event, arrival }
}

fn chunk_count(trials: u64) -> u64 {
    trials.div_ceil(CHUNK_TRIALS)
}

fn chunk_len(trials: u64, index: u64) -> u64 {
    (trials - index * CHUNK_TRIALS).min(CHUNK_TRIALS)
}

fn chunk_outcomes(
    s: &Scenario,
    strategy: StrategyKind,
    dist: &ArrivalDistribution,
    trials: u64,
    seed: u64,
    index: u64,
) -> impl Iterator<Item = TrialOutcome> {
    let mut rng = SeededRng::for_chunk(seed, index);
    let (s, dist) = (*s, *dist);
    (0..chunk_len(trials, index)).map(move |_| simulate_trial(&s, strategy, dist.sample(&mut rng)))
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    moments: Moments,
    board: u64,
    missed: u64,
    no_bus: u64,
}

impl Tally {
    fn push(&mut self, o: &TrialOutcome) {
        self.moments.push(o.arrival);
        match o.event {
            TrialEvent::Boarded => self.board += 1,
            TrialEvent::MissedEarly => self.missed += 1,
            TrialEvent::NoBusInWindow => self.no_bus += 1,
        }
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            moments: self.moments.merge(other.moments),
            board: self.board + other.board,
            missed: self.missed + other.missed,
            no_bus: self.no_bus + other.no_bus,
        }
    }

    fn stats(&self) -> SimStats {
        let est = self.moments.estimate().unwrap_or(Estimate { count: 0, mean: f64::NAN, stderr: f64::NAN });
        let n = est.count.max(1) as f64;
        SimStats {
            trials: est.count,
            mean: est.mean,
            stderr: est.stderr,
            freq_board: self.board as f64 / n,
            freq_missed_early: self.missed as f64 / n,
            freq_no_bus: self.no_bus as f64 / n,
        }
    }
}

/// Monte Carlo estimate of a strategy's expected arrival time, with chunks
/// spread over the rayon pool.
pub fn run_mc(s: &Scenario, strategy: StrategyKind, dist: &ArrivalDistribution, trials: u64, seed: u64) -> SimStats {
    let tallies: Vec<Tally> = (0..chunk_count(trials))
        .into_par_iter()
        .map(|i| {
            let mut t = Tally::default();
            chunk_outcomes(s, strategy, dist, trials, seed, i).for_each(|o| t.push(&o));
            t
        })
        .collect();
    tallies.into_iter().fold(Tally::default(), Tally::merge).stats()
}

/// Same as [`run_mc`] on the calling thread only.
pub fn run_mc_sequential(
    s: &Scenario,
    strategy: StrategyKind,
    dist: &ArrivalDistribution,
    trials: u64,
    seed: u64,
) -> SimStats {
    (0..chunk_count(trials))
        .map(|i| {
            let mut t = Tally::default();
            chunk_outcomes(s, strategy, dist, trials, seed, i).for_each(|o| t.push(&o));
            t
        })
        .fold(Tally::default(), Tally::merge)
        .stats()
}

/// Every trial outcome of a run, in trial order.
pub fn outcomes(
    s: &Scenario,
    strategy: StrategyKind,
    dist: &ArrivalDistribution,
    trials: u64,
    seed: u64,
) -> impl Iterator<Item = TrialOutcome> {
    let (s, dist) = (*s, *dist);
    (0..chunk_count(trials)).flat_map(move |i| {
        let mut rng = SeededRng::for_chunk(seed, i);
        (0..chunk_len(trials, i)).map(move |_| simulate_trial(&s, strategy, dist.sample(&mut rng)))
    })
}

/// Outcomes of a run collected in parallel, in trial order.
pub fn outcomes_parallel(
    s: &Scenario,
    strategy: StrategyKind,
    dist: &ArrivalDistribution,
    trials: u64,
    seed: u64,
) -> Vec<TrialOutcome> {
    (0..chunk_count(trials))
        .into_par_iter()
        .flat_map_iter(|i| chunk_outcomes(s, strategy, dist, trials, seed, i).collect::<Vec<_>>())
        .collect()
}

/// Two-bus renewal picture: bus 1 arrives at stop 1 uniformly in `[0, tb]`,
/// bus 2 uniformly in `[tb, 2 tb]`. When bus 1 overtakes the walker strictly
/// before stop 2, records the wait at stop 2 until bus 2 gets there.
pub fn run_renewal(s: &Scenario, tb: f64, trials: u64, seed: u64) -> Result<RenewalStats, EngineError> {
    let reach_stop2 = s.walk_to_stop2();
    if !(tb > 0.0) || !(reach_stop2 < tb) {
        return Err(EngineError::AssumptionViolated { walk_time: reach_stop2, headway: tb });
    }
    let (vw, vb, d2) = (s.vw(), s.vb(), s.d2());
    let chunks: Vec<Moments> = (0..chunk_count(trials))
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::for_chunk(seed, i);
            let mut m = Moments::default();
            for _ in 0..chunk_len(trials, i) {
                let bus1 = tb * rng.next_unit();
                let bus2 = tb + tb * rng.next_unit();
                // bus position vb (t - bus1) meets walker position vw t
                let overtake = bus1 * vb / (vb - vw);
                if overtake < reach_stop2 {
                    m.push(bus2 + d2 / vb - reach_stop2);
                }
            }
            m
        })
        .collect();
    let merged = chunks.into_iter().fold(Moments::default(), Moments::merge);
    let freq = merged.n as f64 / trials.max(1) as f64;
    let extra_wait = merged.estimate();
    Ok(RenewalStats {
        trials,
        overtaken: merged.n,
        freq_overtaken: freq,
        extra_wait,
        weighted_mean: extra_wait.map_or(0.0, |e| e.mean * freq),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1() -> Scenario {
        Scenario::new(2.0, 0.5, 4.0, 20.0, 0.1).unwrap()
    }

    fn u() -> ArrivalDistribution {
        ArrivalDistribution::uniform(0.0, 0.25).unwrap()
    }

    #[test]
    fn trial_examples() {
        let o = simulate_trial(&s1(), StrategyKind::WalkThenWait, 0.15);
        assert_eq!(o.event, TrialEvent::Boarded);
        assert!((o.arrival - 0.25).abs() < 1e-15);

        let o = simulate_trial(&s1(), StrategyKind::WalkThenWait, 0.05);
        assert_eq!(o.event, TrialEvent::MissedEarly);
        assert!((o.arrival - 0.6).abs() < 1e-15);

        let o = simulate_trial(&s1(), StrategyKind::WaitAtStop1, 0.3);
        assert_eq!(o.event, TrialEvent::NoBusInWindow);
        assert!((o.arrival - 0.6).abs() < 1e-15);

        let o = simulate_trial(&s1(), StrategyKind::WalkThenWait, 0.22);
        assert_eq!(o.event, TrialEvent::NoBusInWindow);
    }

    #[test]
    fn window_is_closed() {
        // d2/vb = 0.025 and d2/vw = 0.125 are exact in binary.
        let s = Scenario::new(2.0, 0.5, 4.0, 20.0, 0.125).unwrap();
        assert_eq!(simulate_trial(&s, StrategyKind::WalkThenWait, 0.1).event, TrialEvent::Boarded);
        assert_eq!(simulate_trial(&s, StrategyKind::WalkThenWait, 0.225).event, TrialEvent::Boarded);
        assert_eq!(simulate_trial(&s, StrategyKind::WaitAtStop1, 0.125).event, TrialEvent::Boarded);
    }

    #[test]
    fn walk_all_is_deterministic() {
        let st = run_mc(&s1(), StrategyKind::WalkAll, &u(), 10_000, 1);
        assert_eq!(st.mean, 0.5);
        assert_eq!(st.stderr, 0.0);
        assert_eq!(st.freq_no_bus, 1.0);
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let st = run_mc(&s1(), StrategyKind::WalkThenWait, &u(), 1, 1);
        assert_eq!(st.trials, 1);
        assert_eq!(st.stderr, 0.0);
    }

    #[test]
    fn stats_match_direct_computation() {
        let n = 20_000;
        let xs: Vec<f64> = outcomes(&s1(), StrategyKind::WalkThenWait, &u(), n, 8).map(|o| o.arrival).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let st = run_mc(&s1(), StrategyKind::WalkThenWait, &u(), n, 8);
        assert!((st.mean - mean).abs() < 1e-12);
        assert!((st.stderr - (var / n as f64).sqrt()).abs() < 1e-12);
        let fsum = st.freq_board + st.freq_missed_early + st.freq_no_bus;
        assert!((fsum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let a = run_mc(&s1(), StrategyKind::WalkThenWait, &u(), 50_000, 42);
        let b = run_mc(&s1(), StrategyKind::WalkThenWait, &u(), 50_000, 42);
        let c = run_mc_sequential(&s1(), StrategyKind::WalkThenWait, &u(), 50_000, 42);
        assert_eq!(a, b);
        assert_eq!(a, c);
        let d = run_mc(&s1(), StrategyKind::WalkThenWait, &u(), 50_000, 43);
        assert_ne!(a.mean, d.mean);
    }

    #[test]
    fn renewal_without_detour_is_empty() {
        let origin = s1().with_d2(0.0).unwrap();
        let r = run_renewal(&origin, 0.25, 10_000, 1).unwrap();
        assert_eq!(r.overtaken, 0);
        assert_eq!(r.freq_overtaken, 0.0);
        assert!(r.extra_wait.is_none());
    }

    #[test]
    fn renewal_gate_and_determinism() {
        let far = s1().with_d2(1.2).unwrap();
        assert!(matches!(run_renewal(&far, 0.25, 10, 1), Err(EngineError::AssumptionViolated { .. })));
        let a = run_renewal(&s1(), 0.25, 100_000, 9).unwrap();
        let b = run_renewal(&s1(), 0.25, 100_000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn renewal_matches_its_own_kinematics() {
        // Overtaken iff bus1 < d2/vw - d2/vb = 0.1 (probability 0.4); bus 2
        // then reaches stop 2 at bus2 + 0.025, mean 0.375 + 0.025, so the
        // conditional extra wait averages 0.4 - 0.125 = 0.275.
        let r = run_renewal(&s1(), 0.25, 400_000, 3).unwrap();
        let p = 0.4;
        assert!((r.freq_overtaken - p).abs() <= 4.0 * (p * (1.0 - p) / 400_000.0f64).sqrt());
        let e = r.extra_wait.unwrap();
        assert!((e.mean - 0.275).abs() <= 4.0 * e.stderr, "{e:?}");
    }
}
