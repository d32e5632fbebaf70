//! Scenario identity and common random numbers.
//!
//! A scenario is a triple `(master_seed, iteration, ordinal)`. The triple is
//! hashed into the key of a per-scenario ChaCha generator, so any scenario can
//! be regenerated in O(1) and two solutions evaluated on the same
//! [`ScenarioId`] see the same random realization.
//!
//! Problems must draw their randomness independently of solution structure
//! (e.g. one processing time per job, in job-index order). Otherwise two
//! solutions on the same scenario would not share realizations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::stats::SampleStats;

/// Ordinal offset separating the second solution's stream when CRN is off.
pub const NON_CRN_STRIDE: u64 = 1 << 32;

/// Ordinal bases partitioning one iteration's scenarios by purpose.
pub mod streams {
    /// Current vs. neighbour comparison.
    pub const NEIGHBOR: u64 = 0;
    /// Current vs. best comparison after an acceptance.
    pub const BEST: u64 = 1 << 40;
    /// Audit simulations of a new best solution.
    pub const AUDIT: u64 = 2 << 40;
    /// Simulations a problem spends adapting its objective.
    pub const ADAPT: u64 = 3 << 40;
    /// Iteration index reserved for final evaluations.
    pub const FINAL_ITERATION: u64 = u64::MAX;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// `true` when `a` is at least as good as `b`.
    pub fn at_least_as_good(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Minimize => a <= b,
            Direction::Maximize => a >= b,
        }
    }

    /// Amount by which `candidate` improves on `reference` (positive = better).
    pub fn improvement(self, reference: f64, candidate: f64) -> f64 {
        match self {
            Direction::Minimize => reference - candidate,
            Direction::Maximize => candidate - reference,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Minimize => Direction::Maximize,
            Direction::Maximize => Direction::Minimize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScenarioId {
    pub master_seed: u64,
    pub iteration: u64,
    pub ordinal: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl ScenarioId {
    pub fn new(master_seed: u64, iteration: u64, ordinal: u64) -> Self {
        Self {
            master_seed,
            iteration,
            ordinal,
        }
    }

    pub fn offset(self, by: u64) -> Self {
        Self {
            ordinal: self.ordinal + by,
            ..self
        }
    }

    pub fn key(&self) -> [u8; 32] {
        let mut state = splitmix64(self.master_seed);
        state = splitmix64(state ^ self.iteration.rotate_left(17));
        state = splitmix64(state ^ self.ordinal.rotate_left(41));
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        key
    }

    /// Fresh generator for this scenario's random realization.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }
}

/// `count` consecutive scenarios of one iteration, starting at `start_ordinal`.
pub fn scenario_batch(master_seed: u64, iteration: u64, start_ordinal: u64, count: usize) -> Vec<ScenarioId> {
    (0..count as u64)
        .map(|k| ScenarioId::new(master_seed, iteration, start_ordinal + k))
        .collect()
}

/// A simulation-based optimization problem.
pub trait StochasticProblem {
    type Solution: Clone;

    fn direction(&self) -> Direction;

    /// Cost of `solution` under one random realization. Must be a pure
    /// function of `(solution, scenario)` and the problem state.
    fn sample_cost(&self, solution: &Self::Solution, scenario: ScenarioId) -> f64;

    /// Exact expected cost, for problems where it is computable.
    fn exact_cost(&self, _solution: &Self::Solution) -> Option<f64> {
        None
    }

    /// Score used for audits and final reporting. Defaults to the search cost.
    fn report_cost(&self, solution: &Self::Solution, scenario: ScenarioId) -> f64 {
        self.sample_cost(solution, scenario)
    }

    /// Hook called whenever the search's current solution changes. Problems
    /// with an adaptive objective update their state here; the objective is
    /// then fixed until the next call.
    fn adapt(&mut self, _current: &Self::Solution, _master_seed: u64, _iteration: u64) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedSample {
    pub scenario: ScenarioId,
    pub cost_current: f64,
    pub cost_neighbor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedEvaluation {
    pub stats_a: SampleStats,
    pub stats_b: SampleStats,
    /// Present only when CRN is enabled.
    pub pairs: Option<Vec<PairedSample>>,
}

/// Simulates `a` and `b` over `scenarios`. With CRN both use `scenarios[i]`
/// for sample `i`; without it `b` is shifted onto a disjoint stream.
pub fn evaluate_paired<P: StochasticProblem>(
    problem: &P,
    a: &P::Solution,
    b: &P::Solution,
    scenarios: &[ScenarioId],
    crn_enabled: bool,
) -> PairedEvaluation {
    let mut stats_a = SampleStats::new();
    let mut stats_b = SampleStats::new();
    let mut pairs = crn_enabled.then(|| Vec::with_capacity(scenarios.len()));
    let mut ordered = scenarios.to_vec();
    ordered.sort();
    for sc in ordered {
        let ca = problem.sample_cost(a, sc);
        let sb = if crn_enabled { sc } else { sc.offset(NON_CRN_STRIDE) };
        let cb = problem.sample_cost(b, sb);
        stats_a.push(ca);
        stats_b.push(cb);
        if let Some(p) = pairs.as_mut() {
            p.push(PairedSample {
                scenario: sc,
                cost_current: ca,
                cost_neighbor: cb,
            });
        }
    }
    PairedEvaluation { stats_a, stats_b, pairs }
}

/// A problem with negated costs and the opposite direction. Used to check
/// that policies treat both orientations identically.
#[derive(Debug, Clone)]
pub struct Mirrored<P>(pub P);

impl<P: StochasticProblem> StochasticProblem for Mirrored<P> {
    type Solution = P::Solution;

    fn direction(&self) -> Direction {
        self.0.direction().flipped()
    }

    fn sample_cost(&self, solution: &Self::Solution, scenario: ScenarioId) -> f64 {
        -self.0.sample_cost(solution, scenario)
    }

    fn exact_cost(&self, solution: &Self::Solution) -> Option<f64> {
        self.0.exact_cost(solution).map(|c| -c)
    }

    fn report_cost(&self, solution: &Self::Solution, scenario: ScenarioId) -> f64 {
        -self.0.report_cost(solution, scenario)
    }

    fn adapt(&mut self, current: &Self::Solution, master_seed: u64, iteration: u64) {
        self.0.adapt(current, master_seed, iteration);
    }
}
