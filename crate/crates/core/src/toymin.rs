//! Single-machine stochastic total-tardiness sequencing.
//!
//! Small enough to enumerate every permutation, which makes it the exact
//! reference for the minimization code path of the search.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::crn::{Direction, ScenarioId, StochasticProblem};
use crate::sa::Neighborhood;

/// Largest instance [`brute_force_optimum`] accepts.
pub const MAX_BRUTE_FORCE_JOBS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyJob {
    pub mean: f64,
    pub stdev: f64,
    pub due: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ToyError {
    #[error("job {0}: standard deviation must be non-negative")]
    NegativeStdev(usize),
    #[error("job {0}: due date must be positive")]
    NonPositiveDue(usize),
    #[error("instance has no jobs")]
    Empty,
    #[error("brute force supports at most {MAX_BRUTE_FORCE_JOBS} jobs, got {0}")]
    TooManyJobs(usize),
    #[error("not a permutation of 0..{0}")]
    BadPermutation(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ToyJob>", into = "Vec<ToyJob>")]
pub struct ToyInstance {
    jobs: Vec<ToyJob>,
}

impl TryFrom<Vec<ToyJob>> for ToyInstance {
    type Error = ToyError;

    fn try_from(jobs: Vec<ToyJob>) -> Result<Self, Self::Error> {
        ToyInstance::new(jobs)
    }
}

impl From<ToyInstance> for Vec<ToyJob> {
    fn from(inst: ToyInstance) -> Self {
        inst.jobs
    }
}

impl ToyInstance {
    pub fn new(jobs: Vec<ToyJob>) -> Result<Self, ToyError> {
        if jobs.is_empty() {
            return Err(ToyError::Empty);
        }
        for (i, j) in jobs.iter().enumerate() {
            if !(j.stdev >= 0.0) {
                return Err(ToyError::NegativeStdev(i));
            }
            if !(j.due > 0.0) {
                return Err(ToyError::NonPositiveDue(i));
            }
        }
        Ok(Self { jobs })
    }

    pub fn jobs(&self) -> &[ToyJob] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn is_deterministic(&self) -> bool {
        self.jobs.iter().all(|j| j.stdev == 0.0)
    }

    pub fn check_permutation(&self, perm: &[usize]) -> Result<(), ToyError> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() {
            return Err(ToyError::BadPermutation(self.len()));
        }
        for &j in perm {
            if j >= self.len() || std::mem::replace(&mut seen[j], true) {
                return Err(ToyError::BadPermutation(self.len()));
            }
        }
        Ok(())
    }

    /// Processing times of one scenario, clamped at zero, in job order.
    pub fn durations(&self, scenario: ScenarioId) -> Vec<f64> {
        let mut rng = scenario.rng();
        self.jobs
            .iter()
            .map(|j| {
                let z: f64 = rng.sample(StandardNormal);
                (j.mean + j.stdev * z).max(0.0)
            })
            .collect()
    }

    /// Total tardiness of `perm` for fixed processing times.
    pub fn tardiness(&self, perm: &[usize], durations: &[f64]) -> f64 {
        let mut clock = 0.0;
        let mut total = 0.0;
        for &j in perm {
            clock += durations[j];
            total += (clock - self.jobs[j].due).max(0.0);
        }
        total
    }

    fn mean_durations(&self) -> Vec<f64> {
        self.jobs.iter().map(|j| j.mean.max(0.0)).collect()
    }
}

/// Search problem wrapper; solutions are job permutations.
#[derive(Debug, Clone)]
pub struct ToyMin {
    pub instance: ToyInstance,
}

impl ToyMin {
    pub fn new(instance: ToyInstance) -> Self {
        Self { instance }
    }

    pub fn identity(&self) -> Vec<usize> {
        (0..self.instance.len()).collect()
    }
}

impl StochasticProblem for ToyMin {
    type Solution = Vec<usize>;

    fn direction(&self) -> Direction {
        Direction::Minimize
    }

    fn sample_cost(&self, perm: &Vec<usize>, scenario: ScenarioId) -> f64 {
        self.instance.tardiness(perm, &self.instance.durations(scenario))
    }

    fn exact_cost(&self, perm: &Vec<usize>) -> Option<f64> {
        self.instance
            .is_deterministic()
            .then(|| self.instance.tardiness(perm, &self.instance.mean_durations()))
    }
}

/// Adjacent transposition or random transposition, each with probability 1/2.
#[derive(Debug, Clone, Copy, Default)]
pub struct SwapNeighborhood;

impl Neighborhood<Vec<usize>> for SwapNeighborhood {
    fn propose<R: Rng + ?Sized>(&self, perm: &Vec<usize>, rng: &mut R) -> Option<Vec<usize>> {
        let n = perm.len();
        let mut next = perm.clone();
        if n < 2 {
            return Some(next);
        }
        if rng.random_bool(0.5) {
            let i = rng.random_range(0..n - 1);
            next.swap(i, i + 1);
        } else {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            next.swap(i, j);
        }
        Some(next)
    }
}

/// Lexicographic successor; `false` once `perm` is the last permutation.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
        return false;
    };
    let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).expect("pivot has a successor");
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Evaluates every permutation on one common set of `sims_per_perm`
/// scenarios and returns the cheapest (lexicographically first on ties).
pub fn brute_force_optimum(instance: &ToyInstance, sims_per_perm: usize, seed: u64) -> Result<(Vec<usize>, f64), ToyError> {
    if instance.len() > MAX_BRUTE_FORCE_JOBS {
        return Err(ToyError::TooManyJobs(instance.len()));
    }
    let scenarios: Vec<Vec<f64>> = (0..sims_per_perm.max(1) as u64)
        .map(|k| instance.durations(ScenarioId::new(seed, 0, k)))
        .collect();
    let mut perm: Vec<usize> = (0..instance.len()).collect();
    let mut best = (perm.clone(), f64::INFINITY);
    loop {
        let cost = scenarios.iter().map(|d| instance.tardiness(&perm, d)).sum::<f64>() / scenarios.len() as f64;
        if cost < best.1 {
            best = (perm.clone(), cost);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best)
}
