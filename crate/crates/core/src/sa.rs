//! Simulated annealing driven by simulation-estimated costs.
//!
//! Each iteration proposes a neighbour, draws `u ∈ (0, 1]` and the allowed
//! difference `D = T ln u`, and asks the budget policy to compare the current
//! solution with the neighbour. The neighbour is accepted when its estimate
//! plus `D` is no worse than the current estimate. After an acceptance a
//! second comparison, on fresh scenarios and with `D = 0`, decides whether
//! the best solution is replaced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crn::{streams, Direction, ScenarioId, StochasticProblem};
use crate::policy::{compare, PolicyConfig, PolicyError, ScenarioStream, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaParams {
    pub t_init: f64,
    pub alpha_cool: f64,
    /// Iterations per cooling step.
    pub q: u64,
    pub t_stop: f64,
    /// Optional hard limit on the number of iterations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<u64>,
}

impl SaParams {
    pub fn new(t_init: f64, alpha_cool: f64, q: u64, t_stop: f64) -> Self {
        Self {
            t_init,
            alpha_cool,
            q,
            t_stop,
            max_iterations: None,
        }
    }

    pub fn spmsp_default() -> Self {
        Self::new(0.05, 0.97, 2000, 0.0005)
    }

    pub fn toymin_default() -> Self {
        Self::new(10.0, 0.95, 500, 0.01)
    }

    pub fn validate(&self) -> Result<(), SaError> {
        if !(self.t_stop > 0.0 && self.t_init > self.t_stop) {
            return Err(SaError::InvalidParams("need t_init > t_stop > 0"));
        }
        if !(self.alpha_cool > 0.0 && self.alpha_cool < 1.0) {
            return Err(SaError::InvalidParams("alpha_cool must lie in (0, 1)"));
        }
        if self.q == 0 {
            return Err(SaError::InvalidParams("q must be at least 1"));
        }
        Ok(())
    }

    /// `t_init · alpha_cool^⌊iteration / q⌋`.
    pub fn temperature(&self, iteration: u64) -> f64 {
        let steps = (iteration / self.q).min(i32::MAX as u64) as i32;
        self.t_init * self.alpha_cool.powi(steps)
    }

    /// The search stops at the first iteration whose temperature has
    /// reached `t_stop`.
    pub fn is_frozen(&self, temperature: f64) -> bool {
        temperature <= self.t_stop
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SaError {
    #[error("invalid annealing parameters: {0}")]
    InvalidParams(&'static str),
    #[error("audit_sims must be at least 1")]
    NoAudit,
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// Generates neighbouring solutions. `None` means no feasible neighbour was
/// found; the engine then keeps the current solution for that iteration.
pub trait Neighborhood<S> {
    fn propose<R: Rng + ?Sized>(&self, solution: &S, rng: &mut R) -> Option<S>;
}

/// Allowed difference `T ln u` (always `<= 0`).
pub fn allowed_difference(temperature: f64, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u <= 1.0);
    temperature * u.ln()
}

/// Acceptance rule on estimated costs.
pub fn accept(mean_current: f64, mean_neighbor: f64, allowed_difference: f64, direction: Direction) -> bool {
    match direction {
        Direction::Minimize => mean_neighbor + allowed_difference <= mean_current,
        Direction::Maximize => mean_neighbor - allowed_difference >= mean_current,
    }
}

/// Uniform draw on `(0, 1]`.
pub fn draw_u<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Generator for neighbour proposals and `u` draws of one run.
pub fn search_rng(master_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(0x5A);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    pub temperature: f64,
    pub allowed_difference: f64,
    /// Simulations of both policy invocations in this iteration.
    pub sims_used: usize,
    pub neighbor_sims: usize,
    pub best_sims: usize,
    pub mean_current: f64,
    pub mean_neighbor: f64,
    pub verdict: Verdict,
    pub accepted: bool,
    pub best_updated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestUpdate {
    pub iteration: u64,
    pub audited_score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub best_updates: Vec<BestUpdate>,
    /// Iterations whose neighbourhood gave up after its retry limit.
    pub failed_proposals: u64,
}

impl RunTrace {
    pub fn total_sims(&self) -> u64 {
        self.records.iter().map(|r| r.sims_used as u64).sum()
    }

    pub fn iterations(&self) -> u64 {
        self.records.len() as u64
    }
}

/// Annealing configuration bound to one budget policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Annealer {
    policy: PolicyConfig,
    params: SaParams,
    audit_sims: usize,
}

impl Annealer {
    pub fn new(policy: PolicyConfig, params: SaParams, audit_sims: usize) -> Result<Self, SaError> {
        policy.validate()?;
        params.validate()?;
        if audit_sims == 0 {
            return Err(SaError::NoAudit);
        }
        Ok(Self {
            policy,
            params,
            audit_sims,
        })
    }

    pub fn policy(&self) -> &PolicyConfig {
        &self.policy
    }

    pub fn params(&self) -> &SaParams {
        &self.params
    }

    fn audit<P: StochasticProblem>(&self, problem: &P, solution: &P::Solution, master_seed: u64, iteration: u64) -> f64 {
        let total: f64 = (0..self.audit_sims as u64)
            .map(|k| problem.report_cost(solution, ScenarioId::new(master_seed, iteration, streams::AUDIT + k)))
            .sum();
        total / self.audit_sims as f64
    }

    pub fn run<P, N>(
        &self,
        problem: &mut P,
        neighborhood: &N,
        initial: P::Solution,
        master_seed: u64,
    ) -> Result<(P::Solution, RunTrace), SaError>
    where
        P: StochasticProblem,
        N: Neighborhood<P::Solution>,
    {
        let direction = problem.direction();
        let mut rng = search_rng(master_seed);
        let mut trace = RunTrace::default();
        let mut current = initial;
        let mut best = current.clone();
        problem.adapt(&current, master_seed, 0);

        let mut iteration = 0u64;
        loop {
            if self.params.max_iterations.is_some_and(|cap| iteration >= cap) {
                break;
            }
            let temperature = self.params.temperature(iteration);
            if self.params.is_frozen(temperature) {
                break;
            }
            let neighbor = match neighborhood.propose(&current, &mut rng) {
                Some(n) => n,
                None => {
                    trace.failed_proposals += 1;
                    current.clone()
                }
            };
            let u = draw_u(&mut rng);
            let d = allowed_difference(temperature, u);

            let stream = ScenarioStream::new(master_seed, iteration, streams::NEIGHBOR);
            let cmp = compare(problem, &current, &neighbor, d, &self.policy, stream)?;
            let mean_current = cmp.stats_current.mean();
            let mean_neighbor = cmp.stats_neighbor.mean();
            let accepted = match cmp.verdict {
                Verdict::DirectAccept => true,
                Verdict::ByMeans => accept(mean_current, mean_neighbor, d, direction),
            };

            let mut best_sims = 0;
            let mut best_updated = false;
            if accepted {
                current = neighbor;
                problem.adapt(&current, master_seed, iteration);
                let stream = ScenarioStream::new(master_seed, iteration, streams::BEST);
                let check = compare(problem, &current, &best, 0.0, &self.policy, stream)?;
                best_sims = check.sims_total;
                if direction.at_least_as_good(check.stats_current.mean(), check.stats_neighbor.mean()) {
                    best = current.clone();
                    best_updated = true;
                    trace.best_updates.push(BestUpdate {
                        iteration,
                        audited_score: self.audit(problem, &best, master_seed, iteration),
                    });
                }
            }

            trace.records.push(IterationRecord {
                iteration,
                temperature,
                allowed_difference: d,
                sims_used: cmp.sims_total + best_sims,
                neighbor_sims: cmp.sims_total,
                best_sims,
                mean_current,
                mean_neighbor,
                verdict: cmp.verdict,
                accepted,
                best_updated,
            });
            iteration += 1;
        }
        Ok((best, trace))
    }
}

/// One annealing run from `initial`.
pub fn run<P, N>(
    problem: &mut P,
    neighborhood: &N,
    initial: P::Solution,
    policy: &PolicyConfig,
    params: &SaParams,
    master_seed: u64,
    audit_sims: usize,
) -> Result<(P::Solution, RunTrace), SaError>
where
    P: StochasticProblem,
    N: Neighborhood<P::Solution>,
{
    Annealer::new(policy.clone(), *params, audit_sims)?.run(problem, neighborhood, initial, master_seed)
}
