//! Stochastic parallel machine scheduling with precedence relations.
//!
//! A baseline schedule fixes each job's machine and planned start. Under the
//! execution policy a job starts as soon as possible but never before its
//! planned start. The robustness objective mixes the probability of meeting
//! the deadline with the expected fraction of jobs starting on time.

mod instance;
mod moves;
mod schedule;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use instance::{
    generate_instance, instance_name, parse_instance_name, GeneratorInfo, Job, SpmspInstance, DEFAULT_SIGMA_FACTOR,
    GENERATOR_NAME, GENERATOR_VERSION, INSTANCE_FORMAT,
};
pub use moves::{Move, SpmspMoves, DEFAULT_BUFFER_STEP, MAX_RETRIES};
pub use schedule::{PlannedJob, RobustnessSample, ScheduleFile, SpmspSchedule, SCHEDULE_FORMAT};

use crate::crn::{streams, Direction, ScenarioId, StochasticProblem};

pub const DEFAULT_FINAL_SIMS: usize = 10_000;
pub const DEFAULT_WEIGHT_SIMS: usize = 50;
/// Bounds on the adaptive deadline weight.
pub const WEIGHT_BOUNDS: (f64, f64) = (0.2, 0.8);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpmspError {
    #[error("invalid: {0}")]
    Invalid(String),
    #[error("schedule does not match instance: {0}")]
    Mismatch(String),
    #[error("infeasible schedule: {0}")]
    Infeasible(String),
    #[error("io: {0}")]
    Io(String),
}

/// Deadline weight from current estimates of both parts. The lagging part
/// gets the larger weight.
pub fn adaptive_weight(deadline_prob: f64, on_time: f64) -> f64 {
    let total = deadline_prob + on_time;
    if total <= 0.0 {
        return 0.5;
    }
    (on_time / total).clamp(WEIGHT_BOUNDS.0, WEIGHT_BOUNDS.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalEvaluation {
    pub deadline_prob: f64,
    pub on_time_expectation: f64,
    pub robustness: f64,
}

/// Scores `schedule` on `sims` fresh scenarios of `seed`; robustness is the
/// mean of both parts.
pub fn final_evaluate(instance: &SpmspInstance, schedule: &SpmspSchedule, sims: usize, seed: u64) -> FinalEvaluation {
    let sims = sims.max(1);
    let (mut met, mut on_time) = (0usize, 0.0);
    for k in 0..sims as u64 {
        let s = schedule.simulate(instance, ScenarioId::new(seed, streams::FINAL_ITERATION, k));
        met += s.deadline_met as usize;
        on_time += s.on_time_fraction;
    }
    let deadline_prob = met as f64 / sims as f64;
    let on_time_expectation = on_time / sims as f64;
    FinalEvaluation { deadline_prob, on_time_expectation, robustness: 0.5 * (deadline_prob + on_time_expectation) }
}

/// Search problem with the adaptively weighted robustness objective.
///
/// Whenever the current schedule changes, `weight_sims` extra simulations on
/// the adapt stream estimate both parts and reset the weight. Those
/// simulations are not charged to the budget policy. Audits and final
/// scores use the fixed weight 1/2.
#[derive(Debug, Clone)]
pub struct SpmspProblem {
    instance: Arc<SpmspInstance>,
    weight: f64,
    weight_sims: usize,
}

impl SpmspProblem {
    pub fn new(instance: Arc<SpmspInstance>) -> Self {
        Self { instance, weight: 0.5, weight_sims: DEFAULT_WEIGHT_SIMS }
    }

    /// `0` disables adaptation and keeps the weight at 1/2.
    pub fn with_weight_sims(mut self, sims: usize) -> Self {
        self.weight_sims = sims;
        self
    }

    pub fn instance(&self) -> &Arc<SpmspInstance> {
        &self.instance
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl StochasticProblem for SpmspProblem {
    type Solution = SpmspSchedule;

    fn direction(&self) -> Direction {
        Direction::Maximize
    }

    fn sample_cost(&self, s: &SpmspSchedule, scenario: ScenarioId) -> f64 {
        s.simulate(&self.instance, scenario).objective(self.weight)
    }

    fn report_cost(&self, s: &SpmspSchedule, scenario: ScenarioId) -> f64 {
        s.simulate(&self.instance, scenario).objective(0.5)
    }

    fn adapt(&mut self, current: &SpmspSchedule, master_seed: u64, iteration: u64) {
        if self.weight_sims == 0 {
            return;
        }
        let (mut met, mut on_time) = (0usize, 0.0);
        for k in 0..self.weight_sims as u64 {
            let s = current.simulate(&self.instance, ScenarioId::new(master_seed, iteration, streams::ADAPT + k));
            met += s.deadline_met as usize;
            on_time += s.on_time_fraction;
        }
        let n = self.weight_sims as f64;
        self.weight = adaptive_weight(met as f64 / n, on_time / n);
    }
}
