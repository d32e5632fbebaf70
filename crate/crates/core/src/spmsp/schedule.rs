use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{SpmspError, SpmspInstance};
use crate::crn::ScenarioId;

pub const SCHEDULE_FORMAT: &str = "stochsa-spmsp-schedule";

/// Baseline schedule: per-machine job sequences plus a buffer after each job.
///
/// Planned starts follow from a forward pass: a job is planned at its release
/// date or, if later, when every predecessor (precedence and machine) has
/// finished its mean processing time plus its buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct SpmspSchedule {
    sequences: Vec<Vec<usize>>,
    buffers: Vec<f64>,
    planned: Vec<f64>,
    machine_of: Vec<usize>,
    machine_prev: Vec<Option<usize>>,
    order: Vec<usize>,
}

/// One scenario's outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessSample {
    pub deadline_met: bool,
    pub on_time_fraction: f64,
}

impl RobustnessSample {
    /// `w · deadline_met + (1 − w) · on_time_fraction`.
    pub fn objective(&self, weight: f64) -> f64 {
        let dl = if self.deadline_met { 1.0 } else { 0.0 };
        weight * dl + (1.0 - weight) * self.on_time_fraction
    }
}

impl SpmspSchedule {
    pub fn from_sequences(
        instance: &SpmspInstance,
        sequences: Vec<Vec<usize>>,
        buffers: Vec<f64>,
    ) -> Result<Self, SpmspError> {
        let mut s = Self::structure(instance, sequences, buffers)?;
        let mut planned = vec![0.0; instance.len()];
        for &k in &s.order {
            let mut start = instance.jobs()[k].release;
            for &p in instance.predecessors(k).iter().chain(s.machine_prev[k].as_ref()) {
                start = start.max(planned[p] + instance.jobs()[p].mean + s.buffers[p]);
            }
            planned[k] = start;
        }
        s.planned = planned;
        Ok(s)
    }

    /// Validates sequences and buffers and derives the job graph; planned
    /// starts are left for the caller.
    fn structure(instance: &SpmspInstance, sequences: Vec<Vec<usize>>, buffers: Vec<f64>) -> Result<Self, SpmspError> {
        let n = instance.len();
        if sequences.len() != instance.machines() {
            return Err(SpmspError::Mismatch(format!(
                "schedule has {} machines, instance has {}",
                sequences.len(),
                instance.machines()
            )));
        }
        if buffers.len() != n {
            return Err(SpmspError::Mismatch(format!("{} buffers for {n} jobs", buffers.len())));
        }
        if let Some(j) = buffers.iter().position(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(SpmspError::Invalid(format!("job {j}: buffer must be finite and non-negative")));
        }
        let mut machine_of = vec![usize::MAX; n];
        let mut machine_prev = vec![None; n];
        let mut chain = Vec::with_capacity(n);
        for (m, seq) in sequences.iter().enumerate() {
            for (pos, &j) in seq.iter().enumerate() {
                if j >= n || machine_of[j] != usize::MAX {
                    return Err(SpmspError::Mismatch(format!("job {j} is out of range or scheduled twice")));
                }
                machine_of[j] = m;
                if pos > 0 {
                    machine_prev[j] = Some(seq[pos - 1]);
                    chain.push((seq[pos - 1], j));
                }
            }
        }
        if let Some(j) = machine_of.iter().position(|&m| m == usize::MAX) {
            return Err(SpmspError::Mismatch(format!("job {j} is not scheduled")));
        }
        let order = instance
            .topological_order(&chain)
            .ok_or_else(|| SpmspError::Infeasible("machine order conflicts with precedence".into()))?;
        Ok(Self { sequences, buffers, planned: Vec::new(), machine_of, machine_prev, order })
    }

    /// Greedy list schedule without buffers: repeatedly places the ready job
    /// and machine pair with the earliest completion on mean durations.
    pub fn greedy(instance: &SpmspInstance) -> Self {
        let n = instance.len();
        let mut finish = vec![0.0f64; n];
        let mut machine_free = vec![0.0f64; instance.machines()];
        let mut sequences = vec![Vec::new(); instance.machines()];
        let mut remaining: Vec<usize> = (0..n).map(|j| instance.predecessors(j).len()).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&j| remaining[j] == 0).collect();
        for _ in 0..n {
            let mut pick: Option<(f64, usize, usize)> = None;
            for &j in &ready {
                let earliest = instance.predecessors(j).iter().map(|&p| finish[p]).fold(instance.jobs()[j].release, f64::max);
                for (m, &free) in machine_free.iter().enumerate() {
                    let end = earliest.max(free) + instance.jobs()[j].mean;
                    if pick.is_none_or(|(best, bj, bm)| end < best || (end == best && (j, m) < (bj, bm))) {
                        pick = Some((end, j, m));
                    }
                }
            }
            let (end, j, m) = pick.expect("acyclic instance always has a ready job");
            finish[j] = end;
            machine_free[m] = end;
            sequences[m].push(j);
            ready.retain(|&r| r != j);
            for &s in instance.successors(j) {
                remaining[s] -= 1;
                if remaining[s] == 0 {
                    ready.push(s);
                }
            }
        }
        Self::from_sequences(instance, sequences, vec![0.0; n]).expect("greedy order is consistent")
    }

    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.sequences
    }

    pub fn buffers(&self) -> &[f64] {
        &self.buffers
    }

    pub fn planned_starts(&self) -> &[f64] {
        &self.planned
    }

    pub fn machine_of(&self, job: usize) -> usize {
        self.machine_of[job]
    }

    pub fn machine_prev(&self, job: usize) -> Option<usize> {
        self.machine_prev[job]
    }

    /// Job following `job` on its machine.
    pub fn machine_next(&self, job: usize) -> Option<usize> {
        let seq = &self.sequences[self.machine_of[job]];
        let pos = seq.iter().position(|&j| j == job)?;
        seq.get(pos + 1).copied()
    }

    pub fn len(&self) -> usize {
        self.buffers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffers.is_empty()
    }

    /// Latest planned completion on mean durations, buffers excluded.
    pub fn expected_makespan(&self, instance: &SpmspInstance) -> f64 {
        self.planned.iter().zip(instance.jobs()).map(|(s, j)| s + j.mean).fold(0.0, f64::max)
    }

    /// Checks the baseline invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self, instance: &SpmspInstance) -> Result<(), String> {
        let jobs = instance.jobs();
        let eps = 1e-9;
        for k in 0..self.len() {
            if self.planned[k] < jobs[k].release {
                return Err(format!("job {k} planned before its release date"));
            }
            for &p in instance.predecessors(k).iter().chain(self.machine_prev[k].as_ref()) {
                if self.planned[k] + eps * (1.0 + self.planned[k].abs()) < self.planned[p] + jobs[p].mean {
                    return Err(format!("job {k} planned before job {p} can finish"));
                }
            }
        }
        let mut seen = vec![false; self.len()];
        for seq in &self.sequences {
            for &j in seq {
                if std::mem::replace(&mut seen[j], true) {
                    return Err(format!("job {j} scheduled twice"));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("a job is missing".into());
        }
        Ok(())
    }

    /// Realized processing times of one scenario, in job order.
    pub fn durations(instance: &SpmspInstance, scenario: ScenarioId) -> Vec<f64> {
        let mut rng = scenario.rng();
        (0..instance.len())
            .map(|j| {
                let z: f64 = rng.sample(StandardNormal);
                (instance.jobs()[j].mean + instance.stdev(j) * z).max(0.0)
            })
            .collect()
    }

    /// Executes the schedule on one scenario: every job starts as soon as its
    /// machine and predecessors allow, but never before its planned start.
    pub fn simulate(&self, instance: &SpmspInstance, scenario: ScenarioId) -> RobustnessSample {
        self.execute(instance, &Self::durations(instance, scenario))
    }

    pub fn execute(&self, instance: &SpmspInstance, durations: &[f64]) -> RobustnessSample {
        let n = self.len();
        let mut completion = vec![0.0; n];
        let mut on_time = 0usize;
        let mut makespan = 0.0f64;
        for &k in &self.order {
            let mut start = self.planned[k];
            for &p in instance.predecessors(k).iter().chain(self.machine_prev[k].as_ref()) {
                start = start.max(completion[p]);
            }
            debug_assert!(start >= self.planned[k]);
            if start == self.planned[k] {
                on_time += 1;
            }
            completion[k] = start + durations[k];
            makespan = makespan.max(completion[k]);
        }
        RobustnessSample { deadline_met: makespan <= instance.deadline(), on_time_fraction: on_time as f64 / n as f64 }
    }

    pub fn to_file(&self) -> ScheduleFile {
        ScheduleFile {
            format: SCHEDULE_FORMAT.to_string(),
            jobs: (0..self.len())
                .map(|j| PlannedJob { machine: self.machine_of[j], planned_start: self.planned[j], buffer: self.buffers[j] })
                .collect(),
        }
    }

    /// Rebuilds a schedule from exported per-job machines and planned
    /// starts. Planned starts are kept verbatim; they must satisfy the
    /// baseline invariants for `instance`.
    pub fn from_file(instance: &SpmspInstance, file: &ScheduleFile) -> Result<Self, SpmspError> {
        if file.format != SCHEDULE_FORMAT {
            return Err(SpmspError::Invalid(format!("unknown schedule format {:?}", file.format)));
        }
        if file.jobs.len() != instance.len() {
            return Err(SpmspError::Mismatch(format!(
                "schedule has {} jobs, instance has {}",
                file.jobs.len(),
                instance.len()
            )));
        }
        let mut sequences = vec![Vec::new(); instance.machines()];
        for (j, pj) in file.jobs.iter().enumerate() {
            if pj.machine >= instance.machines() {
                return Err(SpmspError::Mismatch(format!("job {j} on machine {} of {}", pj.machine, instance.machines())));
            }
            if !pj.planned_start.is_finite() {
                return Err(SpmspError::Invalid(format!("job {j}: planned start is not finite")));
            }
            sequences[pj.machine].push(j);
        }
        for seq in &mut sequences {
            seq.sort_by(|&a, &b| file.jobs[a].planned_start.total_cmp(&file.jobs[b].planned_start).then(a.cmp(&b)));
        }
        let buffers = file.jobs.iter().map(|pj| pj.buffer).collect();
        let mut s = Self::structure(instance, sequences, buffers)?;
        s.planned = file.jobs.iter().map(|pj| pj.planned_start).collect();
        s.check_invariants(instance).map_err(SpmspError::Infeasible)?;
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<(), SpmspError> {
        let mut text = serde_json::to_string_pretty(&self.to_file()).expect("schedule serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| SpmspError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(instance: &SpmspInstance, path: &Path) -> Result<Self, SpmspError> {
        let text = std::fs::read_to_string(path).map_err(|e| SpmspError::Io(format!("{}: {e}", path.display())))?;
        let file: ScheduleFile = serde_json::from_str(&text).map_err(|e| SpmspError::Invalid(e.to_string()))?;
        Self::from_file(instance, &file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub format: String,
    pub jobs: Vec<PlannedJob>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannedJob {
    pub machine: usize,
    pub planned_start: f64,
    #[serde(default)]
    pub buffer: f64,
}
