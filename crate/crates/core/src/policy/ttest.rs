//! Paired t-test policies.
//!
//! The tested quantity is the per-scenario improvement of the neighbour over
//! the current solution (`cost_s - cost_n` when minimizing, `cost_n - cost_s`
//! when maximizing). The acceptance rule accepts exactly when its mean is at
//! least the allowed difference `D`.

use super::{ComparisonOutcome, PolicyConfig, Sampler, ScenarioStream, Variant, Verdict};
use crate::crn::StochasticProblem;
use crate::stats::{student_t_cdf, SampleStats};

fn dof(diff: &SampleStats) -> u32 {
    u32::try_from(diff.count().saturating_sub(1)).unwrap_or(u32::MAX)
}

/// Two-sided p-value for `H0: mean = shift`.
///
/// With zero sample variance the statistic is ±∞ (p = 0), unless the mean
/// equals the shift exactly, in which case the test is undecided (p = 1).
pub fn two_sided_p_value(diff: &SampleStats, shift: f64) -> f64 {
    let mean = diff.mean();
    let var = diff.variance().unwrap_or(0.0);
    if var == 0.0 {
        return if mean == shift { 1.0 } else { 0.0 };
    }
    let t = (mean - shift) / (var / diff.count() as f64).sqrt();
    2.0 * student_t_cdf(-t.abs(), dof(diff))
}

/// One-sided p-value for `H1: mean > shift`. Zero variance follows the
/// limits of `F(-t)`: 0 above the shift, 1 at or below it.
pub fn one_sided_p_value(diff: &SampleStats, shift: f64) -> f64 {
    let mean = diff.mean();
    let var = diff.variance().unwrap_or(0.0);
    if var == 0.0 {
        return if mean > shift { 0.0 } else { 1.0 };
    }
    let t = (mean - shift) / (var / diff.count() as f64).sqrt();
    student_t_cdf(-t, dof(diff))
}

pub fn compare_ttest<P: StochasticProblem>(
    problem: &P,
    current: &P::Solution,
    neighbor: &P::Solution,
    allowed_difference: f64,
    cfg: &PolicyConfig,
    stream: ScenarioStream,
) -> ComparisonOutcome {
    let alpha = cfg.alpha();
    let per_solution_cap = cfg.n_max / 2;
    let mut sampler = Sampler::new(problem, current, neighbor, stream);
    sampler.paired(cfg.n0);
    let mut rounds = 0;
    loop {
        let n = sampler.diff.count() as usize;
        let at_cap = 2 * n >= cfg.n_max;
        let shift = match cfg.variant {
            Variant::TTestD => allowed_difference,
            _ => 0.0,
        };
        if two_sided_p_value(&sampler.diff, shift) < alpha || at_cap {
            return sampler.finish(Verdict::ByMeans, rounds);
        }
        if cfg.variant == Variant::DoubleTTest && one_sided_p_value(&sampler.diff, allowed_difference) < alpha {
            return sampler.finish(Verdict::DirectAccept, rounds);
        }
        sampler.paired(cfg.delta.min(per_solution_cap - n));
        rounds += 1;
    }
}
