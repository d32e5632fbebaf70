//! Fully sequential indifference-zone comparison for two solutions.
//!
//! Both solutions are always simulated together so that common random
//! numbers stay in effect. Each round adds `delta` simulations per solution
//! and the procedure also stops once another round would exceed `n_max`.

use super::{ComparisonOutcome, PolicyConfig, PolicyError, Sampler, ScenarioStream, Verdict};
use crate::crn::{Direction, StochasticProblem};
use crate::stats::yoon_h1;

/// Required sample size `⌈(h₁ s / δ)²⌉`.
fn required(h1: f64, sd: f64, width: f64) -> f64 {
    ((h1 * sd / width).powi(2)).ceil()
}

pub fn compare_iz<P: StochasticProblem>(
    problem: &P,
    current: &P::Solution,
    neighbor: &P::Solution,
    allowed_difference: f64,
    cfg: &PolicyConfig,
    use_allowed_difference: bool,
    stream: ScenarioStream,
) -> Result<ComparisonOutcome, PolicyError> {
    let direction = problem.direction();
    let alpha = cfg.alpha();
    let zone = cfg
        .delta_star
        .unwrap_or_else(|| super::default_delta_star(direction));
    // The neighbour is treated as |D| better than its estimate.
    let shift = if use_allowed_difference {
        match direction {
            Direction::Minimize => allowed_difference,
            Direction::Maximize => -allowed_difference,
        }
    } else {
        0.0
    };

    let mut sampler = Sampler::new(problem, current, neighbor, stream);
    sampler.paired(cfg.n0);
    let mut rounds = 0;
    loop {
        let n = sampler.stats_a.count();
        let mean_cur = sampler.stats_a.mean();
        let mean_nb = sampler.stats_b.mean() + shift;
        let sd_cur = sampler.stats_a.std_dev().unwrap_or(0.0);
        let sd_nb = sampler.stats_b.std_dev().unwrap_or(0.0);
        // b = the observed best; ties go to the current solution.
        let (sd_best, sd_other, gap) = if direction.at_least_as_good(mean_cur, mean_nb) {
            (sd_cur, sd_nb, direction.improvement(mean_nb, mean_cur))
        } else {
            (sd_nb, sd_cur, direction.improvement(mean_cur, mean_nb))
        };
        let width = zone.max(gap);
        let n32 = u32::try_from(n).expect("per-solution sample count fits in u32");
        let h1 = yoon_h1(n32, n32, alpha, &cfg.integrals)?;
        let nf = n as f64;
        if nf >= required(h1, sd_other, width) && nf >= required(h1, sd_best, width) {
            break;
        }
        if sampler.total() + 2 * cfg.delta > cfg.n_max {
            break;
        }
        sampler.paired(cfg.delta);
        rounds += 1;
    }
    Ok(sampler.finish(Verdict::ByMeans, rounds))
}
