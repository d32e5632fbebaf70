//! Optimal computing budget allocation for two solutions.

use super::{ComparisonOutcome, PolicyConfig, Sampler, ScenarioStream, Verdict};
use crate::crn::StochasticProblem;

/// Splits `delta` extra simulations so that `N_better / N_other` moves
/// closest to `s_better / s_other`.
///
/// Returns the new totals in argument order. `better_is_first` says which
/// argument is the currently better solution; ties between candidate splits
/// resolve to the one giving the better solution more simulations.
pub fn ocba_split(n1: usize, n2: usize, s1: f64, s2: f64, delta: usize, better_is_first: bool) -> (usize, usize) {
    if s1 == 0.0 && s2 == 0.0 {
        let extra_first = delta - delta / 2;
        return (n1 + extra_first, n2 + delta / 2);
    }
    if better_is_first {
        split_towards_ratio(n1, n2, s1, s2, delta)
    } else {
        let (b, a) = split_towards_ratio(n2, n1, s2, s1, delta);
        (a, b)
    }
}

/// `i` extra simulations go to the second solution, `delta - i` to the first.
/// `|(n1 + delta - i) / (n2 + i) - s1 / s2|` is unimodal in `i`; its minimum
/// sits next to the continuous root `i* = (n1 + delta - r n2) / (1 + r)`.
fn split_towards_ratio(n1: usize, n2: usize, s1: f64, s2: f64, delta: usize) -> (usize, usize) {
    if s2 == 0.0 {
        return (n1 + delta, n2);
    }
    let ratio = s1 / s2;
    let gap = |i: usize| ((n1 + delta - i) as f64 / (n2 + i) as f64 - ratio).abs();
    let root = ((n1 + delta) as f64 - ratio * n2 as f64) / (1.0 + ratio);
    let centre = root.clamp(0.0, delta as f64).floor() as usize;
    let lo = centre.saturating_sub(1);
    let hi = (centre + 2).min(delta);
    let mut best = lo;
    for i in lo..=hi {
        if gap(i) < gap(best) {
            best = i;
        }
    }
    (n1 + delta - best, n2 + best)
}

/// OCBA comparison. Solutions are simulated on independent streams, since
/// unequal allocations rule out common random numbers.
pub fn compare_ocba<P: StochasticProblem>(
    problem: &P,
    current: &P::Solution,
    neighbor: &P::Solution,
    cfg: &PolicyConfig,
    stream: ScenarioStream,
) -> ComparisonOutcome {
    let direction = problem.direction();
    let mut sampler = Sampler::new(problem, current, neighbor, stream);
    sampler.only_a(cfg.n0);
    sampler.only_b(cfg.n0);
    let mut rounds = 0;
    while sampler.total() < cfg.n_max {
        let step = cfg.delta.min(cfg.n_max - sampler.total());
        let (na, nb) = (sampler.stats_a.count() as usize, sampler.stats_b.count() as usize);
        let better_is_first = direction.at_least_as_good(sampler.stats_a.mean(), sampler.stats_b.mean());
        let (ta, tb) = ocba_split(
            na,
            nb,
            sampler.stats_a.std_dev().unwrap_or(0.0),
            sampler.stats_b.std_dev().unwrap_or(0.0),
            step,
            better_is_first,
        );
        sampler.only_a(ta - na);
        sampler.only_b(tb - nb);
        rounds += 1;
    }
    sampler.finish(Verdict::ByMeans, rounds)
}
