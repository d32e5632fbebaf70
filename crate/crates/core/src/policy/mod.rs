//! Simulation-budget policies.
//!
//! A policy compares the current solution against a neighbour and decides
//! how many simulations each receives. Except for the double t-test, which
//! can accept the neighbour outright, the decision itself is left to the
//! caller and made on the returned sample means.

mod iz;
mod ocba;
mod ttest;

use serde::{Deserialize, Serialize};

use crate::crn::{Direction, ScenarioId, StochasticProblem, NON_CRN_STRIDE};
use crate::stats::{IntegralSolverConfig, SampleStats, StatsError};

pub use iz::compare_iz;
pub use ocba::{compare_ocba, ocba_split};
pub use ttest::{compare_ttest, one_sided_p_value, two_sided_p_value};

/// Default indifference-zone width for maximization problems whose scores lie in `[0, 1]`.
pub const DEFAULT_DELTA_STAR_MAXIMIZE: f64 = 0.001;
/// Default indifference-zone width for minimization problems, in cost units.
pub const DEFAULT_DELTA_STAR_MINIMIZE: f64 = 1.0;

pub fn default_delta_star(direction: Direction) -> f64 {
    match direction {
        Direction::Maximize => DEFAULT_DELTA_STAR_MAXIMIZE,
        Direction::Minimize => DEFAULT_DELTA_STAR_MINIMIZE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Const,
    ConstNoCrn,
    Ocba,
    Iz,
    IzD,
    TTest0,
    TTestD,
    DoubleTTest,
}

impl Variant {
    pub fn uses_crn(self) -> bool {
        !matches!(self, Variant::ConstNoCrn | Variant::Ocba)
    }

    fn needs_alpha(self) -> bool {
        matches!(
            self,
            Variant::Iz | Variant::IzD | Variant::TTest0 | Variant::TTestD | Variant::DoubleTTest
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("invalid policy configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Parameters of one budget policy.
///
/// `n_max` bounds the total over both solutions, so each solution gets at
/// most `n_max / 2` simulations (OCBA may split unevenly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicyConfig", into = "RawPolicyConfig")]
pub struct PolicyConfig {
    pub variant: Variant,
    pub n0: usize,
    pub delta: usize,
    pub n_max: usize,
    pub alpha_conf: Option<f64>,
    pub delta_star: Option<f64>,
    pub integrals: IntegralSolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicyConfig {
    variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<usize>,
    n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_conf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_star: Option<f64>,
    #[serde(default)]
    integrals: IntegralSolverConfig,
}

impl TryFrom<RawPolicyConfig> for PolicyConfig {
    type Error = PolicyError;

    fn try_from(raw: RawPolicyConfig) -> Result<Self, Self::Error> {
        let cfg = PolicyConfig {
            variant: raw.variant,
            n0: raw.n0.unwrap_or(raw.n_max / 2),
            delta: raw.delta.unwrap_or(1),
            n_max: raw.n_max,
            alpha_conf: raw.alpha_conf,
            delta_star: raw.delta_star,
            integrals: raw.integrals,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<PolicyConfig> for RawPolicyConfig {
    fn from(cfg: PolicyConfig) -> Self {
        let fixed = matches!(cfg.variant, Variant::Const | Variant::ConstNoCrn);
        RawPolicyConfig {
            variant: cfg.variant,
            n0: (!fixed).then_some(cfg.n0),
            delta: (!fixed).then_some(cfg.delta),
            n_max: cfg.n_max,
            alpha_conf: cfg.alpha_conf,
            delta_star: cfg.delta_star,
            integrals: cfg.integrals,
        }
    }
}

impl PolicyConfig {
    pub fn constant(n_max: usize) -> Self {
        Self::fixed(Variant::Const, n_max)
    }

    pub fn constant_no_crn(n_max: usize) -> Self {
        Self::fixed(Variant::ConstNoCrn, n_max)
    }

    fn fixed(variant: Variant, n_max: usize) -> Self {
        Self {
            variant,
            n0: n_max / 2,
            delta: 1,
            n_max,
            alpha_conf: None,
            delta_star: None,
            integrals: IntegralSolverConfig::default(),
        }
    }

    pub fn ocba(n0: usize, delta: usize, n_max: usize) -> Self {
        Self {
            variant: Variant::Ocba,
            n0,
            delta,
            ..Self::constant(n_max)
        }
    }

    /// Indifference-zone policy; `use_allowed_difference` selects `IzD`.
    pub fn iz(n0: usize, delta: usize, n_max: usize, alpha_conf: f64, use_allowed_difference: bool) -> Self {
        Self {
            variant: if use_allowed_difference { Variant::IzD } else { Variant::Iz },
            n0,
            delta,
            alpha_conf: Some(alpha_conf),
            ..Self::constant(n_max)
        }
    }

    pub fn ttest(variant: Variant, n0: usize, delta: usize, n_max: usize, alpha_conf: f64) -> Self {
        assert!(
            matches!(variant, Variant::TTest0 | Variant::TTestD | Variant::DoubleTTest),
            "not a t-test variant: {variant:?}"
        );
        Self {
            variant,
            n0,
            delta,
            alpha_conf: Some(alpha_conf),
            ..Self::constant(n_max)
        }
    }

    pub fn with_delta_star(mut self, delta_star: f64) -> Self {
        self.delta_star = Some(delta_star);
        self
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let bad = |msg: String| Err(PolicyError::InvalidConfig(msg));
        if self.n_max < 2 || !self.n_max.is_multiple_of(2) {
            return bad(format!("n_max must be even and at least 2, got {}", self.n_max));
        }
        if 2 * self.n0 > self.n_max {
            return bad(format!("2 * n0 = {} exceeds n_max = {}", 2 * self.n0, self.n_max));
        }
        if self.delta < 1 {
            return bad("delta must be at least 1".into());
        }
        if !matches!(self.variant, Variant::Const | Variant::ConstNoCrn) && self.n0 < 2 {
            return bad(format!("{:?} needs n0 >= 2 to estimate variances", self.variant));
        }
        if self.variant.needs_alpha() {
            match self.alpha_conf {
                Some(a) if a > 0.0 && a < 1.0 => {}
                Some(a) => return bad(format!("alpha_conf must lie in (0, 1), got {a}")),
                None => return bad(format!("{:?} requires alpha_conf", self.variant)),
            }
        }
        if let Some(d) = self.delta_star {
            if !(d > 0.0) {
                return bad(format!("delta_star must be positive, got {d}"));
            }
        }
        if matches!(self.variant, Variant::Iz | Variant::IzD) {
            self.integrals.validate()?;
        }
        Ok(())
    }

    pub(crate) fn alpha(&self) -> f64 {
        self.alpha_conf.expect("validated policy carries alpha_conf")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    /// The caller decides on the sample means.
    ByMeans,
    /// The neighbour is significantly better than the allowed difference.
    DirectAccept,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonOutcome {
    pub stats_current: SampleStats,
    pub stats_neighbor: SampleStats,
    pub sims_total: usize,
    pub verdict: Verdict,
    /// Simulation batches run after the initial stage.
    pub rounds: usize,
}

/// Where a comparison draws its scenarios from: ordinals
/// `base_ordinal, base_ordinal + 1, ...` of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioStream {
    pub master_seed: u64,
    pub iteration: u64,
    pub base_ordinal: u64,
}

impl ScenarioStream {
    pub fn new(master_seed: u64, iteration: u64, base_ordinal: u64) -> Self {
        Self {
            master_seed,
            iteration,
            base_ordinal,
        }
    }

    pub fn scenario(&self, k: u64) -> ScenarioId {
        ScenarioId::new(self.master_seed, self.iteration, self.base_ordinal + k)
    }
}

/// Incremental simulation of the current (`a`) and neighbour (`b`) solutions.
pub(crate) struct Sampler<'a, P: StochasticProblem> {
    problem: &'a P,
    a: &'a P::Solution,
    b: &'a P::Solution,
    stream: ScenarioStream,
    pub stats_a: SampleStats,
    pub stats_b: SampleStats,
    /// Per-scenario improvement of `b` over `a` (CRN only).
    pub diff: SampleStats,
}

impl<'a, P: StochasticProblem> Sampler<'a, P> {
    pub fn new(problem: &'a P, a: &'a P::Solution, b: &'a P::Solution, stream: ScenarioStream) -> Self {
        Self {
            problem,
            a,
            b,
            stream,
            stats_a: SampleStats::new(),
            stats_b: SampleStats::new(),
            diff: SampleStats::new(),
        }
    }

    pub fn direction(&self) -> Direction {
        self.problem.direction()
    }

    /// Simulates both solutions on the same next `count` scenarios.
    pub fn paired(&mut self, count: usize) {
        debug_assert_eq!(self.stats_a.count(), self.stats_b.count());
        let dir = self.direction();
        for _ in 0..count {
            let sc = self.stream.scenario(self.stats_a.count());
            let ca = self.problem.sample_cost(self.a, sc);
            let cb = self.problem.sample_cost(self.b, sc);
            self.stats_a.push(ca);
            self.stats_b.push(cb);
            self.diff.push(dir.improvement(ca, cb));
        }
    }

    /// Simulates only `a`, continuing its own stream.
    pub fn only_a(&mut self, count: usize) {
        for _ in 0..count {
            let sc = self.stream.scenario(self.stats_a.count());
            self.stats_a.push(self.problem.sample_cost(self.a, sc));
        }
    }

    /// Simulates only `b`, on a stream disjoint from `a`'s.
    pub fn only_b(&mut self, count: usize) {
        for _ in 0..count {
            let sc = self.stream.scenario(self.stats_b.count()).offset(NON_CRN_STRIDE);
            self.stats_b.push(self.problem.sample_cost(self.b, sc));
        }
    }

    pub fn total(&self) -> usize {
        (self.stats_a.count() + self.stats_b.count()) as usize
    }

    pub fn finish(self, verdict: Verdict, rounds: usize) -> ComparisonOutcome {
        ComparisonOutcome {
            stats_current: self.stats_a,
            stats_neighbor: self.stats_b,
            sims_total: self.total(),
            verdict,
            rounds,
        }
    }
}

/// Constant budget: both solutions are simulated `n_max / 2` times.
pub fn compare_const<P: StochasticProblem>(
    problem: &P,
    current: &P::Solution,
    neighbor: &P::Solution,
    cfg: &PolicyConfig,
    crn: bool,
    stream: ScenarioStream,
) -> ComparisonOutcome {
    let per_solution = cfg.n_max / 2;
    let mut sampler = Sampler::new(problem, current, neighbor, stream);
    if crn {
        sampler.paired(per_solution);
    } else {
        sampler.only_a(per_solution);
        sampler.only_b(per_solution);
    }
    sampler.finish(Verdict::ByMeans, 0)
}

/// Runs the comparison prescribed by `cfg`. `allowed_difference` is the
/// (non-positive) slack the acceptance rule grants the neighbour.
pub fn compare<P: StochasticProblem>(
    problem: &P,
    current: &P::Solution,
    neighbor: &P::Solution,
    allowed_difference: f64,
    cfg: &PolicyConfig,
    stream: ScenarioStream,
) -> Result<ComparisonOutcome, PolicyError> {
    Ok(match cfg.variant {
        Variant::Const => compare_const(problem, current, neighbor, cfg, true, stream),
        Variant::ConstNoCrn => compare_const(problem, current, neighbor, cfg, false, stream),
        Variant::Ocba => compare_ocba(problem, current, neighbor, cfg, stream),
        Variant::Iz => compare_iz(problem, current, neighbor, allowed_difference, cfg, false, stream)?,
        Variant::IzD => compare_iz(problem, current, neighbor, allowed_difference, cfg, true, stream)?,
        Variant::TTest0 | Variant::TTestD | Variant::DoubleTTest => {
            compare_ttest(problem, current, neighbor, allowed_difference, cfg, stream)
        }
    })
}

#[cfg(test)]
pub(crate) mod testing {
    use rand::Rng;
    use rand_distr::StandardNormal;

    use crate::crn::{Direction, ScenarioId, StochasticProblem};

    /// Two-solution problem with normal costs. With `shared_noise` both
    /// solutions use the same standard normal draw per scenario.
    #[derive(Debug, Clone)]
    pub struct NormalPair {
        pub means: [f64; 2],
        pub sds: [f64; 2],
        pub direction: Direction,
        pub shared_noise: bool,
    }

    impl NormalPair {
        pub fn new(means: [f64; 2], sds: [f64; 2]) -> Self {
            Self {
                means,
                sds,
                direction: Direction::Minimize,
                shared_noise: false,
            }
        }
    }

    impl StochasticProblem for NormalPair {
        type Solution = usize;

        fn direction(&self) -> Direction {
            self.direction
        }

        fn sample_cost(&self, s: &usize, sc: ScenarioId) -> f64 {
            let mut rng = sc.rng();
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            let z = if self.shared_noise || *s == 0 { z0 } else { z1 };
            self.means[*s] + self.sds[*s] * z
        }
    }
}
