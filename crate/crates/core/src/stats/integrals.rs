//! Solvers for the indifference-zone constants.
//!
//! Both constants solve an equation of the form `I(h) = target`, where `I`
//! is a double integral of `Φ(h · scale(x, y))` against two χ² densities. We
//! integrate each axis in `t = √x`, which turns the χ² weight `x^{k/2-1}` into
//! the smooth `t^{k-1}` and lets a fixed Gauss–Legendre rule handle low
//! degrees of freedom. The grid is built once and reused across bisection
//! steps; `I` is monotone increasing in `h`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use super::quadrature::GaussLegendre;
use super::special::{chi2_pdf, chi2_sf, chi2_upper_quantile, normal_cdf};
use super::StatsError;

const BRACKET: f64 = 20.0;
const MAX_TAIL_MASS: f64 = 1e-10;

/// How far each semi-infinite χ² axis is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainCap {
    /// Truncate at the upper χ² quantile leaving this much tail mass.
    Quantile { tail: f64 },
    /// Truncate every axis at a fixed value.
    Fixed { cap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralSolverConfig {
    pub quadrature_points: usize,
    pub domain_cap: DomainCap,
    pub root_tolerance: f64,
    pub max_bisection_steps: usize,
}

impl Default for IntegralSolverConfig {
    fn default() -> Self {
        Self {
            quadrature_points: 128,
            domain_cap: DomainCap::Quantile { tail: 1e-12 },
            root_tolerance: 1e-6,
            max_bisection_steps: 100,
        }
    }
}

impl IntegralSolverConfig {
    /// Same configuration with `factor` times as many quadrature points.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            quadrature_points: self.quadrature_points * factor,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if self.quadrature_points < 32 {
            return Err(StatsError::InvalidConfig("quadrature_points must be >= 32"));
        }
        if !(self.root_tolerance > 0.0) {
            return Err(StatsError::InvalidConfig("root_tolerance must be positive"));
        }
        match self.domain_cap {
            DomainCap::Quantile { tail } if !(tail > 0.0 && tail < MAX_TAIL_MASS) => Err(
                StatsError::InvalidConfig("domain_cap tail must lie in (0, 1e-10)"),
            ),
            DomainCap::Fixed { cap } if !(cap > 0.0) => {
                Err(StatsError::InvalidConfig("domain_cap must be positive"))
            }
            _ => Ok(()),
        }
    }

    fn cap_for(&self, dof: u32) -> Result<f64, StatsError> {
        match self.domain_cap {
            DomainCap::Quantile { tail } => Ok(chi2_upper_quantile(tail, dof)),
            DomainCap::Fixed { cap } => {
                if chi2_sf(cap, dof) >= MAX_TAIL_MASS {
                    Err(StatsError::InvalidConfig(
                        "fixed domain_cap leaves more than 1e-10 chi-square tail mass",
                    ))
                } else {
                    Ok(cap)
                }
            }
        }
    }
}

/// Quadrature nodes `x` and weights carrying the χ² density for one axis.
struct ChiAxis {
    points: Vec<(f64, f64)>,
}

impl ChiAxis {
    fn new(rule: &GaussLegendre, dof: u32, cfg: &IntegralSolverConfig) -> Result<Self, StatsError> {
        let upper = cfg.cap_for(dof)?.sqrt();
        let points = rule
            .mapped(0.0, upper)
            .map(|(t, w)| {
                let x = t * t;
                let density = chi2_pdf(x, dof).expect("quadrature node is non-negative");
                Ok((x, w * 2.0 * t * density))
            })
            .collect::<Result<Vec<_>, StatsError>>()?;
        Ok(Self { points })
    }
}

/// Finds `h` in `[-20, 20]` with `integral(h) = target` by bisection.
fn bisect<F: Fn(f64) -> f64>(
    integral: F,
    target: f64,
    cfg: &IntegralSolverConfig,
) -> Result<f64, StatsError> {
    let (mut lo, mut hi) = (-BRACKET, BRACKET);
    if integral(lo) > target || integral(hi) < target {
        return Err(StatsError::NoConvergence {
            reason: "target probability is outside the bracketed range",
        });
    }
    for _ in 0..cfg.max_bisection_steps {
        let mid = 0.5 * (lo + hi);
        if integral(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < cfg.root_tolerance {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(StatsError::NoConvergence {
        reason: "bisection step limit reached",
    })
}

fn check_probability(alpha: f64) -> Result<(), StatsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidArgument("confidence parameter must lie in (0, 1)"))
    }
}

/// Value of Rinott's double integral for `k` systems, first-stage size `n0`.
pub fn rinott_integral(
    h: f64,
    k: u32,
    n0: u32,
    cfg: &IntegralSolverConfig,
) -> Result<f64, StatsError> {
    Ok(RinottGrid::new(k, n0, cfg)?.eval(h))
}

struct RinottGrid {
    axis: ChiAxis,
    power: i32,
    dof: f64,
}

impl RinottGrid {
    fn new(k: u32, n0: u32, cfg: &IntegralSolverConfig) -> Result<Self, StatsError> {
        if k < 2 || n0 < 2 {
            return Err(StatsError::InvalidArgument("rinott_h requires k >= 2 and n0 >= 2"));
        }
        cfg.validate()?;
        let rule = GaussLegendre::new(cfg.quadrature_points);
        Ok(Self {
            axis: ChiAxis::new(&rule, n0 - 1, cfg)?,
            power: (k - 1) as i32,
            dof: f64::from(n0 - 1),
        })
    }

    fn eval(&self, h: f64) -> f64 {
        self.axis
            .points
            .iter()
            .map(|&(y, wy)| {
                let inner: f64 = self
                    .axis
                    .points
                    .iter()
                    .map(|&(x, wx)| wx * normal_cdf(h / (self.dof * (1.0 / x + 1.0 / y)).sqrt()))
                    .sum();
                wy * inner.powi(self.power)
            })
            .sum()
    }
}

/// Rinott's constant `h` for `k` systems with first-stage size `n0`.
pub fn rinott_h(k: u32, n0: u32, alpha: f64, cfg: &IntegralSolverConfig) -> Result<f64, StatsError> {
    check_probability(alpha)?;
    let grid = RinottGrid::new(k, n0, cfg)?;
    bisect(|h| grid.eval(h), 1.0 - alpha, cfg)
}

/// Pairwise grid for the iterative procedure's constant, with `Φ`'s argument
/// scale precomputed for every node pair.
struct PairGrid {
    weighted_scale: Vec<(f64, f64)>,
}

impl PairGrid {
    fn new(n_i: u32, n_b: u32, cfg: &IntegralSolverConfig) -> Result<Self, StatsError> {
        if n_i < 2 || n_b < 2 {
            return Err(StatsError::InvalidArgument("yoon_h1 requires n_i >= 2 and n_b >= 2"));
        }
        cfg.validate()?;
        let rule = GaussLegendre::new(cfg.quadrature_points);
        let x_axis = ChiAxis::new(&rule, n_i - 1, cfg)?;
        let y_axis = ChiAxis::new(&rule, n_b - 1, cfg)?;
        let (di, db) = (f64::from(n_i - 1), f64::from(n_b - 1));
        let mut weighted_scale = Vec::with_capacity(x_axis.points.len() * y_axis.points.len());
        for &(y, wy) in &y_axis.points {
            for &(x, wx) in &x_axis.points {
                weighted_scale.push((wx * wy, 1.0 / (di / x + db / y).sqrt()));
            }
        }
        Ok(Self { weighted_scale })
    }

    fn eval(&self, h: f64) -> f64 {
        self.weighted_scale
            .iter()
            .map(|&(w, scale)| w * normal_cdf(h * scale))
            .sum()
    }
}

/// Value of the pairwise integral at `h1` for sample sizes `n_i`, `n_b`.
pub fn yoon_integral(h1: f64, n_i: u32, n_b: u32, cfg: &IntegralSolverConfig) -> Result<f64, StatsError> {
    Ok(PairGrid::new(n_i, n_b, cfg)?.eval(h1))
}

/// The constant `h₁` for two systems with current sample sizes `n_i`, `n_b`,
/// without consulting the cache.
pub fn yoon_h1_uncached(
    n_i: u32,
    n_b: u32,
    alpha_over: f64,
    cfg: &IntegralSolverConfig,
) -> Result<f64, StatsError> {
    check_probability(alpha_over)?;
    let grid = PairGrid::new(n_i, n_b, cfg)?;
    bisect(|h| grid.eval(h), 1.0 - alpha_over, cfg)
}

/// Memoized `h₁`, shared through the process-wide [`H1Cache`].
pub fn yoon_h1(n_i: u32, n_b: u32, alpha_over: f64, cfg: &IntegralSolverConfig) -> Result<f64, StatsError> {
    H1Cache::global().get(n_i, n_b, alpha_over, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct H1Key {
    n_i: u32,
    n_b: u32,
    alpha_bits: u64,
    points: usize,
    cap: (u8, u64),
    tol_bits: u64,
    steps: usize,
}

impl H1Key {
    fn new(n_i: u32, n_b: u32, alpha: f64, cfg: &IntegralSolverConfig) -> Self {
        let cap = match cfg.domain_cap {
            DomainCap::Quantile { tail } => (0, tail.to_bits()),
            DomainCap::Fixed { cap } => (1, cap.to_bits()),
        };
        Self {
            n_i,
            n_b,
            alpha_bits: alpha.to_bits(),
            points: cfg.quadrature_points,
            cap,
            tol_bits: cfg.root_tolerance.to_bits(),
            steps: cfg.max_bisection_steps,
        }
    }
}

/// Thread-safe memo table for `h₁` values.
#[derive(Debug, Default)]
pub struct H1Cache {
    table: RwLock<HashMap<H1Key, f64>>,
}

impl H1Cache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global() -> &'static H1Cache {
        static GLOBAL: OnceLock<H1Cache> = OnceLock::new();
        GLOBAL.get_or_init(H1Cache::new)
    }

    pub fn get(
        &self,
        n_i: u32,
        n_b: u32,
        alpha_over: f64,
        cfg: &IntegralSolverConfig,
    ) -> Result<f64, StatsError> {
        let key = H1Key::new(n_i, n_b, alpha_over, cfg);
        if let Some(&h) = self.table.read().expect("h1 cache poisoned").get(&key) {
            return Ok(h);
        }
        let h = yoon_h1_uncached(n_i, n_b, alpha_over, cfg)?;
        self.table.write().expect("h1 cache poisoned").insert(key, h);
        Ok(h)
    }

    pub fn len(&self) -> usize {
        self.table.read().expect("h1 cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IntegralSolverConfig {
        IntegralSolverConfig::default()
    }

    #[test]
    fn chi_axis_weights_integrate_to_one() {
        let c = cfg();
        let rule = GaussLegendre::new(c.quadrature_points);
        for dof in [1, 2, 9, 79, 199] {
            let axis = ChiAxis::new(&rule, dof, &c).unwrap();
            let mass: f64 = axis.points.iter().map(|p| p.1).sum();
            assert!((mass - 1.0).abs() < 1e-10, "dof {dof}: {mass}");
        }
    }

    #[test]
    fn rinott_reference_value() {
        // Independent scipy dblquad + brentq gives 1.2010689 for (2, 80, 0.2).
        let h = rinott_h(2, 80, 0.2, &cfg()).unwrap();
        assert!((h - 1.201_068_9).abs() < 2e-6, "{h}");
        assert!(rinott_h(2, 80, 0.1, &cfg()).unwrap() > h);
    }

    #[test]
    fn rinott_large_alpha_gives_non_positive_constant() {
        let half = rinott_h(2, 80, 0.5, &cfg()).unwrap();
        let near_one = rinott_h(2, 80, 0.999, &cfg()).unwrap();
        assert!(half.abs() < 1e-6);
        assert!(near_one < half);
    }

    #[test]
    fn h1_equals_rinott_for_equal_sizes() {
        let c = cfg();
        let h1 = yoon_h1_uncached(80, 80, 0.2, &c).unwrap();
        let h = rinott_h(2, 80, 0.2, &c).unwrap();
        assert!((h1 - h).abs() < 1e-9);
    }

    #[test]
    fn invalid_arguments_rejected() {
        let c = cfg();
        assert!(rinott_h(1, 80, 0.2, &c).is_err());
        assert!(rinott_h(2, 1, 0.2, &c).is_err());
        assert!(yoon_h1_uncached(80, 80, 1.0, &c).is_err());
        let coarse = IntegralSolverConfig { quadrature_points: 16, ..c };
        assert!(matches!(rinott_h(2, 80, 0.2, &coarse), Err(StatsError::InvalidConfig(_))));
        let short = IntegralSolverConfig { domain_cap: DomainCap::Fixed { cap: 50.0 }, ..c };
        assert!(matches!(rinott_h(2, 80, 0.2, &short), Err(StatsError::InvalidConfig(_))));
    }

    #[test]
    fn bisection_step_limit_is_reported() {
        let c = IntegralSolverConfig { max_bisection_steps: 3, ..cfg() };
        assert!(matches!(
            yoon_h1_uncached(20, 20, 0.2, &c),
            Err(StatsError::NoConvergence { .. })
        ));
    }

    #[test]
    fn cache_is_transparent() {
        let cache = H1Cache::new();
        let c = cfg();
        let direct = yoon_h1_uncached(30, 50, 0.15, &c).unwrap();
        let first = cache.get(30, 50, 0.15, &c).unwrap();
        let second = cache.get(30, 50, 0.15, &c).unwrap();
        assert_eq!(direct.to_bits(), first.to_bits());
        assert_eq!(first.to_bits(), second.to_bits());
        assert_eq!(cache.len(), 1);
    }
}
