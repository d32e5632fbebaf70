//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal, StudentsT};

use stochsa::crn::{Direction, ScenarioId, StochasticProblem};
use stochsa::experiment::{self, preset, Experiment, ExperimentConfig, ProblemKind};
use stochsa::policy::{compare, ocba_split, two_sided_p_value, PolicyConfig, ScenarioStream, Variant};
use stochsa::sa::{allowed_difference, draw_u, search_rng, Annealer, Neighborhood, SaParams};
use stochsa::stats::{
    chi2_pdf, normal_cdf, rinott_h, rinott_integral, student_t_cdf, yoon_h1, yoon_integral, IntegralSolverConfig,
    SampleStats,
};
use stochsa::toymin::{brute_force_optimum, SwapNeighborhood, ToyInstance, ToyJob, ToyMin};

type Outcome = Result<String, String>;

/// Largest single comparison seen by any criterion: label → (max sims, n_max).
static BUDGET: Mutex<BTreeMap<String, (usize, usize)>> = Mutex::new(BTreeMap::new());

fn record_budget(label: String, max_sims: usize, n_max: usize) {
    let mut b = BUDGET.lock().unwrap();
    let e = b.entry(label).or_insert((0, n_max));
    e.0 = e.0.max(max_sims);
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn statistical_kernels() -> Outcome {
    let mut worst_t: f64 = 0.0;
    for dof in [1u32, 2, 3, 5, 10, 15, 30, 100] {
        let oracle = StudentsT::new(0.0, 1.0, f64::from(dof)).unwrap();
        for t in grid(-20.0, 20.0, 1000) {
            worst_t = worst_t.max((student_t_cdf(t, dof) - oracle.cdf(t)).abs());
        }
    }
    let oracle = Normal::new(0.0, 1.0).unwrap();
    let worst_n = grid(-10.0, 10.0, 1000).map(|z| (normal_cdf(z) - oracle.cdf(z)).abs()).fold(0.0, f64::max);
    let mut worst_c: f64 = 0.0;
    for dof in [1u32, 2, 3, 4, 5, 10, 20, 79, 199] {
        let oracle = ChiSquared::new(f64::from(dof)).unwrap();
        for x in grid(0.01, 100.0, 1000) {
            worst_c = worst_c.max((chi2_pdf(x, dof).unwrap() - oracle.pdf(x)).abs());
        }
    }

    let cfg = IntegralSolverConfig::default();
    let fine = cfg.refined(4);
    let mut worst_r: f64 = 0.0;
    for n0 in [10u32, 20, 80] {
        for alpha in [0.05, 0.1, 0.2] {
            let h = rinott_h(2, n0, alpha, &cfg).map_err(|e| e.to_string())?;
            let p = rinott_integral(h, 2, n0, &fine).map_err(|e| e.to_string())?;
            worst_r = worst_r.max((p - (1.0 - alpha)).abs());
        }
    }
    let mut worst_y: f64 = 0.0;
    for (ni, nb) in [(10u32, 10u32), (20, 50), (80, 80), (150, 30), (200, 200)] {
        for alpha in [0.1, 0.2] {
            let h1 = yoon_h1(ni, nb, alpha, &cfg).map_err(|e| e.to_string())?;
            let p = yoon_integral(h1, ni, nb, &fine).map_err(|e| e.to_string())?;
            worst_y = worst_y.max((p - (1.0 - alpha)).abs());
        }
    }
    check(
        worst_t < 1e-6 && worst_n < 1e-6 && worst_c < 1e-6 && worst_r < 1e-4 && worst_y < 1e-4,
        format!(
            "max |err| t {worst_t:.2e}, normal {worst_n:.2e}, chi2 pdf {worst_c:.2e}; \
             4x-resolution residual rinott {worst_r:.2e}, h1 {worst_y:.2e}"
        ),
    )
}

fn ttest_arithmetic() -> Outcome {
    // Sixteen values with mean 1 and sample variance 4.
    let mut xs = vec![1.0; 16];
    let a = (4.0f64 * 15.0 / 2.0).sqrt();
    xs[0] += a;
    xs[1] -= a;
    let stats = SampleStats::from_slice(&xs);
    let se = (stats.variance().unwrap() / 16.0).sqrt();
    let t = stats.mean() / se;
    let p = two_sided_p_value(&stats, 0.0);
    // Incomplete-beta form of 2 F15(-2): I_{15/(15+4)}(7.5, 0.5).
    let oracle = statrs::function::beta::beta_reg(7.5, 0.5, 15.0 / 19.0);
    check(
        (t - 2.0).abs() < 1e-12 && (p - oracle).abs() < 1e-6,
        format!("t = {t}, p = {p:.10}, oracle {oracle:.10}"),
    )
}

fn ocba_allocation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n1 = rng.random_range(1..500usize);
        let n2 = rng.random_range(1..500usize);
        let s1 = rng.random_range(0.0..10.0f64);
        let s2 = rng.random_range(1e-3..10.0f64);
        let delta = rng.random_range(1..100usize);
        let better_first = rng.random_bool(0.5);
        let r = s1 / s2;
        let i = (0..=delta)
            .min_by(|&a, &b| {
                let g = |i: usize| ((n1 + delta - i) as f64 / (n2 + i) as f64 - r).abs();
                g(a).total_cmp(&g(b))
            })
            .unwrap();
        if ocba_split(n1, n2, s1, s2, delta, better_first) != (n1 + delta - i, n2 + i) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches} of 1000 random tuples differ from the exhaustive scan"))
}

/// Two solutions with independent normal costs; solution 1 is better by `gap`.
struct TwoNormals {
    gap: f64,
    sigma: f64,
}

impl StochasticProblem for TwoNormals {
    type Solution = usize;

    fn direction(&self) -> Direction {
        Direction::Minimize
    }

    fn sample_cost(&self, s: &usize, scenario: ScenarioId) -> f64 {
        let mut rng = scenario.rng();
        let z: [f64; 2] = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        100.0 - self.gap * *s as f64 + self.sigma * z[*s]
    }
}

fn iz_pcs_floor() -> Outcome {
    let delta_star = 1.0;
    let problem = TwoNormals { gap: delta_star, sigma: 3.0 };
    let mut lines = Vec::new();
    let mut ok = true;
    for alpha in [0.1, 0.2] {
        let cfg = PolicyConfig::iz(20, 10, 2000, alpha, false).with_delta_star(delta_star);
        let mut correct = 0;
        let mut max_sims = 0;
        for trial in 0..1000u64 {
            let out = compare(&problem, &0, &1, 0.0, &cfg, ScenarioStream::new(77, trial, 0)).map_err(|e| e.to_string())?;
            max_sims = max_sims.max(out.sims_total);
            correct += (out.stats_neighbor.mean() <= out.stats_current.mean()) as usize;
        }
        record_budget(format!("IZ PCS alpha={alpha}"), max_sims, cfg.n_max);
        let pcs = correct as f64 / 1000.0;
        ok &= pcs >= 1.0 - alpha - 0.03;
        lines.push(format!("alpha {alpha}: PCS {pcs:.3} (floor {:.2})", 1.0 - alpha - 0.03));
    }
    check(ok, lines.join(", "))
}

fn all_policies(n_max: usize) -> Vec<(&'static str, PolicyConfig)> {
    vec![
        ("Const", PolicyConfig::constant(n_max)),
        ("ConstNoCrn", PolicyConfig::constant_no_crn(n_max)),
        ("OCBA", PolicyConfig::ocba(10, 5, n_max)),
        ("IZ0", PolicyConfig::iz(10, 10, n_max, 0.1, false)),
        ("IZD", PolicyConfig::iz(10, 10, n_max, 0.1, true)),
        ("TTest0", PolicyConfig::ttest(Variant::TTest0, 10, 10, n_max, 0.2)),
        ("TTestD", PolicyConfig::ttest(Variant::TTestD, 10, 10, n_max, 0.2)),
        ("DoubleTTest", PolicyConfig::ttest(Variant::DoubleTTest, 10, 10, n_max, 0.2)),
    ]
}

#[derive(Debug, PartialEq)]
struct Step {
    iteration: u64,
    temperature: u64,
    allowed_difference: u64,
    mean_current: u64,
    mean_neighbor: u64,
    accepted: bool,
    best_updated: bool,
}

fn zero_variance_reduction() -> Outcome {
    let jobs = [(4.0, 6.0), (3.0, 5.0), (6.0, 14.0), (2.0, 9.0), (5.0, 20.0), (3.5, 12.0), (4.5, 25.0)];
    let inst = ToyInstance::new(jobs.iter().map(|&(mean, due)| ToyJob { mean, stdev: 0.0, due }).collect()).unwrap();
    let params = SaParams::new(5.0, 0.9, 50, 0.05);
    let seed = 31;

    // Deterministic annealing on exact costs with the same random stream.
    let problem = ToyMin::new(inst.clone());
    let cost = |p: &Vec<usize>| problem.exact_cost(p).unwrap();
    let mut rng = search_rng(seed);
    let mut current = problem.identity();
    let mut best = current.clone();
    let mut reference = Vec::new();
    for iteration in 0.. {
        let temperature = params.temperature(iteration);
        if params.is_frozen(temperature) {
            break;
        }
        let neighbor = SwapNeighborhood.propose(&current, &mut rng).unwrap();
        let d = allowed_difference(temperature, draw_u(&mut rng));
        let (c, n) = (cost(&current), cost(&neighbor));
        let accepted = n + d <= c;
        let mut best_updated = false;
        if accepted {
            current = neighbor;
            if cost(&current) <= cost(&best) {
                best = current.clone();
                best_updated = true;
            }
        }
        reference.push(Step {
            iteration,
            temperature: temperature.to_bits(),
            allowed_difference: d.to_bits(),
            mean_current: c.to_bits(),
            mean_neighbor: n.to_bits(),
            accepted,
            best_updated,
        });
    }

    let mut differing = Vec::new();
    for (name, policy) in all_policies(200) {
        let n_max = policy.n_max;
        let annealer = Annealer::new(policy, params, 10).map_err(|e| e.to_string())?;
        let mut p = ToyMin::new(inst.clone());
        let initial = p.identity();
        let (found, trace) = annealer.run(&mut p, &SwapNeighborhood, initial, seed).map_err(|e| e.to_string())?;
        let steps: Vec<Step> = trace
            .records
            .iter()
            .map(|r| Step {
                iteration: r.iteration,
                temperature: r.temperature.to_bits(),
                allowed_difference: r.allowed_difference.to_bits(),
                mean_current: r.mean_current.to_bits(),
                mean_neighbor: r.mean_neighbor.to_bits(),
                accepted: r.accepted,
                best_updated: r.best_updated,
            })
            .collect();
        let max_sims = trace.records.iter().map(|r| r.neighbor_sims.max(r.best_sims)).max().unwrap_or(0);
        record_budget(format!("zero variance {name}"), max_sims, n_max);
        if steps != reference || found != best {
            differing.push(name);
        }
    }
    check(
        differing.is_empty(),
        format!("{} iterations, 8 policies; differing: {differing:?}", reference.len()),
    )
}

fn oracle_instance() -> ToyInstance {
    let jobs = [(7.0, 2.0, 27.0), (4.0, 1.0, 7.0), (8.0, 2.0, 35.0), (3.0, 0.5, 3.0), (5.0, 1.0, 20.0), (2.0, 0.5, 9.0), (6.0, 1.5, 15.0)];
    ToyInstance::new(jobs.iter().map(|&(mean, stdev, due)| ToyJob { mean, stdev, due }).collect()).unwrap()
}

fn oracle_optimality() -> Outcome {
    let inst = oracle_instance();
    let (optimum, cost) = brute_force_optimum(&inst, 20_000, 1).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut lines = Vec::new();
    for name in ["Const200", "IZ0", "IZD", "TTest0", "TTestD", "DoubleTTest"] {
        let policy = preset(ProblemKind::Toymin, name).unwrap();
        let n_max = policy.n_max;
        let annealer = Annealer::new(policy, SaParams::toymin_default(), 200).map_err(|e| e.to_string())?;
        let mut hits = 0;
        for seed in 0..5 {
            let mut p = ToyMin::new(inst.clone());
            let initial = p.identity();
            let (best, trace) = annealer.run(&mut p, &SwapNeighborhood, initial, seed).map_err(|e| e.to_string())?;
            hits += (best == optimum) as usize;
            let max_sims = trace.records.iter().map(|r| r.neighbor_sims.max(r.best_sims)).max().unwrap_or(0);
            record_budget(format!("toymin {name}"), max_sims, n_max);
        }
        ok &= hits >= 4;
        lines.push(format!("{name} {hits}/5"));
    }
    check(ok, format!("optimum {optimum:?} (cost {cost:.3}): {}", lines.join(", ")))
}

const FIGURE_CONFIG: &str = r#"
runs = 5
seed = 1
audit_sims = 200
final_sims = 10000

[problem]
kind = "spmsp"
generate = { jobs = 20, relations = 30, machines = 4, seed = 1 }

[sa]
t_init = 0.01
alpha_cool = 0.9
q = 500
t_stop = 0.0001

[[methods]]
name = "Const400"
[[methods]]
name = "ConstNoCrn400"
[[methods]]
name = "IZ0"
[[methods]]
name = "IZD"
[[methods]]
name = "TTest0"
[[methods]]
name = "TTestD"
[[methods]]
name = "DoubleTTest"
"#;

struct FigureRun {
    dir: tempfile::TempDir,
    seconds: f64,
}

fn figure_experiment() -> Result<FigureRun, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = ExperimentConfig::from_toml(FIGURE_CONFIG).map_err(|e| e.to_string())?;
    let exp = Experiment::new(config, dir.path()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let report = exp.run(dir.path()).map_err(|e| e.to_string())?;
    for r in &report.runs {
        record_budget(format!("spmsp {}", r.method), r.max_comparison_sims, r.n_max);
    }
    Ok(FigureRun { dir, seconds: start.elapsed().as_secs_f64() })
}

fn crn_effect(fig: &FigureRun) -> Outcome {
    let rows = experiment::read_summary(&fig.dir.path().join(experiment::SUMMARY_FILE)).map_err(|e| e.to_string())?;
    let scores = |m: &str| -> SampleStats { rows.iter().filter(|r| r.method == m).map(|r| r.final_score).collect() };
    let (crn, no_crn) = (scores("Const400"), scores("ConstNoCrn400"));
    let (vc, vn) = (crn.variance().unwrap(), no_crn.variance().unwrap());
    check(
        crn.count() == 5 && no_crn.count() == 5 && no_crn.mean() < crn.mean() && vn > vc,
        format!(
            "Const400 mean {:.4} var {vc:.2e}; ConstNoCrn400 mean {:.4} var {vn:.2e}; experiment {:.0}s",
            crn.mean(),
            no_crn.mean(),
            fig.seconds
        ),
    )
}

fn simulation_counts(fig: &FigureRun) -> Outcome {
    let rows = experiment::read_histogram(&fig.dir.path().join(experiment::HISTOGRAM_FILE)).map_err(|e| e.to_string())?;
    let means = experiment::mean_sims_per_iteration(&rows);
    let get = |m: &str| means.get(m).copied().ok_or(format!("{m} missing from histogram"));
    let ttests = [get("TTest0")?, get("TTestD")?, get("DoubleTTest")?];
    let izs = [get("IZ0")?, get("IZD")?];
    let max_t = ttests.iter().copied().fold(f64::MIN, f64::max);
    let min_iz = izs.iter().copied().fold(f64::MAX, f64::min);
    check(
        ttests[2] < ttests[0] && max_t < min_iz,
        format!(
            "mean sims/iteration TTest0 {:.1}, TTestD {:.1}, DoubleTTest {:.1}, IZ0 {:.1}, IZD {:.1}",
            ttests[0], ttests[1], ttests[2], izs[0], izs[1]
        ),
    )
}

fn budget_cap() -> Outcome {
    let b = BUDGET.lock().unwrap();
    let over: Vec<_> = b.iter().filter(|(_, (m, n))| m > n).map(|(k, v)| format!("{k} {v:?}")).collect();
    check(
        !b.is_empty() && over.is_empty(),
        format!("{} traced policy/experiment groups, violations: {over:?}", b.len()),
    )
}

fn run(name: &str, f: impl FnOnce() -> Outcome, failures: &mut usize) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
        Err(detail) => {
            *failures += 1;
            println!("FAIL {name} ({secs:.1}s): {detail}");
        }
    }
}

fn main() {
    let mut failures = 0;
    run("statistical kernels", statistical_kernels, &mut failures);
    run("t-test arithmetic", ttest_arithmetic, &mut failures);
    run("OCBA allocation", ocba_allocation, &mut failures);
    run("IZ PCS floor", iz_pcs_floor, &mut failures);
    run("zero-variance reduction", zero_variance_reduction, &mut failures);
    run("oracle optimality", oracle_optimality, &mut failures);
    match figure_experiment() {
        Ok(fig) => {
            run("CRN effect (score vs runtime)", || crn_effect(&fig), &mut failures);
            run("simulation counts (histogram)", || simulation_counts(&fig), &mut failures);
        }
        Err(e) => {
            failures += 2;
            println!("FAIL CRN effect (score vs runtime): experiment failed: {e}");
            println!("FAIL simulation counts (histogram): experiment failed: {e}");
        }
    }
    run("budget cap", budget_cap, &mut failures);
    println!("acceptance: {} of 9 criteria failed", failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
