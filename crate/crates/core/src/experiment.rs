//! Multi-run experiment sweeps and their CSV outputs.
//!
//! An experiment is one problem, a list of named budget policies and a run
//! count. Every (method, run) pair is an independent annealing run seeded
//! with `seed + run`, so all methods see the same seeds. Runs execute on a
//! worker pool; one collector writes results in job order, which keeps the
//! CSVs byte-identical across replays apart from the wall-time column.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crn::{streams, ScenarioId, StochasticProblem};
use crate::policy::{PolicyConfig, Variant};
use crate::sa::{Annealer, Neighborhood, RunTrace, SaParams};
use crate::spmsp::{self, SpmspInstance, SpmspMoves, SpmspProblem, SpmspSchedule};
use crate::toymin::{SwapNeighborhood, ToyInstance, ToyMin};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const HISTOGRAM_FILE: &str = "sims_histogram.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.toml";
pub const INSTANCE_COPY_FILE: &str = "instance.inst";
pub const BEST_DIR: &str = "best";

pub const SUMMARY_COLUMNS: [&str; 6] = ["method", "run", "seed", "wall_time_s", "final_score", "total_sims"];
pub const HISTOGRAM_COLUMNS: [&str; 3] = ["method", "sims_per_iteration", "frequency"];
pub const CONVERGENCE_COLUMNS: [&str; 4] = ["method", "run", "iteration", "audited_best_score"];

pub const DEFAULT_RUNS: usize = 25;
pub const DEFAULT_AUDIT_SIMS: usize = 1000;
pub const DEFAULT_FINAL_SIMS: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Spmsp,
    Toymin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub jobs: usize,
    pub relations: usize,
    pub machines: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemSpec {
    Spmsp {
        /// Instance file, relative to the config file's directory.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        instance: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generate: Option<GenerateSpec>,
        #[serde(default = "default_weight_sims")]
        weight_sims: usize,
        #[serde(default = "default_buffer_step")]
        buffer_step: f64,
    },
    Toymin {
        jobs: ToyInstance,
    },
}

fn default_weight_sims() -> usize {
    spmsp::DEFAULT_WEIGHT_SIMS
}

fn default_buffer_step() -> f64 {
    spmsp::DEFAULT_BUFFER_STEP
}

impl ProblemSpec {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemSpec::Spmsp { .. } => ProblemKind::Spmsp,
            ProblemSpec::Toymin { .. } => ProblemKind::Toymin,
        }
    }
}

/// A named policy. Without an explicit `policy` the name must be a preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_audit_sims")]
    pub audit_sims: usize,
    #[serde(default = "default_final_sims")]
    pub final_sims: usize,
    /// Worker threads; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub problem: ProblemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sa: Option<SaParams>,
    /// All presets of the problem kind when empty.
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}

fn default_audit_sims() -> usize {
    DEFAULT_AUDIT_SIMS
}

fn default_final_sims() -> usize {
    DEFAULT_FINAL_SIMS
}

/// Method presets with the tuned parameters for each problem kind.
pub fn presets(kind: ProblemKind) -> Vec<(&'static str, PolicyConfig)> {
    use Variant::*;
    match kind {
        ProblemKind::Spmsp => vec![
            ("Const100", PolicyConfig::constant(100)),
            ("Const200", PolicyConfig::constant(200)),
            ("Const400", PolicyConfig::constant(400)),
            ("ConstNoCrn400", PolicyConfig::constant_no_crn(400)),
            ("OCBA", PolicyConfig::ocba(80, 10, 400)),
            ("IZ0", PolicyConfig::iz(80, 10, 400, 0.2, false)),
            ("IZD", PolicyConfig::iz(80, 10, 400, 0.2, true)),
            ("TTest0", PolicyConfig::ttest(TTest0, 80, 20, 400, 0.2)),
            ("TTestD", PolicyConfig::ttest(TTestD, 80, 20, 400, 0.2)),
            ("DoubleTTest", PolicyConfig::ttest(DoubleTTest, 80, 20, 400, 0.2)),
        ],
        ProblemKind::Toymin => vec![
            ("Const20", PolicyConfig::constant(20)),
            ("Const50", PolicyConfig::constant(50)),
            ("Const200", PolicyConfig::constant(200)),
            ("ConstNoCrn200", PolicyConfig::constant_no_crn(200)),
            ("OCBA", PolicyConfig::ocba(20, 5, 200)),
            ("IZ0", PolicyConfig::iz(10, 10, 200, 0.1, false)),
            ("IZD", PolicyConfig::iz(10, 10, 200, 0.1, true)),
            ("TTest0", PolicyConfig::ttest(TTest0, 10, 10, 200, 0.2)),
            ("TTestD", PolicyConfig::ttest(TTestD, 10, 10, 200, 0.2)),
            ("DoubleTTest", PolicyConfig::ttest(DoubleTTest, 10, 10, 200, 0.2)),
        ],
    }
}

pub fn preset(kind: ProblemKind, name: &str) -> Option<PolicyConfig> {
    presets(kind).into_iter().find(|(n, _)| *n == name).map(|(_, p)| p)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fills every default in: SA parameters, method policies, and an
    /// explicit method list.
    pub fn resolved(mut self) -> Result<Self, ExperimentError> {
        let cfg = |m: String| Err(ExperimentError::Config(m));
        if self.runs == 0 {
            return cfg("runs must be at least 1".into());
        }
        if self.audit_sims == 0 || self.final_sims == 0 {
            return cfg("audit_sims and final_sims must be at least 1".into());
        }
        if self.workers == Some(0) {
            return cfg("workers must be at least 1".into());
        }
        let kind = self.problem.kind();
        if let ProblemSpec::Spmsp { instance, generate, buffer_step, .. } = &self.problem {
            if instance.is_some() == generate.is_some() {
                return cfg("spmsp problem needs exactly one of `instance` or `generate`".into());
            }
            if !(*buffer_step > 0.0 && buffer_step.is_finite()) {
                return cfg("buffer_step must be positive".into());
            }
        }
        let sa = self.sa.unwrap_or(match kind {
            ProblemKind::Spmsp => SaParams::spmsp_default(),
            ProblemKind::Toymin => SaParams::toymin_default(),
        });
        sa.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.sa = Some(sa);
        if self.methods.is_empty() {
            self.methods = presets(kind)
                .into_iter()
                .map(|(name, p)| MethodSpec { name: name.to_string(), policy: Some(p) })
                .collect();
        }
        let mut seen = std::collections::HashSet::new();
        for m in &mut self.methods {
            if m.name.is_empty() || m.name.contains(['/', '\\']) {
                return cfg(format!("bad method name {:?}", m.name));
            }
            if !seen.insert(m.name.clone()) {
                return cfg(format!("duplicate method name {:?}", m.name));
            }
            if m.policy.is_none() {
                let known: Vec<_> = presets(kind).into_iter().map(|(n, _)| n).collect();
                m.policy = Some(preset(kind, &m.name).ok_or_else(|| {
                    ExperimentError::Config(format!("{:?} is not a preset; known: {}", m.name, known.join(", ")))
                })?);
            }
            let p = m.policy.as_ref().expect("filled above");
            p.validate().map_err(|e| ExperimentError::Config(format!("method {}: {e}", m.name)))?;
        }
        Ok(self)
    }
}

/// The instantiated problem of an experiment.
#[derive(Debug, Clone)]
pub enum LoadedProblem {
    Spmsp { instance: Arc<SpmspInstance>, weight_sims: usize, buffer_step: f64 },
    Toymin(ToyInstance),
}

/// A resolved config and its loaded problem, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub problem: LoadedProblem,
}

impl Experiment {
    /// Resolves `config`; relative instance paths are taken from `base_dir`.
    pub fn new(config: ExperimentConfig, base_dir: &Path) -> Result<Self, ExperimentError> {
        let config = config.resolved()?;
        let problem = match &config.problem {
            ProblemSpec::Spmsp { instance, generate, weight_sims, buffer_step } => {
                let inst = match (instance, generate) {
                    (Some(path), _) => SpmspInstance::load(&base_dir.join(path))
                        .map_err(|e| ExperimentError::Config(e.to_string()))?,
                    (None, Some(g)) => spmsp::generate_instance(g.jobs, g.relations, g.machines, g.seed)
                        .map_err(|e| ExperimentError::Config(e.to_string()))?,
                    (None, None) => unreachable!("checked by resolve"),
                };
                LoadedProblem::Spmsp { instance: Arc::new(inst), weight_sims: *weight_sims, buffer_step: *buffer_step }
            }
            ProblemSpec::Toymin { jobs } => LoadedProblem::Toymin(jobs.clone()),
        };
        Ok(Self { config, problem })
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::new(ExperimentConfig::from_toml(&text)?, base)
    }

    pub fn methods(&self) -> impl Iterator<Item = (&str, &PolicyConfig)> {
        self.config.methods.iter().map(|m| (m.name.as_str(), m.policy.as_ref().expect("resolved")))
    }

    pub fn sa_params(&self) -> SaParams {
        self.config.sa.expect("resolved")
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.config.seed.wrapping_add(run as u64)
    }

    /// Executes one run of method `method`.
    pub fn run_one(&self, method: usize, run: usize) -> Result<RunResult, ExperimentError> {
        let spec = &self.config.methods[method];
        let policy = spec.policy.clone().expect("resolved");
        let annealer = Annealer::new(policy.clone(), self.sa_params(), self.config.audit_sims)
            .map_err(|e| ExperimentError::Config(format!("method {}: {e}", spec.name)))?;
        let seed = self.run_seed(run);
        let final_sims = self.config.final_sims;
        let outcome = match &self.problem {
            LoadedProblem::Spmsp { instance, weight_sims, buffer_step } => {
                let mut problem = SpmspProblem::new(instance.clone()).with_weight_sims(*weight_sims);
                let moves = SpmspMoves::new(instance.clone()).with_buffer_step(*buffer_step);
                let initial = SpmspSchedule::greedy(instance);
                anneal(&annealer, &mut problem, &moves, initial, seed, final_sims, |s| {
                    serde_json::to_string_pretty(&s.to_file()).expect("schedule serializes")
                })
            }
            LoadedProblem::Toymin(inst) => {
                let mut problem = ToyMin::new(inst.clone());
                let initial = problem.identity();
                anneal(&annealer, &mut problem, &SwapNeighborhood, initial, seed, final_sims, |p| {
                    serde_json::to_string(&serde_json::json!({ "permutation": p })).expect("permutation serializes")
                })
            }
        }
        .map_err(|e| ExperimentError::Runtime(format!("method {} run {run}: {e}", spec.name)))?;
        Ok(outcome.into_result(spec.name.clone(), run, seed, policy.n_max))
    }

    /// Runs every (method, run) pair and writes all outputs to `out_dir`.
    pub fn run(&self, out_dir: &Path) -> Result<ExperimentReport, ExperimentError> {
        std::fs::create_dir_all(out_dir.join(BEST_DIR)).map_err(|e| io_err(out_dir, e))?;
        let echo = out_dir.join(RESOLVED_CONFIG_FILE);
        std::fs::write(&echo, self.config.to_toml()).map_err(|e| io_err(&echo, e))?;
        if let LoadedProblem::Spmsp { instance, .. } = &self.problem {
            instance.save(&out_dir.join(INSTANCE_COPY_FILE)).map_err(|e| ExperimentError::Io(e.to_string()))?;
        }

        let runs = self.config.runs;
        let jobs = self.config.methods.len() * runs;
        let workers = self.config.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;

        let mut writer = CsvCollector::create(out_dir)?;
        let mut report = ExperimentReport::default();
        let mut pending: BTreeMap<usize, Result<RunResult, ExperimentError>> = BTreeMap::new();
        let mut next = 0;
        let mut first_error = None;
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|scope| -> Result<(), ExperimentError> {
            scope.spawn(|| {
                pool.install(|| {
                    (0..jobs).into_par_iter().for_each_with(tx, |tx, idx| {
                        // A closed receiver means the collector already failed.
                        let _ = tx.send((idx, self.run_one(idx / runs, idx % runs)));
                    })
                })
            });
            for (idx, result) in rx {
                pending.insert(idx, result);
                while let Some(result) = pending.remove(&next) {
                    next += 1;
                    match result {
                        Ok(r) => {
                            writer.write_run(&r)?;
                            let best = out_dir.join(BEST_DIR).join(format!("{}-run{}.json", r.method, r.run));
                            std::fs::write(&best, &r.best_solution).map_err(|e| io_err(&best, e))?;
                            report.absorb(r);
                        }
                        Err(e) => {
                            first_error.get_or_insert(e);
                        }
                    }
                }
            }
            Ok(())
        })?;
        writer.write_histogram(&self.config.methods, &report.histograms)?;
        match first_error {
            Some(e) => Err(e),
            None => Ok(report),
        }
    }
}

struct AnnealOutcome {
    trace: RunTrace,
    wall_time_s: f64,
    final_score: f64,
    best_solution: String,
}

fn anneal<P, N>(
    annealer: &Annealer,
    problem: &mut P,
    neighborhood: &N,
    initial: P::Solution,
    seed: u64,
    final_sims: usize,
    export: impl FnOnce(&P::Solution) -> String,
) -> Result<AnnealOutcome, crate::sa::SaError>
where
    P: StochasticProblem,
    N: Neighborhood<P::Solution>,
{
    let start = Instant::now();
    let (best, trace) = annealer.run(problem, neighborhood, initial, seed)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let final_score = (0..final_sims as u64)
        .map(|k| problem.report_cost(&best, ScenarioId::new(seed, streams::FINAL_ITERATION, k)))
        .sum::<f64>()
        / final_sims as f64;
    Ok(AnnealOutcome { trace, wall_time_s, final_score, best_solution: export(&best) })
}

impl AnnealOutcome {
    fn into_result(self, method: String, run: usize, seed: u64, n_max: usize) -> RunResult {
        let mut histogram = BTreeMap::new();
        let mut max_comparison_sims = 0;
        for r in &self.trace.records {
            *histogram.entry(r.neighbor_sims).or_insert(0u64) += 1;
            max_comparison_sims = max_comparison_sims.max(r.neighbor_sims).max(r.best_sims);
        }
        RunResult {
            method,
            run,
            seed,
            wall_time_s: self.wall_time_s,
            final_score: self.final_score,
            total_sims: self.trace.total_sims(),
            iterations: self.trace.iterations(),
            n_max,
            max_comparison_sims,
            histogram,
            convergence: self.trace.best_updates.iter().map(|b| (b.iteration, b.audited_score)).collect(),
            best_solution: self.best_solution,
        }
    }
}

/// Everything one run contributes to the outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub method: String,
    pub run: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub final_score: f64,
    pub total_sims: u64,
    pub iterations: u64,
    pub n_max: usize,
    /// Largest single comparison of the run (neighbour or best check).
    pub max_comparison_sims: usize,
    /// Neighbour-comparison simulations per iteration → iteration count.
    pub histogram: BTreeMap<usize, u64>,
    pub convergence: Vec<(u64, f64)>,
    pub best_solution: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub runs: Vec<RunSummary>,
    pub histograms: BTreeMap<String, BTreeMap<usize, u64>>,
}

/// Per-run facts kept after the outputs are written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub method: String,
    pub run: usize,
    pub final_score: f64,
    pub total_sims: u64,
    pub iterations: u64,
    pub n_max: usize,
    pub max_comparison_sims: usize,
}

impl ExperimentReport {
    fn absorb(&mut self, r: RunResult) {
        let h = self.histograms.entry(r.method.clone()).or_default();
        for (&k, &v) in &r.histogram {
            *h.entry(k).or_insert(0) += v;
        }
        self.runs.push(RunSummary {
            method: r.method,
            run: r.run,
            final_score: r.final_score,
            total_sims: r.total_sims,
            iterations: r.iterations,
            n_max: r.n_max,
            max_comparison_sims: r.max_comparison_sims,
        });
    }

    /// Runs in which some comparison used more than `n_max` simulations.
    pub fn budget_violations(&self) -> Vec<&RunSummary> {
        self.runs.iter().filter(|r| r.max_comparison_sims > r.n_max).collect()
    }
}

struct CsvCollector {
    summary: csv::Writer<File>,
    convergence: csv::Writer<File>,
    histogram_path: PathBuf,
}

impl CsvCollector {
    fn create(dir: &Path) -> Result<Self, ExperimentError> {
        let open = |name: &str, header: &[&str]| -> Result<csv::Writer<File>, ExperimentError> {
            let path = dir.join(name);
            let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).map_err(|e| io_err(&path, e))?;
            w.write_record(header).map_err(|e| io_err(&path, e))?;
            w.flush().map_err(|e| io_err(&path, e))?;
            Ok(w)
        };
        Ok(Self {
            summary: open(SUMMARY_FILE, &SUMMARY_COLUMNS)?,
            convergence: open(CONVERGENCE_FILE, &CONVERGENCE_COLUMNS)?,
            histogram_path: dir.join(HISTOGRAM_FILE),
        })
    }

    fn write_run(&mut self, r: &RunResult) -> Result<(), ExperimentError> {
        let err = |e: csv::Error| ExperimentError::Io(e.to_string());
        self.summary
            .serialize(SummaryRow {
                method: r.method.clone(),
                run: r.run,
                seed: r.seed,
                wall_time_s: r.wall_time_s,
                final_score: r.final_score,
                total_sims: r.total_sims,
            })
            .map_err(err)?;
        for &(iteration, audited_best_score) in &r.convergence {
            self.convergence
                .serialize(ConvergenceRow { method: r.method.clone(), run: r.run, iteration, audited_best_score })
                .map_err(err)?;
        }
        self.summary.flush().map_err(|e| ExperimentError::Io(e.to_string()))?;
        self.convergence.flush().map_err(|e| ExperimentError::Io(e.to_string()))
    }

    fn write_histogram(
        &mut self,
        methods: &[MethodSpec],
        histograms: &BTreeMap<String, BTreeMap<usize, u64>>,
    ) -> Result<(), ExperimentError> {
        let path = &self.histogram_path;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| io_err(path, e))?;
        w.write_record(HISTOGRAM_COLUMNS).map_err(|e| io_err(path, e))?;
        for m in methods {
            for (&sims, &frequency) in histograms.get(&m.name).into_iter().flatten() {
                w.serialize(HistogramRow { method: m.name.clone(), sims_per_iteration: sims, frequency })
                    .map_err(|e| io_err(path, e))?;
            }
        }
        w.flush().map_err(|e| io_err(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryRow {
    pub method: String,
    pub run: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub final_score: f64,
    pub total_sims: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramRow {
    pub method: String,
    pub sims_per_iteration: usize,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceRow {
    pub method: String,
    pub run: usize,
    pub iteration: u64,
    pub audited_best_score: f64,
}

fn read_checked<T: serde::de::DeserializeOwned>(path: &Path, columns: &[&str]) -> Result<Vec<T>, ExperimentError> {
    let schema = |message: String| ExperimentError::Schema { path: path.to_path_buf(), message };
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| schema(e.to_string()))?.clone();
    if header.iter().ne(columns.iter().copied()) {
        return Err(schema(format!("expected columns {columns:?}, found {:?}", header.iter().collect::<Vec<_>>())));
    }
    r.deserialize().map(|row| row.map_err(|e| schema(e.to_string()))).collect()
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, ExperimentError> {
    read_checked(path, &SUMMARY_COLUMNS)
}

pub fn read_histogram(path: &Path) -> Result<Vec<HistogramRow>, ExperimentError> {
    read_checked(path, &HISTOGRAM_COLUMNS)
}

pub fn read_convergence(path: &Path) -> Result<Vec<ConvergenceRow>, ExperimentError> {
    read_checked(path, &CONVERGENCE_COLUMNS)
}

/// Mean simulations per iteration of each method, from histogram rows.
pub fn mean_sims_per_iteration(rows: &[HistogramRow]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r.method.clone()).or_default();
        e.0 += r.sims_per_iteration as f64 * r.frequency as f64;
        e.1 += r.frequency as f64;
    }
    acc.into_iter().map(|(m, (s, n))| (m, s / n)).collect()
}
