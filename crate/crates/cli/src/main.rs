//! `stochsa` command-line front end: instance generation, experiment
//! sweeps and schedule evaluation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stochsa::experiment::{Experiment, ExperimentError};
use stochsa::spmsp::{self, SpmspError, SpmspInstance, SpmspSchedule};

#[derive(Parser)]
#[command(name = "stochsa", version, about = "Simulated annealing with adaptive simulation budgets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scheduling instance.
    Generate {
        /// Number of jobs.
        jobs: usize,
        /// Number of precedence relations.
        relations: usize,
        /// Number of machines.
        machines: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file, or a directory receiving `{j}j-{r}r-{m}m.inst`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run an experiment config and write its CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads (overrides the config).
        #[arg(long)]
        jobs: Option<usize>,
        /// Base seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a schedule on fresh scenarios.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, default_value_t = spmsp::DEFAULT_FINAL_SIMS)]
        sims: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) | ExperimentError::Schema { .. } => Failure::Config(e.to_string()),
            ExperimentError::Runtime(_) | ExperimentError::Io(_) => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<SpmspError> for Failure {
    fn from(e: SpmspError) -> Self {
        match e {
            SpmspError::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn generate(jobs: usize, relations: usize, machines: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    let inst = spmsp::generate_instance(jobs, relations, machines, seed)?;
    let path = if out.extension().is_some_and(|e| e == "inst") {
        out.to_path_buf()
    } else {
        std::fs::create_dir_all(out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
        out.join(format!("{}.inst", spmsp::instance_name(jobs, relations, machines)))
    };
    inst.save(&path)?;
    println!("{}", path.display());
    Ok(())
}

fn run(config: &Path, out: &Path, jobs: Option<usize>, seed: Option<u64>) -> Result<(), Failure> {
    let mut exp = Experiment::load(config)?;
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        exp.config.workers = Some(j);
    }
    if let Some(s) = seed {
        exp.config.seed = s;
    }
    let report = exp.run(out)?;
    eprintln!("{} runs written to {}", report.runs.len(), out.display());
    Ok(())
}

fn evaluate(instance: &Path, schedule: &Path, sims: usize, seed: u64) -> Result<(), Failure> {
    if sims == 0 {
        return Err(Failure::Config("--sims must be at least 1".into()));
    }
    let inst = SpmspInstance::load(instance)?;
    let sched = SpmspSchedule::load(&inst, schedule)?;
    let eval = spmsp::final_evaluate(&inst, &sched, sims, seed);
    println!("{}", serde_json::to_string(&eval).expect("evaluation serializes"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate { jobs, relations, machines, seed, out } => generate(*jobs, *relations, *machines, *seed, out),
        Command::Run { config, out, jobs, seed } => run(config, out, *jobs, *seed),
        Command::Evaluate { instance, schedule, sims, seed } => evaluate(instance, schedule, *sims, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
