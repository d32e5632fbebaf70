use std::fs;
use std::path::Path;

use stochsa::experiment::{self, presets, Experiment, ExperimentConfig, ExperimentError, ProblemKind};

const TOY: &str = r#"
runs = 2
seed = 40
audit_sims = 50
final_sims = 500

[problem]
kind = "toymin"
jobs = [
    { mean = 4.0, stdev = 1.5, due = 6.0 },
    { mean = 3.0, stdev = 1.0, due = 5.0 },
    { mean = 6.0, stdev = 2.5, due = 14.0 },
    { mean = 2.0, stdev = 0.5, due = 9.0 },
    { mean = 5.0, stdev = 2.0, due = 20.0 },
]

[sa]
t_init = 10.0
alpha_cool = 0.5
q = 40
t_stop = 0.5

[[methods]]
name = "Const20"
[[methods]]
name = "TTest0"
[[methods]]
name = "Custom"
policy = { variant = "IzD", n0 = 10, delta = 5, n_max = 60, alpha_conf = 0.1 }
"#;

fn run_toy(text: &str, workers: usize) -> (tempfile::TempDir, experiment::ExperimentReport) {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::from_toml(text).unwrap();
    config.workers = Some(workers);
    let exp = Experiment::new(config, dir.path()).unwrap();
    let report = exp.run(dir.path()).unwrap();
    (dir, report)
}

fn without_wall_time(dir: &Path) -> Vec<String> {
    let rows = experiment::read_summary(&dir.join(experiment::SUMMARY_FILE)).unwrap();
    rows.iter().map(|r| format!("{} {} {} {} {}", r.method, r.run, r.seed, r.final_score, r.total_sims)).collect()
}

#[test]
fn toy_run_writes_every_output() {
    let (dir, report) = run_toy(TOY, 2);
    let d = dir.path();
    for f in [
        experiment::SUMMARY_FILE,
        experiment::HISTOGRAM_FILE,
        experiment::CONVERGENCE_FILE,
        experiment::RESOLVED_CONFIG_FILE,
    ] {
        assert!(d.join(f).is_file(), "{f} missing");
    }
    let summary = experiment::read_summary(&d.join(experiment::SUMMARY_FILE)).unwrap();
    assert_eq!(summary.len(), 2 * 3);
    let names: Vec<_> = summary.iter().map(|r| (r.method.as_str(), r.run, r.seed)).collect();
    assert_eq!(
        names,
        [("Const20", 0, 40), ("Const20", 1, 41), ("TTest0", 0, 40), ("TTest0", 1, 41), ("Custom", 0, 40), ("Custom", 1, 41)]
    );

    let hist = experiment::read_histogram(&d.join(experiment::HISTOGRAM_FILE)).unwrap();
    for m in ["Const20", "TTest0", "Custom"] {
        let total: u64 = hist.iter().filter(|h| h.method == m).map(|h| h.frequency).sum();
        let iters: u64 = report.runs.iter().filter(|r| r.method == m).map(|r| r.iterations).sum();
        assert_eq!(total, iters);
    }
    assert!(hist.iter().filter(|h| h.method == "Const20").all(|h| h.sims_per_iteration == 20));

    let conv = experiment::read_convergence(&d.join(experiment::CONVERGENCE_FILE)).unwrap();
    assert!(!conv.is_empty());
    assert!(conv.iter().all(|c| c.audited_best_score >= 0.0));
    assert!(report.budget_violations().is_empty());
    for r in &summary {
        assert!(d.join(experiment::BEST_DIR).join(format!("{}-run{}.json", r.method, r.run)).is_file());
    }
}

#[test]
fn replays_match_except_wall_time() {
    let (a, _) = run_toy(TOY, 1);
    let (b, _) = run_toy(TOY, 3);
    assert_eq!(without_wall_time(a.path()), without_wall_time(b.path()));
    for f in [experiment::HISTOGRAM_FILE, experiment::CONVERGENCE_FILE, experiment::RESOLVED_CONFIG_FILE] {
        let (x, y) = (fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        if f == experiment::RESOLVED_CONFIG_FILE {
            // Only the worker count differs.
            let strip = |v: Vec<u8>| String::from_utf8(v).unwrap().lines().filter(|l| !l.starts_with("workers")).collect::<Vec<_>>().join("\n");
            assert_eq!(strip(x), strip(y));
        } else {
            assert_eq!(x, y, "{f} differs");
        }
    }
}

#[test]
fn resolved_config_round_trips() {
    let (dir, _) = run_toy(TOY, 1);
    let text = fs::read_to_string(dir.path().join(experiment::RESOLVED_CONFIG_FILE)).unwrap();
    let echoed = ExperimentConfig::from_toml(&text).unwrap();
    let original = ExperimentConfig::from_toml(TOY).unwrap();
    let mut expected = original.resolved().unwrap();
    expected.workers = Some(1);
    assert_eq!(echoed, expected);
    assert!(echoed.methods.iter().all(|m| m.policy.is_some()));
}

#[test]
fn defaults_fill_in() {
    let config = ExperimentConfig::from_toml(
        r#"
[problem]
kind = "toymin"
jobs = [{ mean = 1.0, stdev = 0.0, due = 1.0 }]
"#,
    )
    .unwrap()
    .resolved()
    .unwrap();
    assert_eq!(config.runs, 25);
    assert_eq!(config.audit_sims, 1000);
    assert_eq!(config.final_sims, 10_000);
    assert_eq!(config.sa, Some(stochsa::sa::SaParams::toymin_default()));
    let names: Vec<_> = config.methods.iter().map(|m| m.name.as_str()).collect();
    assert_eq!(
        names,
        ["Const20", "Const50", "Const200", "ConstNoCrn200", "OCBA", "IZ0", "IZD", "TTest0", "TTestD", "DoubleTTest"]
    );
}

#[test]
fn presets_carry_tuned_parameters() {
    use stochsa::policy::Variant;
    let spmsp = presets(ProblemKind::Spmsp);
    let row = |name: &str| spmsp.iter().find(|(n, _)| *n == name).unwrap().1.clone();
    assert_eq!(row("Const100").n_max, 100);
    assert_eq!(row("ConstNoCrn400").variant, Variant::ConstNoCrn);
    let o = row("OCBA");
    assert_eq!((o.n0, o.delta, o.n_max, o.alpha_conf), (80, 10, 400, None));
    let iz = row("IZD");
    assert_eq!((iz.variant, iz.n0, iz.delta, iz.n_max, iz.alpha_conf), (Variant::IzD, 80, 10, 400, Some(0.2)));
    let d = row("DoubleTTest");
    assert_eq!((d.n0, d.delta, d.n_max, d.alpha_conf), (80, 20, 400, Some(0.2)));

    let toy = presets(ProblemKind::Toymin);
    let row = |name: &str| toy.iter().find(|(n, _)| *n == name).unwrap().1.clone();
    let o = row("OCBA");
    assert_eq!((o.n0, o.delta, o.n_max), (20, 5, 200));
    let iz = row("IZ0");
    assert_eq!((iz.n0, iz.delta, iz.n_max, iz.alpha_conf), (10, 10, 200, Some(0.1)));
    let t = row("TTestD");
    assert_eq!((t.n0, t.delta, t.n_max, t.alpha_conf), (10, 10, 200, Some(0.2)));
}

fn config_error(text: &str) -> String {
    let parsed = ExperimentConfig::from_toml(text).and_then(|c| Experiment::new(c, Path::new(".")));
    match parsed {
        Err(ExperimentError::Config(msg)) => msg,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn bad_configs_rejected() {
    let toy = "[problem]\nkind = \"toymin\"\njobs = [{ mean = 1.0, stdev = 0.0, due = 1.0 }]\n";
    assert!(config_error(&format!("runs = 0\n{toy}")).contains("runs"));
    assert!(config_error(&format!("{toy}[[methods]]\nname = \"A\"\n")).contains("preset"));
    assert!(config_error(&format!("{toy}[[methods]]\nname = \"IZ0\"\n[[methods]]\nname = \"IZ0\"\n")).contains("duplicate"));
    assert!(config_error(&format!("colour = 1\n{toy}")).contains("colour"));
    config_error(&format!("{toy}[[methods]]\nname = \"X\"\npolicy = {{ variant = \"Iz\", n_max = 100 }}\n"));
    config_error(&format!("{toy}[sa]\nt_init = 1.0\nalpha_cool = 0.5\nq = 1\nt_stop = 2.0\n"));
    config_error("[problem]\nkind = \"spmsp\"\n");
    config_error("[problem]\nkind = \"spmsp\"\ninstance = \"missing.inst\"\n");
    config_error("[problem]\nkind = \"toymin\"\njobs = [{ mean = 1.0, stdev = -1.0, due = 1.0 }]\n");
}

#[test]
fn schema_check_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.csv");
    fs::write(&path, "method,run,seed,wall_time_s,score,total_sims\nA,0,1,0.1,0.5,10\n").unwrap();
    match experiment::read_summary(&path) {
        Err(ExperimentError::Schema { message, .. }) => assert!(message.contains("final_score")),
        other => panic!("{other:?}"),
    }
    fs::write(&path, "method,sims_per_iteration,frequency\nA,x,1\n").unwrap();
    assert!(matches!(experiment::read_histogram(&path), Err(ExperimentError::Schema { .. })));
}

#[test]
fn spmsp_experiment_exports_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let inst = stochsa::spmsp::generate_instance(8, 6, 2, 3).unwrap();
    inst.save(&dir.path().join("tiny.inst")).unwrap();
    let text = r#"
runs = 1
audit_sims = 20
final_sims = 200
[problem]
kind = "spmsp"
instance = "tiny.inst"
weight_sims = 10
[sa]
t_init = 0.01
alpha_cool = 0.5
q = 50
t_stop = 0.001
[[methods]]
name = "Const100"
[[methods]]
name = "DoubleTTest"
"#;
    let exp = Experiment::new(ExperimentConfig::from_toml(text).unwrap(), dir.path()).unwrap();
    let out = dir.path().join("out");
    let report = exp.run(&out).unwrap();
    assert_eq!(report.runs.len(), 2);
    let copy = stochsa::spmsp::SpmspInstance::load(&out.join(experiment::INSTANCE_COPY_FILE)).unwrap();
    assert_eq!(copy, inst);
    let best = stochsa::spmsp::SpmspSchedule::load(&inst, &out.join("best").join("Const100-run0.json")).unwrap();
    let eval = stochsa::spmsp::final_evaluate(&inst, &best, 200, exp.run_seed(0));
    let summary = experiment::read_summary(&out.join(experiment::SUMMARY_FILE)).unwrap();
    assert!((summary[0].final_score - eval.robustness).abs() < 1e-12);
}
