use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SpmspError;

pub const INSTANCE_FORMAT: &str = "stochsa-spmsp-instance";
pub const GENERATOR_NAME: &str = "stochsa-uniform";
pub const GENERATOR_VERSION: u32 = 1;
pub const DEFAULT_SIGMA_FACTOR: f64 = 0.4;

const MEAN_RANGE: (f64, f64) = (10.0, 50.0);
const RELEASE_SPAN: f64 = 0.25;
const DEADLINE_SLACK: f64 = 1.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub mean: f64,
    pub release: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorInfo {
    pub name: String,
    pub version: u32,
    pub jobs: usize,
    pub relations: usize,
    pub machines: usize,
    pub seed: u64,
}

/// Parallel machine instance with precedence relations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct SpmspInstance {
    jobs: Vec<Job>,
    precedence: Vec<(usize, usize)>,
    machines: usize,
    deadline: f64,
    sigma_factor: f64,
    generator: Option<GeneratorInfo>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format: String,
    jobs: Vec<Job>,
    precedence: Vec<(usize, usize)>,
    machines: usize,
    deadline: f64,
    sigma_factor: f64,
    #[serde(default)]
    generator: Option<GeneratorInfo>,
}

impl TryFrom<InstanceFile> for SpmspInstance {
    type Error = SpmspError;

    fn try_from(f: InstanceFile) -> Result<Self, SpmspError> {
        if f.format != INSTANCE_FORMAT {
            return Err(SpmspError::Invalid(format!("unknown instance format {:?}", f.format)));
        }
        let mut inst = SpmspInstance::new(f.jobs, f.precedence, f.machines, f.deadline, f.sigma_factor)?;
        inst.generator = f.generator;
        Ok(inst)
    }
}

impl From<SpmspInstance> for InstanceFile {
    fn from(i: SpmspInstance) -> Self {
        InstanceFile {
            format: INSTANCE_FORMAT.to_string(),
            jobs: i.jobs,
            precedence: i.precedence,
            machines: i.machines,
            deadline: i.deadline,
            sigma_factor: i.sigma_factor,
            generator: i.generator,
        }
    }
}

impl SpmspInstance {
    pub fn new(
        jobs: Vec<Job>,
        precedence: Vec<(usize, usize)>,
        machines: usize,
        deadline: f64,
        sigma_factor: f64,
    ) -> Result<Self, SpmspError> {
        let invalid = |msg: String| Err(SpmspError::Invalid(msg));
        let n = jobs.len();
        if n == 0 {
            return invalid("instance has no jobs".into());
        }
        if machines == 0 {
            return invalid("instance needs at least one machine".into());
        }
        for (i, j) in jobs.iter().enumerate() {
            if !(j.mean >= 0.0 && j.mean.is_finite()) {
                return invalid(format!("job {i}: mean must be finite and non-negative"));
            }
            if !(j.release >= 0.0 && j.release.is_finite()) {
                return invalid(format!("job {i}: release date must be finite and non-negative"));
            }
        }
        if !(sigma_factor >= 0.0 && sigma_factor.is_finite()) {
            return invalid("sigma_factor must be finite and non-negative".into());
        }
        let max_release = jobs.iter().map(|j| j.release).fold(0.0, f64::max);
        if !(deadline > max_release) {
            return invalid(format!("deadline {deadline} must exceed the latest release date {max_release}"));
        }
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in &precedence {
            if a >= n || b >= n || a == b {
                return invalid(format!("bad precedence edge ({a}, {b})"));
            }
            if succs[a].contains(&b) {
                return invalid(format!("duplicate precedence edge ({a}, {b})"));
            }
            succs[a].push(b);
            preds[b].push(a);
        }
        let inst = Self { jobs, precedence, machines, deadline, sigma_factor, generator: None, preds, succs };
        if inst.topological_order(&[]).is_none() {
            return invalid("precedence graph has a cycle".into());
        }
        Ok(inst)
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn precedence(&self) -> &[(usize, usize)] {
        &self.precedence
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn sigma_factor(&self) -> f64 {
        self.sigma_factor
    }

    pub fn generator(&self) -> Option<&GeneratorInfo> {
        self.generator.as_ref()
    }

    pub fn predecessors(&self, job: usize) -> &[usize] {
        &self.preds[job]
    }

    pub fn successors(&self, job: usize) -> &[usize] {
        &self.succs[job]
    }

    /// Same instance with a different noise level.
    pub fn with_sigma_factor(mut self, sigma_factor: f64) -> Result<Self, SpmspError> {
        if !(sigma_factor >= 0.0 && sigma_factor.is_finite()) {
            return Err(SpmspError::Invalid("sigma_factor must be finite and non-negative".into()));
        }
        self.sigma_factor = sigma_factor;
        Ok(self)
    }

    pub fn stdev(&self, job: usize) -> f64 {
        self.sigma_factor * self.jobs[job].mean
    }

    /// Kahn order of the precedence graph plus the `extra` edges, or `None`
    /// if the union has a cycle. Ready jobs are taken smallest index first.
    pub(crate) fn topological_order(&self, extra: &[(usize, usize)]) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        let mut extra_out = vec![Vec::new(); n];
        for &(a, b) in extra {
            extra_out[a].push(b);
            indeg[b] += 1;
        }
        for (d, p) in indeg.iter_mut().zip(&self.preds) {
            *d += p.len();
        }
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
            (0..n).filter(|&j| indeg[j] == 0).map(std::cmp::Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(j)) = ready.pop() {
            order.push(j);
            for &k in self.succs[j].iter().chain(&extra_out[j]) {
                indeg[k] -= 1;
                if indeg[k] == 0 {
                    ready.push(std::cmp::Reverse(k));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SpmspError> {
        serde_json::from_str(text).map_err(|e| SpmspError::Invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SpmspError> {
        let text = std::fs::read_to_string(path).map_err(|e| SpmspError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), SpmspError> {
        std::fs::write(path, self.to_json()).map_err(|e| SpmspError::Io(format!("{}: {e}", path.display())))
    }
}

/// `"100j-250r-12m"` for `(100, 250, 12)`.
pub fn instance_name(jobs: usize, relations: usize, machines: usize) -> String {
    format!("{jobs}j-{relations}r-{machines}m")
}

/// Inverse of [`instance_name`]; accepts an optional `.inst` suffix.
pub fn parse_instance_name(name: &str) -> Option<(usize, usize, usize)> {
    let name = name.strip_suffix(".inst").unwrap_or(name);
    let mut parts = name.split('-');
    let j = parts.next()?.strip_suffix('j')?.parse().ok()?;
    let r = parts.next()?.strip_suffix('r')?.parse().ok()?;
    let m = parts.next()?.strip_suffix('m')?.parse().ok()?;
    parts.next().is_none().then_some((j, r, m))
}

/// Random instance with `jobs` jobs, exactly `relations` precedence edges
/// and `machines` machines. Deterministic per seed.
pub fn generate_instance(jobs: usize, relations: usize, machines: usize, seed: u64) -> Result<SpmspInstance, SpmspError> {
    if jobs == 0 || machines == 0 {
        return Err(SpmspError::Invalid("need at least one job and one machine".into()));
    }
    let max_edges = jobs * (jobs - 1) / 2;
    if relations > max_edges {
        return Err(SpmspError::Invalid(format!(
            "{relations} precedence relations requested but an acyclic graph on {jobs} jobs has at most {max_edges}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..jobs).map(|_| rng.random_range(MEAN_RANGE.0..=MEAN_RANGE.1)).collect();
    let horizon = means.iter().sum::<f64>() / machines as f64;
    let job_list: Vec<Job> = means
        .iter()
        .map(|&mean| Job { mean, release: rng.random_range(0.0..=RELEASE_SPAN * horizon) })
        .collect();

    // Edges go forward in a hidden random order, so the graph is acyclic.
    let mut order: Vec<usize> = (0..jobs).collect();
    order.shuffle(&mut rng);
    let mut precedence: Vec<(usize, usize)> = index::sample(&mut rng, max_edges.max(1), relations)
        .into_iter()
        .map(|k| {
            let (a, b) = unrank_pair(k, jobs);
            (order[a], order[b])
        })
        .collect();
    precedence.sort_unstable();

    // Provisional deadline so the greedy schedule can be built, then the real one.
    let provisional = SpmspInstance::new(job_list.clone(), precedence.clone(), machines, f64::MAX, DEFAULT_SIGMA_FACTOR)?;
    let makespan = super::schedule::SpmspSchedule::greedy(&provisional).expected_makespan(&provisional);
    let mut inst = SpmspInstance::new(job_list, precedence, machines, DEADLINE_SLACK * makespan, DEFAULT_SIGMA_FACTOR)?;
    inst.generator = Some(GeneratorInfo {
        name: GENERATOR_NAME.to_string(),
        version: GENERATOR_VERSION,
        jobs,
        relations,
        machines,
        seed,
    });
    Ok(inst)
}

/// Maps `k` in `0..n(n-1)/2` to the `k`-th pair `(a, b)` with `a < b`.
fn unrank_pair(mut k: usize, n: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = n - 1 - a;
        if k < row {
            return (a, a + 1 + k);
        }
        k -= row;
        a += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unrank_covers_all_pairs() {
        let n = 6;
        let pairs: Vec<_> = (0..n * (n - 1) / 2).map(|k| unrank_pair(k, n)).collect();
        let mut expected = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                expected.push((a, b));
            }
        }
        assert_eq!(pairs, expected);
    }

    #[test]
    fn names_round_trip() {
        assert_eq!(parse_instance_name("100j-250r-12m"), Some((100, 250, 12)));
        assert_eq!(parse_instance_name("20j-30r-4m.inst"), Some((20, 30, 4)));
        assert_eq!(parse_instance_name("20j-30r"), None);
        assert_eq!(parse_instance_name("20j-30r-4m-x"), None);
        assert_eq!(instance_name(100, 250, 12), "100j-250r-12m");
    }

    #[test]
    fn generated_instances_are_valid() {
        for (j, r, m, seed) in [(1, 0, 1, 3), (20, 30, 4, 1), (30, 435, 3, 2), (100, 250, 12, 7)] {
            let inst = generate_instance(j, r, m, seed).unwrap();
            assert_eq!(inst.len(), j);
            assert_eq!(inst.precedence().len(), r);
            assert_eq!(inst.machines(), m);
            assert!(inst.topological_order(&[]).is_some());
            for job in inst.jobs() {
                assert!((10.0..=50.0).contains(&job.mean));
                assert!(job.release >= 0.0);
            }
            assert!(inst.deadline() > inst.jobs().iter().map(|j| j.release).fold(0.0, f64::max));
            assert_eq!(inst.generator().unwrap().seed, seed);
            assert_eq!(inst.sigma_factor(), 0.4);
        }
    }

    #[test]
    fn too_many_relations_rejected() {
        assert!(generate_instance(5, 10, 2, 0).is_ok());
        assert!(matches!(generate_instance(5, 11, 2, 0), Err(SpmspError::Invalid(_))));
        assert!(generate_instance(5, 20, 2, 0).is_err());
        assert!(generate_instance(0, 0, 1, 0).is_err());
        assert!(generate_instance(3, 0, 0, 0).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let inst = generate_instance(12, 15, 3, 5).unwrap();
        let text = inst.to_json();
        assert_eq!(SpmspInstance::from_json(&text).unwrap(), inst);
        assert_eq!(generate_instance(12, 15, 3, 5).unwrap().to_json(), text);

        let cyclic = r#"{"format":"stochsa-spmsp-instance","jobs":[{"mean":1,"release":0},{"mean":1,"release":0}],
            "precedence":[[0,1],[1,0]],"machines":1,"deadline":10,"sigma_factor":0.4}"#;
        assert!(SpmspInstance::from_json(cyclic).unwrap_err().to_string().contains("cycle"));
        let late = r#"{"format":"stochsa-spmsp-instance","jobs":[{"mean":1,"release":20}],
            "precedence":[],"machines":1,"deadline":10,"sigma_factor":0.4}"#;
        assert!(SpmspInstance::from_json(late).is_err());
        let unknown = r#"{"format":"stochsa-spmsp-instance","jobs":[{"mean":1,"release":0}],
            "precedence":[],"machines":1,"deadline":10,"sigma_factor":0.4,"colour":1}"#;
        assert!(SpmspInstance::from_json(unknown).is_err());
    }
}
