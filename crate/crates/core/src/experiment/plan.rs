use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::bench::{self, registry, ProblemSpec};
use crate::engine::{default_budget, RunConfig};
use crate::strategy::Perturbation;

use super::ExperimentError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "ILSHADE_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "results";

/// Problem ids with this prefix are loaded from a data file.
pub const FILE_PROBLEM_PREFIX: &str = "file:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    IlshadeRsp,
    LshadeRsp,
    ClassicDe,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [
        AlgorithmKind::IlshadeRsp,
        AlgorithmKind::LshadeRsp,
        AlgorithmKind::ClassicDe,
    ];

    pub fn id(self) -> &'static str {
        match self {
            AlgorithmKind::IlshadeRsp => "ilshade-rsp",
            AlgorithmKind::LshadeRsp => "lshade-rsp",
            AlgorithmKind::ClassicDe => "de-rand-1-bin",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            AlgorithmKind::IlshadeRsp => {
                "LSHADE-RSP with Cauchy-perturbed target recombination at the jumping rate"
            }
            AlgorithmKind::LshadeRsp => "rank-based selective pressure L-SHADE, no target perturbation",
            AlgorithmKind::ClassicDe => "classic DE/rand/1/bin with fixed F, CR and population size",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AlgorithmKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| ExperimentError::UnknownAlgorithm(s.to_owned()))
    }
}

/// Optional replacements for [`RunConfig`] fields. `scale` and
/// `crossover_rate` only apply to the classic DE baseline.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub np_init: Option<usize>,
    pub np_fin: Option<usize>,
    pub jumping_rate: Option<f64>,
    pub rank_greediness: Option<f64>,
    pub memory_size: Option<usize>,
    pub archive_factor: Option<f64>,
    #[serde(default, deserialize_with = "de_perturbation")]
    pub perturbation: Option<Perturbation>,
    pub target_fev: Option<f64>,
    pub scale: Option<f64>,
    pub crossover_rate: Option<f64>,
}

fn de_perturbation<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Perturbation>, D::Error> {
    let text: Option<String> = Option::deserialize(d)?;
    text.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
}

impl Overrides {
    /// Fields set in `other` win.
    pub fn merged_with(&self, other: &Overrides) -> Overrides {
        Overrides {
            np_init: other.np_init.or(self.np_init),
            np_fin: other.np_fin.or(self.np_fin),
            jumping_rate: other.jumping_rate.or(self.jumping_rate),
            rank_greediness: other.rank_greediness.or(self.rank_greediness),
            memory_size: other.memory_size.or(self.memory_size),
            archive_factor: other.archive_factor.or(self.archive_factor),
            perturbation: other.perturbation.or(self.perturbation),
            target_fev: other.target_fev.or(self.target_fev),
            scale: other.scale.or(self.scale),
            crossover_rate: other.crossover_rate.or(self.crossover_rate),
        }
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.np_init {
            cfg.np_init = v;
        }
        if let Some(v) = self.np_fin {
            cfg.np_fin = v;
        }
        if let Some(v) = self.jumping_rate {
            cfg.jumping_rate = v;
        }
        if let Some(v) = self.rank_greediness {
            cfg.rank_greediness = v;
        }
        if let Some(v) = self.memory_size {
            cfg.memory_size = v;
        }
        if let Some(v) = self.archive_factor {
            cfg.archive_factor = v;
        }
        if let Some(v) = self.perturbation {
            cfg.perturbation = v;
        }
        if let Some(v) = self.target_fev {
            cfg.target_fev = Some(v);
        }
    }
}

/// Classic DE defaults: `F = 0.5`, `CR = 0.9`, `NP = 100`.
pub const CLASSIC_SCALE: f64 = 0.5;
pub const CLASSIC_CROSSOVER_RATE: f64 = 0.9;
pub const CLASSIC_POPULATION: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    /// Column label in outputs; defaults to the kind id.
    pub label: String,
    pub kind: AlgorithmKind,
    pub overrides: Overrides,
}

impl AlgorithmSpec {
    pub fn new(kind: AlgorithmKind) -> Self {
        Self {
            label: kind.id().to_owned(),
            kind,
            overrides: Overrides::default(),
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_overrides(mut self, overrides: Overrides) -> Self {
        self.overrides = overrides;
        self
    }

    /// Configuration for one run.
    pub fn run_config(&self, dimension: usize, budget: usize, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::new(dimension).with_budget(budget).with_seed(seed);
        if self.kind == AlgorithmKind::ClassicDe {
            cfg.np_init = CLASSIC_POPULATION;
        }
        if self.kind == AlgorithmKind::LshadeRsp {
            cfg.jumping_rate = 0.0;
        }
        self.overrides.apply(&mut cfg);
        cfg
    }

    pub fn classic_parameters(&self) -> (f64, f64) {
        (
            self.overrides.scale.unwrap_or(CLASSIC_SCALE),
            self.overrides.crossover_rate.unwrap_or(CLASSIC_CROSSOVER_RATE),
        )
    }
}

/// A grid of algorithms x problems x dimensions x seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub output: PathBuf,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Registry names or `file:<path>` data files.
    pub problems: Vec<String>,
    /// Ignored for file problems, which carry their own dimension.
    pub dimensions: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Evaluations per run; `None` means `10000 D`.
    pub budget: Option<usize>,
    /// Budget fractions in `(0, 1]`, strictly increasing.
    pub checkpoints: Vec<f64>,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

/// Every 1% of the budget.
pub fn default_checkpoints() -> Vec<f64> {
    (1..=100).map(|i| i as f64 / 100.0).collect()
}

/// `$ILSHADE_OUTPUT_DIR`, else `results`.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    plan: PlanSection,
    #[serde(default)]
    algorithm: Vec<toml::Table>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanSection {
    output: Option<PathBuf>,
    problems: Vec<String>,
    #[serde(default)]
    dimensions: Vec<usize>,
    seeds: Vec<u64>,
    budget: Option<usize>,
    checkpoints: Option<Vec<f64>>,
    workers: Option<usize>,
}

/// One (problem, dimension) pair of the grid with its resolved problem.
#[derive(Debug, Clone)]
pub struct Cell {
    pub problem_id: String,
    pub dimension: usize,
    pub problem: ProblemSpec,
}

impl ExperimentPlan {
    pub fn new(algorithms: Vec<AlgorithmSpec>, problems: Vec<String>, dimensions: Vec<usize>, seeds: Vec<u64>) -> Self {
        Self {
            output: default_output_dir(),
            algorithms,
            problems,
            dimensions,
            seeds,
            budget: None,
            checkpoints: default_checkpoints(),
            workers: None,
        }
    }

    /// Parses the plan format:
    ///
    /// ```toml
    /// [plan]
    /// output = "results"
    /// problems = ["sphere", "shifted-rotated-rastrigin", "file:data/p1.txt"]
    /// dimensions = [10, 30]
    /// seeds = [1, 2, 3]
    /// budget = 100000        # optional, default 10000 D
    ///
    /// [[algorithm]]
    /// kind = "ilshade-rsp"
    /// jumping_rate = 0.2
    ///
    /// [[algorithm]]
    /// name = "de"
    /// kind = "de-rand-1-bin"
    /// scale = 0.5
    /// ```
    ///
    /// Relative `file:` paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, ExperimentError> {
        let file: PlanFile = toml::from_str(text).map_err(|e| ExperimentError::Plan(e.to_string()))?;
        let mut algorithms = Vec::with_capacity(file.algorithm.len());
        for (i, mut table) in file.algorithm.into_iter().enumerate() {
            let plan_err = |msg: String| ExperimentError::Plan(format!("algorithm {}: {msg}", i + 1));
            let kind: AlgorithmKind = match table.remove("kind") {
                Some(toml::Value::String(k)) => k.parse()?,
                Some(_) => return Err(plan_err("`kind` must be a string".into())),
                None => return Err(plan_err("missing `kind`".into())),
            };
            let name = match table.remove("name") {
                Some(toml::Value::String(n)) => Some(n),
                Some(_) => return Err(plan_err("`name` must be a string".into())),
                None => None,
            };
            let overrides: Overrides = table.try_into().map_err(|e: toml::de::Error| plan_err(e.to_string()))?;
            let spec = AlgorithmSpec::new(kind).with_overrides(overrides);
            algorithms.push(match name {
                Some(n) => spec.labeled(n),
                None => spec,
            });
        }
        let problems = file
            .plan
            .problems
            .into_iter()
            .map(|p| match (p.strip_prefix(FILE_PROBLEM_PREFIX), base_dir) {
                (Some(path), Some(base)) if Path::new(path).is_relative() => {
                    format!("{FILE_PROBLEM_PREFIX}{}", base.join(path).display())
                }
                _ => p,
            })
            .collect();
        let plan = ExperimentPlan {
            output: file.plan.output.unwrap_or_else(default_output_dir),
            algorithms,
            problems,
            dimensions: file.plan.dimensions,
            seeds: file.plan.seeds,
            budget: file.plan.budget,
            checkpoints: file.plan.checkpoints.unwrap_or_else(default_checkpoints),
            workers: file.plan.workers,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.to_owned(),
            source: e,
        })?;
        Self::parse(&text, path.parent())
    }

    /// Structural checks that need no problem lookups.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |msg: String| Err(ExperimentError::Plan(msg));
        if self.algorithms.is_empty() {
            return fail("no algorithms".into());
        }
        let mut labels = HashSet::new();
        for a in &self.algorithms {
            if !labels.insert(a.label.as_str()) {
                return fail(format!("duplicate algorithm label {:?}", a.label));
            }
            if a.label.is_empty() || a.label.contains([',', '"', '\n']) {
                return fail(format!("algorithm label {:?} is not a plain name", a.label));
            }
        }
        if self.problems.is_empty() {
            return fail("no problems".into());
        }
        let needs_dims = self.problems.iter().any(|p| !p.starts_with(FILE_PROBLEM_PREFIX));
        if needs_dims && self.dimensions.is_empty() {
            return fail("no dimensions".into());
        }
        if self.dimensions.contains(&0) {
            return fail("dimensions must be positive".into());
        }
        if self.seeds.is_empty() {
            return fail("no seeds".into());
        }
        let distinct: HashSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return fail("seeds must be distinct".into());
        }
        if self.checkpoints.is_empty()
            || self.checkpoints.windows(2).any(|w| !(w[0] < w[1]))
            || self.checkpoints.iter().any(|&c| !(c > 0.0 && c <= 1.0))
        {
            return fail("checkpoints must be strictly increasing fractions in (0, 1]".into());
        }
        if self.workers == Some(0) {
            return fail("workers must be positive".into());
        }
        Ok(())
    }

    /// Budget for a given dimension.
    pub fn budget_for(&self, dimension: usize) -> usize {
        self.budget.unwrap_or_else(|| default_budget(dimension))
    }

    /// Resolves every problem and validates every run configuration, in
    /// plan order: problems outer, dimensions inner.
    pub fn cells(&self) -> Result<Vec<Cell>, ExperimentError> {
        self.validate()?;
        let mut cells = Vec::new();
        for id in &self.problems {
            if let Some(path) = id.strip_prefix(FILE_PROBLEM_PREFIX) {
                let problem = bench::load_problem_data(path).map_err(|e| ExperimentError::Problem {
                    id: id.clone(),
                    source: e,
                })?;
                cells.push(Cell {
                    problem_id: problem.name.clone(),
                    dimension: problem.dimension(),
                    problem,
                });
                continue;
            }
            for &d in &self.dimensions {
                let problem = registry::problem(id, d).map_err(|e| ExperimentError::Problem {
                    id: id.clone(),
                    source: e,
                })?;
                cells.push(Cell {
                    problem_id: id.clone(),
                    dimension: d,
                    problem,
                });
            }
        }
        for cell in &cells {
            for a in &self.algorithms {
                let cfg = a.run_config(cell.dimension, self.budget_for(cell.dimension), self.seeds[0]);
                cfg.validate().map_err(|e| ExperimentError::Plan(format!("{}: {e}", a.label)))?;
                if a.kind == AlgorithmKind::ClassicDe {
                    let (f, cr) = a.classic_parameters();
                    if !(f > 0.0 && f <= 1.0) || !(0.0..=1.0).contains(&cr) {
                        return Err(ExperimentError::Plan(format!(
                            "{}: F = {f} or CR = {cr} out of range",
                            a.label
                        )));
                    }
                }
            }
        }
        Ok(cells)
    }
}
