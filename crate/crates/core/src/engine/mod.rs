//! Optimizer drivers and the run bookkeeping they share.

mod classic;
mod ilshade;

pub use classic::run_classic_de;
pub use ilshade::{run_ilshade_rsp, run_lshade_rsp, GenerationReport, IlshadeRsp, TrialRecord};

use thiserror::Error;

use crate::adapt::AdaptError;
use crate::model::ModelError;
use crate::strategy::{Perturbation, StrategyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Adapt(#[from] AdaptError),
}

/// Smallest population LPSR shrinks to.
pub const NP_FINAL: usize = 4;

/// `round(sqrt(D) ln(D) 25)`, floored at [`NP_FINAL`].
pub fn default_np_init(dimension: usize) -> usize {
    let d = dimension as f64;
    ((d.sqrt() * d.ln() * 25.0).round() as usize).max(NP_FINAL)
}

/// Evaluation budget `10000 D`.
pub fn default_budget(dimension: usize) -> usize {
    10_000 * dimension
}

/// Linear population size reduction:
/// `round(np_init - nfe / nfe_max (np_init - np_fin))`.
pub fn lpsr_next_size(np_init: usize, np_fin: usize, nfe: usize, nfe_max: usize) -> usize {
    let progress = (nfe.min(nfe_max) as f64) / nfe_max as f64;
    let size = np_init as f64 - progress * (np_init as f64 - np_fin as f64);
    size.round() as usize
}

/// Function error value `best_f - optimum`.
pub fn compute_fev(best_f: f64, optimum: f64) -> f64 {
    best_f - optimum
}

/// Settings of one run. Defaults follow LSHADE-RSP with jumping rate 0.2.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dimension: usize,
    pub np_init: usize,
    pub np_fin: usize,
    pub nfe_max: usize,
    /// Probability that a trial is built by the perturbed recombination.
    pub jumping_rate: f64,
    pub rank_greediness: f64,
    pub memory_size: usize,
    /// Archive capacity as a multiple of the current population size.
    pub archive_factor: f64,
    pub perturbation: Perturbation,
    /// Stop early once the best FEV is at or below this value.
    pub target_fev: Option<f64>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            np_init: default_np_init(dimension),
            np_fin: NP_FINAL,
            nfe_max: default_budget(dimension),
            jumping_rate: 0.2,
            rank_greediness: 3.0,
            memory_size: 5,
            archive_factor: 1.0,
            perturbation: Perturbation::cauchy(),
            target_fev: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, nfe_max: usize) -> Self {
        self.nfe_max = nfe_max;
        self
    }

    pub fn with_np_init(mut self, np_init: usize) -> Self {
        self.np_init = np_init;
        self
    }

    pub fn with_jumping_rate(mut self, rate: f64) -> Self {
        self.jumping_rate = rate;
        self
    }

    pub fn with_perturbation(mut self, perturbation: Perturbation) -> Self {
        self.perturbation = perturbation;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |msg: String| Err(EngineError::Config(msg));
        if self.dimension == 0 {
            return fail("dimension must be positive".into());
        }
        if self.np_fin < NP_FINAL {
            return fail(format!("np_fin must be at least {NP_FINAL}, got {}", self.np_fin));
        }
        if self.np_init < self.np_fin {
            return fail(format!(
                "np_init {} is below np_fin {}",
                self.np_init, self.np_fin
            ));
        }
        if self.nfe_max < self.np_init {
            return fail(format!(
                "budget {} is smaller than the initial population {}",
                self.nfe_max, self.np_init
            ));
        }
        if !(0.0..=1.0).contains(&self.jumping_rate) {
            return fail(format!("jumping rate {} outside [0, 1]", self.jumping_rate));
        }
        if !(self.rank_greediness > 0.0 && self.rank_greediness.is_finite()) {
            return fail(format!("rank greediness {} must be positive", self.rank_greediness));
        }
        if self.memory_size < 2 {
            return fail(format!("memory size {} must be at least 2", self.memory_size));
        }
        if !(self.archive_factor >= 0.0 && self.archive_factor.is_finite()) {
            return fail(format!("archive factor {} must be nonnegative", self.archive_factor));
        }
        Ok(())
    }
}

/// Best FEV after a given number of evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub nfe: usize,
    pub best_fev: f64,
    pub population: usize,
    pub archive: usize,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: String,
    pub best_f: f64,
    pub best_x: Vec<f64>,
    /// `best_f - optimum`, or `best_f` itself when the optimum is unknown.
    pub fev: f64,
    pub fev_is_absolute: bool,
    pub nfe_used: usize,
    pub generations: usize,
    /// One point after initialization, then one per generation.
    pub trace: Vec<TracePoint>,
    /// Trials built by the perturbed recombination.
    pub perturbed_trials: u64,
    pub seed: u64,
    pub config: RunConfig,
}

impl RunRecord {
    /// Equality of everything the optimizer produced, ignoring the label.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        self.best_f.to_bits() == other.best_f.to_bits()
            && self.best_x.len() == other.best_x.len()
            && self
                .best_x
                .iter()
                .zip(&other.best_x)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self.fev.to_bits() == other.fev.to_bits()
            && self.nfe_used == other.nfe_used
            && self.generations == other.generations
            && self.trace == other.trace
            && self.perturbed_trials == other.perturbed_trials
    }
}

pub(crate) fn fev_of(best_f: f64, optimum: Option<f64>) -> f64 {
    match optimum {
        Some(o) => compute_fev(best_f, o),
        None => best_f,
    }
}
