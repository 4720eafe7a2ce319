use crate::adapt::{ControlParams, HistoricalMemory, SuccessSet};
use crate::model::{evaluate_checked, initialize_population, repair_bounds, ObjectiveFunction, Population};
use crate::rng::RngStream;
use crate::strategy::{recombine, MutationContext, RankSelector};

use super::{fev_of, lpsr_next_size, EngineError, RunConfig, RunRecord, TracePoint};

/// One trial vector built during a generation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Repaired trial vector.
    pub x: Vec<f64>,
    /// Objective value, absent when the budget ran out before evaluation.
    pub f: Option<f64>,
    pub params: ControlParams,
    pub perturbed: bool,
}

/// What happened during one call to [`IlshadeRsp::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    pub trials: Vec<TrialRecord>,
    pub success: SuccessSet,
    pub evaluations: usize,
}

/// iLSHADE-RSP run state.
///
/// A generation proceeds as follows:
///
/// 1. The population is sorted best-first (stable).
/// 2. For each member `i`, in order: (F, CR) from the historical memory,
///    the jumping-rate gate uniform `u`, then the trial from the
///    recombination operator. The perturbed operator is used when
///    `u < jumping_rate`. Trials are repaired toward their parent.
/// 3. Trials are evaluated in order while budget remains. A trial at least
///    as good as its parent replaces it and the parent enters the archive;
///    strict improvements feed the success set.
/// 4. The population shrinks to the LPSR size by dropping the worst, the
///    archive shrinks to capacity by removing uniformly chosen slots
///    (`swap_remove`), and the memory is updated.
pub struct IlshadeRsp<'o, O: ?Sized> {
    cfg: RunConfig,
    obj: &'o O,
    label: &'static str,
    allow_perturbation: bool,
    population: Population,
    memory: HistoricalMemory,
    perturbed_trials: u64,
    trace: Vec<TracePoint>,
}

impl<'o, O: ObjectiveFunction + ?Sized> IlshadeRsp<'o, O> {
    /// Validates the configuration and draws the initial population.
    pub fn new<R: RngStream + ?Sized>(cfg: RunConfig, obj: &'o O, rng: &mut R) -> Result<Self, EngineError> {
        Self::build(cfg, obj, rng, "ilshade-rsp", true)
    }

    /// The predecessor LSHADE-RSP: identical except that the perturbed
    /// recombination is never selected. The gate uniform is still drawn so
    /// that streams stay aligned with iLSHADE-RSP at jumping rate zero.
    pub fn lshade_rsp<R: RngStream + ?Sized>(cfg: RunConfig, obj: &'o O, rng: &mut R) -> Result<Self, EngineError> {
        Self::build(cfg, obj, rng, "lshade-rsp", false)
    }

    fn build<R: RngStream + ?Sized>(
        cfg: RunConfig,
        obj: &'o O,
        rng: &mut R,
        label: &'static str,
        allow_perturbation: bool,
    ) -> Result<Self, EngineError> {
        cfg.validate()?;
        let memory = HistoricalMemory::new(cfg.memory_size)?;
        let population = initialize_population(cfg.np_init, cfg.dimension, cfg.nfe_max, obj, rng)?;
        let mut state = Self {
            cfg,
            obj,
            label,
            allow_perturbation,
            population,
            memory,
            perturbed_trials: 0,
            trace: Vec::new(),
        };
        state.record_trace();
        Ok(state)
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn memory(&self) -> &HistoricalMemory {
        &self.memory
    }

    pub fn perturbed_trials(&self) -> u64 {
        self.perturbed_trials
    }

    pub fn trace(&self) -> &[TracePoint] {
        &self.trace
    }

    pub fn best_fev(&self) -> f64 {
        fev_of(self.population.best().f, self.obj.optimum_value())
    }

    pub fn is_finished(&self) -> bool {
        self.population.nfe >= self.population.nfe_max
            || self.cfg.target_fev.is_some_and(|t| self.best_fev() <= t)
    }

    /// Runs one generation.
    pub fn step<R: RngStream + ?Sized>(&mut self, rng: &mut R) -> Result<GenerationReport, EngineError> {
        let nfe = self.population.nfe;
        let nfe_max = self.population.nfe_max;
        self.population.sort_best_first();
        let np = self.population.len();
        let selector = RankSelector::new(np, self.cfg.rank_greediness);

        let mut trials = Vec::with_capacity(np);
        {
            let ctx = MutationContext::new(
                &self.population.members,
                &self.population.archive,
                &selector,
                nfe,
                nfe_max,
            );
            for i in 0..np {
                let params = self.memory.assign_parameters(nfe, nfe_max, rng);
                let gate = rng.uniform();
                let perturbed = self.allow_perturbation && gate < self.cfg.jumping_rate;
                let perturbation = perturbed.then_some(&self.cfg.perturbation);
                let mut x = recombine(i, &ctx, params.scale, params.crossover_rate, perturbation, rng)?;
                repair_bounds(&mut x, &ctx.members[i].x, self.obj.bounds());
                trials.push(TrialRecord {
                    x,
                    f: None,
                    params,
                    perturbed,
                });
            }
        }
        self.perturbed_trials += trials.iter().filter(|t| t.perturbed).count() as u64;

        let mut success = SuccessSet::new();
        let mut evaluations = 0;
        for (i, trial) in trials.iter_mut().enumerate() {
            if self.population.nfe >= nfe_max {
                break;
            }
            let f = evaluate_checked(self.obj, &trial.x)?;
            self.population.nfe += 1;
            evaluations += 1;
            trial.f = Some(f);
            let parent = &mut self.population.members[i];
            if f <= parent.f {
                success.push(trial.params.scale, trial.params.crossover_rate, parent.f - f);
                let mut child = parent.clone();
                child.x.clone_from(&trial.x);
                child.f = f;
                child.scale = trial.params.scale;
                child.crossover_rate = trial.params.crossover_rate;
                let old = std::mem::replace(parent, child);
                self.population.archive.push(old);
            }
        }
        self.population.generation += 1;

        let next = lpsr_next_size(self.cfg.np_init, self.cfg.np_fin, self.population.nfe, nfe_max);
        if next < self.population.len() {
            self.population.sort_best_first();
            self.population.members.truncate(next);
        }
        let capacity = (self.cfg.archive_factor * self.population.len() as f64).round() as usize;
        while self.population.archive.len() > capacity {
            let k = rng.index(self.population.archive.len());
            self.population.archive.swap_remove(k);
        }
        self.memory.update(&success);
        self.record_trace();

        Ok(GenerationReport {
            trials,
            success,
            evaluations,
        })
    }

    fn record_trace(&mut self) {
        let point = TracePoint {
            nfe: self.population.nfe,
            best_fev: self.best_fev(),
            population: self.population.len(),
            archive: self.population.archive.len(),
        };
        self.trace.push(point);
    }

    pub fn into_record(self) -> RunRecord {
        let best = self.population.best().clone();
        let optimum = self.obj.optimum_value();
        RunRecord {
            algorithm: self.label.to_owned(),
            best_f: best.f,
            fev: fev_of(best.f, optimum),
            fev_is_absolute: optimum.is_none(),
            best_x: best.x,
            nfe_used: self.population.nfe,
            generations: self.population.generation,
            trace: self.trace,
            perturbed_trials: self.perturbed_trials,
            seed: self.cfg.seed,
            config: self.cfg,
        }
    }

    /// Steps until the budget is spent or the target is reached.
    pub fn run<R: RngStream + ?Sized>(mut self, rng: &mut R) -> Result<RunRecord, EngineError> {
        while !self.is_finished() {
            self.step(rng)?;
        }
        Ok(self.into_record())
    }
}

/// Full iLSHADE-RSP run.
pub fn run_ilshade_rsp<O, R>(cfg: &RunConfig, obj: &O, rng: &mut R) -> Result<RunRecord, EngineError>
where
    O: ObjectiveFunction + ?Sized,
    R: RngStream + ?Sized,
{
    IlshadeRsp::new(cfg.clone(), obj, rng)?.run(rng)
}

/// Full LSHADE-RSP run (no target perturbation).
pub fn run_lshade_rsp<O, R>(cfg: &RunConfig, obj: &O, rng: &mut R) -> Result<RunRecord, EngineError>
where
    O: ObjectiveFunction + ?Sized,
    R: RngStream + ?Sized,
{
    IlshadeRsp::lshade_rsp(cfg.clone(), obj, rng)?.run(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bounds, FnObjective};
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn sphere(dim: usize) -> FnObjective<impl Fn(&[f64]) -> f64> {
        FnObjective::new(Bounds::uniform(dim, -100.0, 100.0).unwrap(), |x: &[f64]| {
            x.iter().map(|v| v * v).sum()
        })
        .with_optimum(0.0)
    }

    #[test]
    fn unknown_optimum_reports_absolute_fev() {
        let obj = FnObjective::new(Bounds::uniform(2, -5.0, 5.0).unwrap(), |x: &[f64]| {
            10.0 + x.iter().map(|v| v * v).sum::<f64>()
        });
        let cfg = RunConfig::new(2).with_budget(2000).with_seed(1);
        let rec = run_ilshade_rsp(&cfg, &obj, &mut SeededRng::new(1)).unwrap();
        assert!(rec.fev_is_absolute);
        assert_eq!(rec.fev, rec.best_f);
        assert!(rec.best_f >= 10.0);
    }

    #[test]
    fn target_stops_early() {
        let obj = sphere(5);
        let mut cfg = RunConfig::new(5).with_budget(50_000);
        cfg.target_fev = Some(1e-3);
        let rec = run_ilshade_rsp(&cfg, &obj, &mut SeededRng::new(3)).unwrap();
        assert!(rec.fev <= 1e-3);
        assert!(rec.nfe_used < 50_000);
    }

    #[test]
    fn nan_objective_propagates() {
        let obj = FnObjective::new(Bounds::uniform(2, -1.0, 1.0).unwrap(), |x: &[f64]| {
            if x[0] > 0.9 { f64::NAN } else { x[0] }
        });
        let cfg = RunConfig::new(2).with_budget(100_000);
        let err = run_ilshade_rsp(&cfg, &obj, &mut SeededRng::new(0)).unwrap_err();
        assert!(matches!(err, EngineError::Model(crate::model::ModelError::NanObjective)));
    }

    #[test]
    fn zero_jumping_rate_never_perturbs() {
        let obj = sphere(4);
        let cfg = RunConfig::new(4).with_budget(4000).with_jumping_rate(0.0);
        let rec = run_ilshade_rsp(&cfg, &obj, &mut SeededRng::new(8)).unwrap();
        assert_eq!(rec.perturbed_trials, 0);
        let full = RunConfig::new(4).with_budget(4000).with_jumping_rate(1.0);
        let rec = run_ilshade_rsp(&full, &obj, &mut SeededRng::new(8)).unwrap();
        assert!(rec.perturbed_trials > 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn generation_invariants(seed in any::<u64>(), dim in 1usize..4, budget in 40usize..400) {
            let obj = sphere(dim);
            let cfg = RunConfig::new(dim).with_np_init(10).with_budget(budget).with_seed(seed);
            let mut rng = SeededRng::new(seed);
            let mut state = IlshadeRsp::new(cfg, &obj, &mut rng).unwrap();
            let mut prev_best = state.best_fev();
            while !state.is_finished() {
                let np = state.population().len();
                let nfe = state.population().nfe;
                let report = state.step(&mut rng).unwrap();
                let pop = state.population();
                // Budget exactness.
                prop_assert_eq!(report.evaluations, np.min(budget - nfe));
                prop_assert_eq!(pop.nfe, nfe + report.evaluations);
                prop_assert!(pop.nfe <= budget);
                // Elitism.
                let best = state.best_fev();
                prop_assert!(best <= prev_best);
                prev_best = best;
                // LPSR trajectory and archive capacity.
                prop_assert_eq!(pop.len(), lpsr_next_size(10, 4, pop.nfe, budget));
                prop_assert!(pop.archive.len() <= pop.len());
                for m in &pop.members {
                    prop_assert!(obj.bounds().contains(&m.x));
                    prop_assert_eq!(m.f, obj.evaluate(&m.x));
                }
            }
            let rec = state.into_record();
            prop_assert_eq!(rec.nfe_used, budget);
            prop_assert!(rec.trace.windows(2).all(|w| w[1].best_fev <= w[0].best_fev && w[1].nfe > w[0].nfe));
        }
    }
}
