use crate::model::{evaluate_checked, initialize_population, repair_bounds, ObjectiveFunction};
use crate::rng::RngStream;
use crate::strategy::{binomial_crossover, classical_mutation, ClassicStrategy};

use super::{fev_of, EngineError, RunConfig, RunRecord, TracePoint};

/// DE/rand/1/bin with constant `scale` and `cr` and a fixed population of
/// `cfg.np_init`. Only `dimension`, `np_init`, `nfe_max`, `target_fev` and
/// `seed` are read from the configuration.
///
/// Each generation builds every trial (donors, `j_rand`, crossover
/// uniforms), then evaluates them in order while budget remains; a trial at
/// least as good as its parent replaces it.
pub fn run_classic_de<O, R>(
    cfg: &RunConfig,
    obj: &O,
    rng: &mut R,
    scale: f64,
    cr: f64,
) -> Result<RunRecord, EngineError>
where
    O: ObjectiveFunction + ?Sized,
    R: RngStream + ?Sized,
{
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(EngineError::Config(format!("F = {scale} outside (0, 1]")));
    }
    if !(0.0..=1.0).contains(&cr) {
        return Err(EngineError::Config(format!("CR = {cr} outside [0, 1]")));
    }
    if cfg.nfe_max < cfg.np_init {
        return Err(EngineError::Config(format!(
            "budget {} is smaller than the population {}",
            cfg.nfe_max, cfg.np_init
        )));
    }
    let mut pop = initialize_population(cfg.np_init, cfg.dimension, cfg.nfe_max, obj, rng)?;
    let optimum = obj.optimum_value();
    let mut trace = Vec::new();
    let mut push_trace = |pop: &crate::model::Population| {
        trace.push(TracePoint {
            nfe: pop.nfe,
            best_fev: fev_of(pop.best().f, optimum),
            population: pop.len(),
            archive: 0,
        })
    };
    push_trace(&pop);

    let np = pop.len();
    loop {
        let best_fev = fev_of(pop.best().f, optimum);
        if pop.nfe >= pop.nfe_max || cfg.target_fev.is_some_and(|t| best_fev <= t) {
            break;
        }
        let mut trials = Vec::with_capacity(np);
        for i in 0..np {
            let mutant = classical_mutation(ClassicStrategy::Rand1, i, &pop.members, scale, rng)?;
            let mut trial = binomial_crossover(&pop.members[i].x, &mutant, cr, rng)?;
            repair_bounds(&mut trial, &pop.members[i].x, obj.bounds());
            trials.push(trial);
        }
        for (i, trial) in trials.into_iter().enumerate() {
            if pop.nfe >= pop.nfe_max {
                break;
            }
            let f = evaluate_checked(obj, &trial)?;
            pop.nfe += 1;
            let member = &mut pop.members[i];
            if f <= member.f {
                member.x = trial;
                member.f = f;
            }
        }
        pop.generation += 1;
        push_trace(&pop);
    }

    let best = pop.best().clone();
    Ok(RunRecord {
        algorithm: "de-rand-1-bin".to_owned(),
        best_f: best.f,
        fev: fev_of(best.f, optimum),
        fev_is_absolute: optimum.is_none(),
        best_x: best.x,
        nfe_used: pop.nfe,
        generations: pop.generation,
        trace,
        perturbed_trials: 0,
        seed: cfg.seed,
        config: cfg.clone(),
    })
}
