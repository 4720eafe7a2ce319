//! Experiment grids: plan files, concurrent execution, CSV outputs and the
//! +/=/- comparison table.

mod compare;
mod plan;
mod records;

pub use compare::{compare, Comparison};
pub use plan::{
    default_checkpoints, default_output_dir, AlgorithmKind, AlgorithmSpec, Cell, ExperimentPlan, Overrides,
    CLASSIC_CROSSOVER_RATE, CLASSIC_POPULATION, CLASSIC_SCALE, DEFAULT_OUTPUT_DIR, FILE_PROBLEM_PREFIX,
    OUTPUT_DIR_ENV,
};
pub use records::{
    checkpoint_nfes, fev_at, load_results, quantile, read_results, spread, trace_file_name, write_results, ResultRow,
    Spread, TraceRow, TraceTable, RESULTS_FILE,
};

use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::bench::{BenchError, ProblemSpec};
use crate::engine::{run_classic_de, run_ilshade_rsp, run_lshade_rsp, EngineError, RunRecord};
use crate::rng::SeededRng;
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("problem {id:?}")]
    Problem { id: String, source: BenchError },
    #[error("{}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("run {algorithm} on {problem} D={dimension} seed {seed}")]
    Run {
        algorithm: String,
        problem: String,
        dimension: usize,
        seed: u64,
        source: EngineError,
    },
    #[error("comparison: {0}")]
    Compare(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// One run of one algorithm.
pub fn execute_run(
    spec: &AlgorithmSpec,
    problem: &ProblemSpec,
    budget: usize,
    seed: u64,
) -> Result<RunRecord, EngineError> {
    let cfg = spec.run_config(problem.dimension(), budget, seed);
    let mut rng = SeededRng::new(seed);
    let mut record = match spec.kind {
        AlgorithmKind::IlshadeRsp => run_ilshade_rsp(&cfg, problem, &mut rng)?,
        AlgorithmKind::LshadeRsp => run_lshade_rsp(&cfg, problem, &mut rng)?,
        AlgorithmKind::ClassicDe => {
            let (f, cr) = spec.classic_parameters();
            run_classic_de(&cfg, problem, &mut rng, f, cr)?
        }
    };
    record.algorithm = spec.label.clone();
    Ok(record)
}

/// Paths written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub results: PathBuf,
    pub traces: Vec<PathBuf>,
    pub rows: Vec<ResultRow>,
}

/// Runs every (cell, algorithm, seed) triple on a bounded worker pool and
/// writes `results.csv` plus one trace file per cell into `plan.output`.
/// Rows are written in plan order regardless of completion order.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutput, ExperimentError> {
    let cells = plan.cells()?;
    std::fs::create_dir_all(&plan.output).map_err(|e| ExperimentError::Io {
        path: plan.output.clone(),
        source: e,
    })?;

    let jobs: Vec<(usize, usize, u64)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, _)| {
            (0..plan.algorithms.len()).flat_map(move |a| plan.seeds.iter().map(move |&s| (c, a, s)))
        })
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = plan.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, a, seed)| {
                let cell = &cells[c];
                let spec = &plan.algorithms[a];
                execute_run(spec, &cell.problem, plan.budget_for(cell.dimension), seed).map_err(|e| {
                    ExperimentError::Run {
                        algorithm: spec.label.clone(),
                        problem: cell.problem_id.clone(),
                        dimension: cell.dimension,
                        seed,
                        source: e,
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let rows: Vec<ResultRow> = jobs
        .iter()
        .zip(&records)
        .map(|(&(c, _, seed), r)| ResultRow {
            algorithm: r.algorithm.clone(),
            problem: cells[c].problem_id.clone(),
            dimension: cells[c].dimension,
            seed,
            nfe_used: r.nfe_used,
            best_f: r.best_f,
            fev: r.fev,
        })
        .collect();
    let results = plan.output.join(RESULTS_FILE);
    write_file(&results, |w| write_results(&rows, w))?;

    let per_cell = plan.algorithms.len() * plan.seeds.len();
    let labels: Vec<String> = plan.algorithms.iter().map(|a| a.label.clone()).collect();
    let mut traces = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let block = &records[c * per_cell..(c + 1) * per_cell];
        let by_alg: Vec<Vec<&[crate::engine::TracePoint]>> = block
            .chunks(plan.seeds.len())
            .map(|runs| runs.iter().map(|r| r.trace.as_slice()).collect())
            .collect();
        let checkpoints = checkpoint_nfes(&plan.checkpoints, plan.budget_for(cell.dimension));
        let table = TraceTable::from_traces(labels.clone(), &by_alg, &checkpoints);
        let path = plan.output.join(trace_file_name(&cell.problem_id, cell.dimension));
        write_file(&path, |w| table.write(w))?;
        traces.push(path);
    }
    Ok(ExperimentOutput { results, traces, rows })
}

fn write_file(
    path: &std::path::Path,
    body: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<(), ExperimentError>,
) -> Result<(), ExperimentError> {
    let file = std::fs::File::create(path).map_err(|e| ExperimentError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    let mut w = std::io::BufWriter::new(file);
    body(&mut w)?;
    use std::io::Write;
    w.flush().map_err(|e| ExperimentError::Io {
        path: path.to_owned(),
        source: e,
    })
}
