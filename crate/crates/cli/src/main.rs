use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ilshade::bench::registry;
use ilshade::experiment::{self, AlgorithmKind, ExperimentPlan, Overrides};
use ilshade::strategy::Perturbation;

#[derive(Parser)]
#[command(name = "ilshade", version, about = "iLSHADE-RSP benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, problem, dimension, seed) of a plan file.
    Run(Box<RunArgs>),
    /// Wilcoxon +/=/- table and Friedman ranks from result CSVs.
    Compare(CompareArgs),
    /// Print the built-in problem ids.
    ListProblems,
    /// Print the algorithm ids usable as `kind` in a plan.
    ListAlgorithms,
}

#[derive(Args)]
struct RunArgs {
    /// TOML plan file.
    plan: PathBuf,
    /// Output directory; overrides the plan and the environment default.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated seeds replacing the plan's.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Evaluation budget per run, replacing the plan's.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    dimensions: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    problems: Option<Vec<String>>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Suppress the per-run summary.
    #[arg(long, short)]
    quiet: bool,
}

/// Parameter overrides applied on top of every algorithm in the plan.
#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    np_init: Option<usize>,
    #[arg(long)]
    np_fin: Option<usize>,
    #[arg(long)]
    jumping_rate: Option<f64>,
    #[arg(long)]
    rank_greediness: Option<f64>,
    #[arg(long)]
    memory_size: Option<usize>,
    #[arg(long)]
    archive_factor: Option<f64>,
    /// Target perturbation: `cauchy` or `stable:<alpha>`.
    #[arg(long)]
    perturbation: Option<Perturbation>,
    #[arg(long)]
    target_fev: Option<f64>,
    /// Classic DE scale factor.
    #[arg(long)]
    scale: Option<f64>,
    /// Classic DE crossover rate.
    #[arg(long)]
    crossover_rate: Option<f64>,
}

impl OverrideArgs {
    fn to_overrides(&self) -> Overrides {
        Overrides {
            np_init: self.np_init,
            np_fin: self.np_fin,
            jumping_rate: self.jumping_rate,
            rank_greediness: self.rank_greediness,
            memory_size: self.memory_size,
            archive_factor: self.archive_factor,
            perturbation: self.perturbation,
            target_fev: self.target_fev,
            scale: self.scale,
            crossover_rate: self.crossover_rate,
        }
    }
}

#[derive(Args)]
struct CompareArgs {
    /// One or more results.csv files.
    #[arg(required = true)]
    results: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Algorithm label every other algorithm is tested against.
    #[arg(long)]
    control: String,
}

fn run(args: RunArgs) -> Result<()> {
    let mut plan =
        ExperimentPlan::load(&args.plan).with_context(|| format!("loading plan {}", args.plan.display()))?;
    if let Some(output) = args.output {
        plan.output = output;
    }
    if let Some(seeds) = args.seeds {
        plan.seeds = seeds;
    }
    if args.budget.is_some() {
        plan.budget = args.budget;
    }
    if let Some(dimensions) = args.dimensions {
        plan.dimensions = dimensions;
    }
    if let Some(problems) = args.problems {
        plan.problems = problems;
    }
    if args.workers.is_some() {
        plan.workers = args.workers;
    }
    let overrides = args.overrides.to_overrides();
    for spec in &mut plan.algorithms {
        spec.overrides = spec.overrides.merged_with(&overrides);
    }
    plan.validate()?;

    let out = experiment::run_experiment(&plan)?;
    if !args.quiet {
        for row in &out.rows {
            println!(
                "{:<16} {:<32} D={:<4} seed={:<6} nfe={:<8} fev={:.6e}",
                row.algorithm, row.problem, row.dimension, row.seed, row.nfe_used, row.fev
            );
        }
    }
    eprintln!("wrote {}", out.results.display());
    for t in &out.traces {
        eprintln!("wrote {}", t.display());
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let mut rows = Vec::new();
    for path in &args.results {
        rows.extend(experiment::load_results(path)?);
    }
    if rows.is_empty() {
        bail!("no result rows in {} file(s)", args.results.len());
    }
    let cmp = experiment::compare(&rows, args.alpha, &args.control)?;
    print!("{}", cmp.render());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(*args),
        Command::Compare(args) => compare(args),
        Command::ListProblems => {
            for (name, description) in registry::list() {
                println!("{name:<36} {description}");
            }
            Ok(())
        }
        Command::ListAlgorithms => {
            for kind in AlgorithmKind::ALL {
                println!("{:<16} {}", kind.id(), kind.description());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
