//! `vsp` — command-line front end for the placement library.
//!
//! Subcommands:
//!
//! * `gen`      build a problem file from a built-in or custom scenario
//! * `solve`    run one solver on one problem file
//! * `validate` check an externally produced placement against a problem
//! * `sweep`    run the full experiment sweep and write CSV results
//!
//! Exit codes: 0 on success, 1 when a solve was infeasible or a validated
//! placement has violations, 2 on usage, parse, or I/O errors.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use vsp::harness::{self, load_json, RunConfig, ScenarioSelector};
use vsp::model::PlacementProblem;
use vsp::scenario::{builtin_scenario, instantiate, vehicle_positions, Scenario, ScenarioSpec};
use vsp::solver::{DelayCheck, GaConfig, SolverKind};

#[derive(Parser)]
#[command(
    name = "vsp",
    version,
    about = "Latency-aware placement of V2X service instances on hybrid core/edge nodes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem file from a scenario.
    Gen(GenArgs),
    /// Solve one problem file with one solver.
    Solve(SolveArgs),
    /// Validate a placement file against a problem file.
    Validate(ValidateArgs),
    /// Run a sweep over vehicle counts × repetitions × solvers.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Small,
    Large,
}

impl From<ScenarioArg> for Scenario {
    fn from(value: ScenarioArg) -> Self {
        match value {
            ScenarioArg::Small => Scenario::Small,
            ScenarioArg::Large => Scenario::Large,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    Greedy,
    Ga,
}

impl From<SolverArg> for SolverKind {
    fn from(value: SolverArg) -> Self {
        match value {
            SolverArg::Exact => SolverKind::Exact,
            SolverArg::Greedy => SolverKind::Greedy,
            SolverArg::Ga => SolverKind::Ga,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DelayCheckArg {
    /// Worst-case vehicle delay must be within the threshold (default).
    Max,
    /// Mean vehicle delay must be within the threshold.
    Mean,
}

impl From<DelayCheckArg> for DelayCheck {
    fn from(value: DelayCheckArg) -> Self {
        match value {
            DelayCheckArg::Max => DelayCheck::Max,
            DelayCheckArg::Mean => DelayCheck::Mean,
        }
    }
}

/// Genetic-algorithm overrides shared by `solve` and `sweep`.
#[derive(Debug, Args)]
struct GaOverrides {
    #[arg(long, value_name = "N")]
    ga_population: Option<usize>,
    #[arg(long, value_name = "N")]
    ga_generations: Option<usize>,
    #[arg(long, value_name = "N")]
    ga_tournament: Option<usize>,
    #[arg(long, value_name = "RATE")]
    ga_crossover_rate: Option<f64>,
    #[arg(long, value_name = "RATE")]
    ga_mutation_rate: Option<f64>,
    #[arg(long, value_name = "MS")]
    ga_penalty_weight: Option<f64>,
    #[arg(long, value_name = "SEED")]
    ga_seed: Option<u64>,
}

impl GaOverrides {
    fn apply(&self, mut config: GaConfig) -> GaConfig {
        if let Some(v) = self.ga_population {
            config.population_size = v;
        }
        if let Some(v) = self.ga_generations {
            config.generations = v;
        }
        if let Some(v) = self.ga_tournament {
            config.tournament_size = v;
        }
        if let Some(v) = self.ga_crossover_rate {
            config.crossover_rate = v;
        }
        if let Some(v) = self.ga_mutation_rate {
            config.mutation_rate = Some(v);
        }
        if let Some(v) = self.ga_penalty_weight {
            config.penalty_weight = v;
        }
        if let Some(v) = self.ga_seed {
            config.seed = v;
        }
        config
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Built-in scenario to parameterize.
    #[arg(long, value_enum, conflicts_with = "spec")]
    scenario: Option<ScenarioArg>,
    /// Custom scenario spec (JSON) instead of a built-in.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Vehicle count (required with --scenario, overrides --spec's value).
    #[arg(long)]
    vehicles: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the problem JSON (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write descriptive vehicle positions as CSV.
    #[arg(long, value_name = "FILE")]
    positions: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_name = "FILE")]
    problem: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverArg,
    /// Delay statistic for the greedy admissibility test.
    #[arg(long, value_enum, default_value_t = DelayCheckArg::Max)]
    delay_check: DelayCheckArg,
    /// Where to write the placement JSON (stdout when omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Where to write solve statistics JSON.
    #[arg(long, value_name = "FILE")]
    stats_out: Option<PathBuf>,
    #[command(flatten)]
    ga: GaOverrides,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_name = "FILE")]
    problem: PathBuf,
    #[arg(long, value_name = "FILE")]
    placement: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep configuration JSON; flags below override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Built-in scenario (required unless --config provides one).
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<u32>,
    /// Comma-separated vehicle counts, e.g. 20,40,60.
    #[arg(long, value_delimiter = ',')]
    vehicle_counts: Option<Vec<u32>>,
    /// Comma-separated subset of exact,greedy,ga.
    #[arg(long, value_delimiter = ',', value_enum)]
    solvers: Option<Vec<SolverArg>>,
    #[arg(long, value_enum)]
    delay_check: Option<DelayCheckArg>,
    /// Run the exact solver even when its projected search size exceeds
    /// the node budget.
    #[arg(long)]
    force_exact: bool,
    #[arg(long)]
    exact_node_budget: Option<u64>,
    /// Also write runs.json / summary.json mirrors.
    #[arg(long)]
    emit_json: bool,
    #[command(flatten)]
    ga: GaOverrides,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => run_gen(args),
        Command::Solve(args) => run_solve(args),
        Command::Validate(args) => run_validate(args),
        Command::Sweep(args) => run_sweep_command(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn write_or_print(out: &Option<PathBuf>, contents: &str, what: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, contents)
                .with_context(|| format!("writing {what} to {}", path.display()))?;
            eprintln!("wrote {what} to {}", path.display());
        }
        None => println!("{contents}"),
    }
    Ok(())
}

fn run_gen(args: GenArgs) -> Result<ExitCode> {
    let spec: ScenarioSpec = match (&args.scenario, &args.spec) {
        (Some(which), None) => {
            let vehicles = args
                .vehicles
                .context("--vehicles is required when generating from a built-in scenario")?;
            builtin_scenario((*which).into(), vehicles, args.seed)?
        }
        (None, Some(path)) => {
            let mut spec: ScenarioSpec = load_json(path)?;
            if let Some(vehicles) = args.vehicles {
                spec.vehicle_count = vehicles;
            }
            spec.seed = args.seed;
            spec
        }
        _ => bail!("exactly one of --scenario or --spec must be given"),
    };

    let problem = instantiate(&spec)?;
    let json = serde_json::to_string_pretty(&problem)?;
    write_or_print(&args.out, &json, "problem")?;

    if let Some(path) = &args.positions {
        let mut csv = String::from("vehicle,lane,position_km\n");
        for p in vehicle_positions(&spec) {
            csv.push_str(&format!("{},{},{}\n", p.vehicle, p.lane, p.position_km));
        }
        std::fs::write(path, csv)
            .with_context(|| format!("writing positions to {}", path.display()))?;
        eprintln!("wrote vehicle positions to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_solve(args: SolveArgs) -> Result<ExitCode> {
    let problem: PlacementProblem = load_json(&args.problem)?;
    let ga = args.ga.apply(GaConfig::default());
    let solver: SolverKind = args.solver.into();

    match harness::solve_one(&problem, solver, args.delay_check.into(), &ga) {
        Ok((placement, stats)) => {
            let json = serde_json::to_string_pretty(&placement)?;
            write_or_print(&args.out, &json, "placement")?;
            let stats_json = serde_json::to_string_pretty(&stats)?;
            match &args.stats_out {
                Some(path) => {
                    std::fs::write(path, &stats_json)
                        .with_context(|| format!("writing stats to {}", path.display()))?;
                }
                None => eprintln!("stats: {stats_json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(err) if err.is_infeasible() => {
            eprintln!("{solver}: {err}");
            Ok(ExitCode::FAILURE)
        }
        Err(err) => Err(err.into()),
    }
}

fn run_validate(args: ValidateArgs) -> Result<ExitCode> {
    let outcome = harness::validate_placement_file(&args.problem, &args.placement)?;
    print!("{}", outcome.report);
    println!(
        "objective: stored {} ms, recomputed {} ms ({})",
        outcome.stored_objective_ms,
        outcome.recomputed_objective_ms,
        if outcome.objective_consistent { "consistent" } else { "MISMATCH" }
    );
    if outcome.report.is_feasible() && outcome.objective_consistent {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

fn run_sweep_command(args: SweepArgs) -> Result<ExitCode> {
    let mut config: RunConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => {
            let which = args
                .scenario
                .context("either --config or --scenario must be given")?;
            RunConfig::new(ScenarioSelector::Builtin(which.into()))
        }
    };
    if let Some(which) = args.scenario {
        config.scenario = ScenarioSelector::Builtin(which.into());
    }
    if let Some(dir) = args.output_dir {
        config.output_dir = dir;
    }
    if let Some(seed) = args.master_seed {
        config.master_seed = seed;
    }
    if let Some(reps) = args.repetitions {
        config.repetitions = reps;
    }
    if let Some(counts) = args.vehicle_counts {
        config.vehicle_counts = Some(counts);
    }
    if let Some(solvers) = args.solvers {
        config.solvers = solvers.into_iter().map(SolverKind::from).collect();
    }
    if let Some(check) = args.delay_check {
        config.greedy_delay_check = check.into();
    }
    if let Some(budget) = args.exact_node_budget {
        config.exact_node_budget = budget;
    }
    config.force_exact |= args.force_exact;
    config.emit_json |= args.emit_json;
    config.ga = args.ga.apply(config.ga);

    let summary = harness::run_sweep(&config)?;

    for skipped in &summary.skipped_exact {
        eprintln!(
            "note: skipped exact solve at {} vehicles (rep {}): projected {:.3e} search nodes \
             exceed the budget of {} (use --force-exact to run anyway)",
            skipped.vehicle_count, skipped.repetition, skipped.projected_nodes, skipped.budget
        );
    }
    let feasible = summary
        .records
        .iter()
        .filter(|r| r.report.as_ref().is_some_and(|rep| rep.feasible))
        .count();
    println!(
        "sweep complete: {} runs ({} feasible), {} summary rows, outputs in {}",
        summary.records.len(),
        feasible,
        summary.summaries.len(),
        config.output_dir.display()
    );
    if summary.any_infeasible {
        eprintln!("warning: at least one run was infeasible or aborted; see runs.csv");
        Ok(ExitCode::FAILURE)
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
