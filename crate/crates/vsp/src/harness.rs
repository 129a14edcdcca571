//! Experiment harness: generate → solve → measure → aggregate → emit.
//!
//! A sweep runs every configured vehicle count × repetition × solver. Each
//! repetition derives a child seed from `(master_seed, vehicle_count,
//! repetition)`, instantiates the scenario once, and hands the same
//! problem to every selected solver, so adding or removing a solver never
//! perturbs the scenario randomness and any row can be re-derived from its
//! seed alone. Solver wall-clock time covers exactly the solve call.
//!
//! Outputs under `output_dir`:
//!
//! * `runs.csv` — one row per run per solver, runtime in the last column;
//! * `summary.csv` — per (vehicle count, solver) mean and standard
//!   deviation of every scalar metric over the feasible runs;
//! * `histograms/` — density-normalized delay histograms per
//!   (vehicle count, solver, service type), pooled across repetitions;
//! * `runs.json` / `summary.json` mirrors when `emit_json` is set.
//!
//! Repetitions execute sequentially; rows are emitted sorted by vehicle
//! count, repetition, then solver, so repeated sweeps with equal configs
//! produce byte-identical CSVs apart from the runtime columns.

use crate::metrics::{ExperimentReport, Histogram, MetricsError, DEFAULT_BIN_WIDTH_MS};
use crate::model::{
    check_feasibility, evaluate_objective, FeasibilityReport, ModelError, Placement,
    PlacementProblem, ServiceTypeId,
};
use crate::rng::derive_seed;
use crate::scenario::{builtin_scenario, instantiate, Scenario, ScenarioError, ScenarioSpec};
use crate::solver::{
    projected_leaf_count, solve_bruteforce, solve_exact, solve_exact_with_budget, solve_ga,
    solve_greedy, DelayCheck, GaConfig, SolveError, SolveStats, SolverKind,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid run config: {0}")]
    InvalidConfig(String),
    #[error("failed to {action} `{path}`: {source}")]
    Io { action: &'static str, path: PathBuf, source: std::io::Error },
    #[error("failed to parse `{path}`: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Which scenario a sweep runs: a built-in size or a full custom spec. The
/// sweep overrides the spec's `vehicle_count` and `seed` per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSelector {
    Builtin(Scenario),
    Custom(Box<ScenarioSpec>),
}

fn default_repetitions() -> u32 {
    100
}

fn default_exact_node_budget() -> u64 {
    2_000_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("sweep-out")
}

fn default_bin_width() -> f64 {
    DEFAULT_BIN_WIDTH_MS
}

fn default_solvers() -> Vec<SolverKind> {
    SolverKind::ALL.to_vec()
}

/// Full sweep configuration, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: ScenarioSelector,
    /// Defaults to the scenario's standard sweep values (or, for a custom
    /// spec, its own vehicle count).
    #[serde(default)]
    pub vehicle_counts: Option<Vec<u32>>,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub greedy_delay_check: DelayCheck,
    #[serde(default)]
    pub ga: GaConfig,
    /// Exact solves are skipped (or, when forced, aborted) once the
    /// projected search size exceeds this many nodes.
    #[serde(default = "default_exact_node_budget")]
    pub exact_node_budget: u64,
    /// Run the exact solver even when the projection exceeds the budget,
    /// with the budget as a hard in-search abort.
    #[serde(default)]
    pub force_exact: bool,
    #[serde(default)]
    pub emit_json: bool,
    #[serde(default = "default_bin_width")]
    pub histogram_bin_width_ms: f64,
}

impl RunConfig {
    pub fn new(scenario: ScenarioSelector) -> Self {
        Self {
            scenario,
            vehicle_counts: None,
            solvers: default_solvers(),
            repetitions: default_repetitions(),
            master_seed: 0,
            output_dir: default_output_dir(),
            greedy_delay_check: DelayCheck::default(),
            ga: GaConfig::default(),
            exact_node_budget: default_exact_node_budget(),
            force_exact: false,
            emit_json: false,
            histogram_bin_width_ms: default_bin_width(),
        }
    }

    fn resolved_vehicle_counts(&self) -> Result<Vec<u32>, HarnessError> {
        let counts = match &self.vehicle_counts {
            Some(counts) => counts.clone(),
            None => match &self.scenario {
                ScenarioSelector::Builtin(which) => which.standard_vehicle_counts().to_vec(),
                ScenarioSelector::Custom(spec) => vec![spec.vehicle_count],
            },
        };
        if counts.is_empty() {
            return Err(HarnessError::InvalidConfig("vehicle_counts must be non-empty".into()));
        }
        let mut sorted: Vec<u32> = BTreeSet::from_iter(counts).into_iter().collect();
        sorted.sort_unstable();
        Ok(sorted)
    }

    fn resolved_solvers(&self) -> Result<Vec<SolverKind>, HarnessError> {
        if self.solvers.is_empty() {
            return Err(HarnessError::InvalidConfig("solvers must be non-empty".into()));
        }
        let selected: BTreeSet<SolverKind> = self.solvers.iter().copied().collect();
        Ok(SolverKind::ALL.into_iter().filter(|k| selected.contains(k)).collect())
    }

    fn spec_for(&self, vehicle_count: u32, seed: u64) -> Result<ScenarioSpec, HarnessError> {
        match &self.scenario {
            ScenarioSelector::Builtin(which) => Ok(builtin_scenario(*which, vehicle_count, seed)?),
            ScenarioSelector::Custom(spec) => {
                let mut spec = (**spec).clone();
                spec.vehicle_count = vehicle_count;
                spec.seed = seed;
                spec.validate()?;
                Ok(spec)
            }
        }
    }
}

/// Child seed for one repetition of one vehicle count.
pub fn child_seed(master_seed: u64, vehicle_count: u32, repetition: u32) -> u64 {
    derive_seed(master_seed, &[vehicle_count as u64, repetition as u64])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Infeasible,
    BudgetExceeded,
}

impl RunStatus {
    fn label(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Infeasible => "infeasible",
            RunStatus::BudgetExceeded => "budget_exceeded",
        }
    }
}

/// One solver run on one generated problem.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub vehicle_count: u32,
    pub repetition: u32,
    pub seed: u64,
    pub solver: SolverKind,
    pub status: RunStatus,
    /// Wall-clock around the solver call only.
    pub runtime_ms: f64,
    pub report: Option<ExperimentReport>,
}

/// Sample mean and standard deviation (n−1 denominator; 0 when n < 2).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, std }
    }
}

/// Seed-averaged metrics for one (vehicle count, solver) cell, over the
/// feasible runs only.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRecord {
    pub vehicle_count: u32,
    pub solver: SolverKind,
    pub runs: u32,
    pub feasible_runs: u32,
    pub objective_ms: MeanStd,
    pub per_type_avg_delay_ms: BTreeMap<ServiceTypeId, MeanStd>,
    pub util_cpu: MeanStd,
    pub util_memory: MeanStd,
    pub util_storage: MeanStd,
    pub nodes_explored: MeanStd,
    pub runtime_ms: MeanStd,
}

/// An exact solve skipped by the tractability guard.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedRun {
    pub vehicle_count: u32,
    pub repetition: u32,
    pub projected_nodes: f64,
    pub budget: u64,
}

/// Everything a sweep produced, also written to disk.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub type_ids: Vec<ServiceTypeId>,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<SummaryRecord>,
    pub skipped_exact: Vec<SkippedRun>,
    pub any_infeasible: bool,
}

impl SweepSummary {
    /// Summary cell lookup.
    pub fn summary_for(&self, vehicle_count: u32, solver: SolverKind) -> Option<&SummaryRecord> {
        self.summaries.iter().find(|s| s.vehicle_count == vehicle_count && s.solver == solver)
    }
}

/// Run the full sweep described by `config` and write its outputs.
pub fn run_sweep(config: &RunConfig) -> Result<SweepSummary, HarnessError> {
    if config.repetitions < 1 {
        return Err(HarnessError::InvalidConfig("repetitions must be at least 1".into()));
    }
    let vehicle_counts = config.resolved_vehicle_counts()?;
    let solvers = config.resolved_solvers()?;

    let mut records: Vec<RunRecord> = Vec::new();
    let mut skipped_exact: Vec<SkippedRun> = Vec::new();
    let mut type_ids: Vec<ServiceTypeId> = Vec::new();
    // (vehicle_count, solver, type) → pooled delay samples for histograms.
    let mut pooled: BTreeMap<(u32, SolverKind, ServiceTypeId), Vec<f64>> = BTreeMap::new();

    for &vc in &vehicle_counts {
        for rep in 0..config.repetitions {
            let seed = child_seed(config.master_seed, vc, rep);
            let spec = config.spec_for(vc, seed)?;
            let problem = instantiate(&spec)?;
            if type_ids.is_empty() {
                type_ids = problem.types().iter().map(|t| t.id.clone()).collect();
            }

            for &solver in &solvers {
                if solver == SolverKind::Exact {
                    let projected = projected_leaf_count(&problem)?;
                    if projected > config.exact_node_budget as f64 && !config.force_exact {
                        skipped_exact.push(SkippedRun {
                            vehicle_count: vc,
                            repetition: rep,
                            projected_nodes: projected,
                            budget: config.exact_node_budget,
                        });
                        continue;
                    }
                }
                let record = run_one(config, &problem, solver, vc, rep, seed)?;
                if let Some(report) = &record.report {
                    for (ty, samples) in &report.per_type_delay_samples_ms {
                        pooled
                            .entry((vc, solver, ty.clone()))
                            .or_default()
                            .extend_from_slice(samples);
                    }
                }
                records.push(record);
            }
        }
    }

    let summaries = summarize(&records, &vehicle_counts, &solvers, &type_ids);
    let any_infeasible = records.iter().any(|r| r.status != RunStatus::Ok);

    let summary = SweepSummary { type_ids, records, summaries, skipped_exact, any_infeasible };
    write_outputs(config, &summary, &pooled)?;
    Ok(summary)
}

fn run_one(
    config: &RunConfig,
    problem: &PlacementProblem,
    solver: SolverKind,
    vehicle_count: u32,
    repetition: u32,
    seed: u64,
) -> Result<RunRecord, HarnessError> {
    let started = Instant::now();
    let outcome = match solver {
        SolverKind::Exact => {
            if config.force_exact {
                solve_exact_with_budget(problem, Some(config.exact_node_budget))
            } else {
                solve_exact(problem)
            }
        }
        SolverKind::Greedy => solve_greedy(problem, config.greedy_delay_check),
        SolverKind::Ga => {
            let ga = GaConfig { seed, ..config.ga.clone() };
            solve_ga(problem, &ga)
        }
    };
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;

    match outcome {
        Ok((placement, stats)) => {
            let report = ExperimentReport::new(
                problem,
                &placement,
                solver,
                seed,
                runtime_ms,
                stats.nodes_explored,
            )?;
            Ok(RunRecord {
                vehicle_count,
                repetition,
                seed,
                solver,
                status: RunStatus::Ok,
                runtime_ms,
                report: Some(report),
            })
        }
        Err(err) if err.is_infeasible() => Ok(RunRecord {
            vehicle_count,
            repetition,
            seed,
            solver,
            status: RunStatus::Infeasible,
            runtime_ms,
            report: None,
        }),
        Err(SolveError::NodeBudgetExceeded { .. }) => Ok(RunRecord {
            vehicle_count,
            repetition,
            seed,
            solver,
            status: RunStatus::BudgetExceeded,
            runtime_ms,
            report: None,
        }),
        Err(err) => Err(err.into()),
    }
}

fn summarize(
    records: &[RunRecord],
    vehicle_counts: &[u32],
    solvers: &[SolverKind],
    type_ids: &[ServiceTypeId],
) -> Vec<SummaryRecord> {
    let mut out = Vec::new();
    for &vc in vehicle_counts {
        for &solver in solvers {
            let cell: Vec<&RunRecord> =
                records.iter().filter(|r| r.vehicle_count == vc && r.solver == solver).collect();
            if cell.is_empty() {
                continue;
            }
            let feasible: Vec<&ExperimentReport> =
                cell.iter().filter_map(|r| r.report.as_ref()).collect();
            let collect = |f: &dyn Fn(&ExperimentReport) -> f64| -> Vec<f64> {
                feasible.iter().map(|r| f(r)).collect()
            };
            let mut per_type = BTreeMap::new();
            for ty in type_ids {
                let values: Vec<f64> = feasible
                    .iter()
                    .filter_map(|r| r.per_type_avg_delay_ms.get(ty).copied())
                    .collect();
                per_type.insert(ty.clone(), MeanStd::of(&values));
            }
            out.push(SummaryRecord {
                vehicle_count: vc,
                solver,
                runs: cell.len() as u32,
                feasible_runs: feasible.len() as u32,
                objective_ms: MeanStd::of(&collect(&|r| r.aggregate_avg_delay_ms)),
                per_type_avg_delay_ms: per_type,
                util_cpu: MeanStd::of(&collect(&|r| r.per_resource_utilization.cpu)),
                util_memory: MeanStd::of(&collect(&|r| r.per_resource_utilization.memory)),
                util_storage: MeanStd::of(&collect(&|r| r.per_resource_utilization.storage)),
                nodes_explored: MeanStd::of(&collect(&|r| r.nodes_explored as f64)),
                runtime_ms: MeanStd::of(&collect(&|r| r.runtime_ms)),
            });
        }
    }
    out
}

/// `runs.csv` content. Runtime is the last column so determinism checks
/// can strip it.
pub fn runs_csv(summary: &SweepSummary) -> String {
    let mut out = String::from("vehicle_count,repetition,solver,seed,status,feasible,objective_ms");
    for ty in &summary.type_ids {
        let _ = write!(out, ",avg_delay_ms:{ty}");
    }
    out.push_str(",util_cpu,util_memory,util_storage,nodes_explored,runtime_ms\n");

    for r in &summary.records {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            r.vehicle_count,
            r.repetition,
            r.solver,
            r.seed,
            r.status.label(),
            r.report.as_ref().map_or(false, |rep| rep.feasible),
        );
        match &r.report {
            Some(rep) => {
                let _ = write!(out, ",{}", rep.aggregate_avg_delay_ms);
                for ty in &summary.type_ids {
                    match rep.per_type_avg_delay_ms.get(ty) {
                        Some(v) => {
                            let _ = write!(out, ",{v}");
                        }
                        None => out.push(','),
                    }
                }
                let u = rep.per_resource_utilization;
                let _ = write!(out, ",{},{},{},{}", u.cpu, u.memory, u.storage, rep.nodes_explored);
            }
            None => {
                out.push(',');
                for _ in &summary.type_ids {
                    out.push(',');
                }
                out.push_str(",,,,");
            }
        }
        let _ = writeln!(out, ",{}", r.runtime_ms);
    }
    out
}

/// `summary.csv` content; runtime columns last.
pub fn summary_csv(summary: &SweepSummary) -> String {
    let mut out = String::from("vehicle_count,solver,runs,feasible_runs,mean_objective_ms,std_objective_ms");
    for ty in &summary.type_ids {
        let _ = write!(out, ",mean_avg_delay_ms:{ty},std_avg_delay_ms:{ty}");
    }
    out.push_str(
        ",mean_util_cpu,std_util_cpu,mean_util_memory,std_util_memory,\
         mean_util_storage,std_util_storage,mean_nodes_explored,std_nodes_explored,\
         mean_runtime_ms,std_runtime_ms\n",
    );
    for s in &summary.summaries {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            s.vehicle_count, s.solver, s.runs, s.feasible_runs, s.objective_ms.mean, s.objective_ms.std
        );
        for ty in &summary.type_ids {
            let cell = s.per_type_avg_delay_ms.get(ty).copied().unwrap_or_default();
            let _ = write!(out, ",{},{}", cell.mean, cell.std);
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{},{},{},{}",
            s.util_cpu.mean,
            s.util_cpu.std,
            s.util_memory.mean,
            s.util_memory.std,
            s.util_storage.mean,
            s.util_storage.std,
            s.nodes_explored.mean,
            s.nodes_explored.std,
            s.runtime_ms.mean,
            s.runtime_ms.std
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        action: "write",
        path: path.to_path_buf(),
        source,
    })
}

fn write_outputs(
    config: &RunConfig,
    summary: &SweepSummary,
    pooled: &BTreeMap<(u32, SolverKind, ServiceTypeId), Vec<f64>>,
) -> Result<(), HarnessError> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        action: "create",
        path: dir.clone(),
        source,
    })?;
    write_file(&dir.join("runs.csv"), &runs_csv(summary))?;
    write_file(&dir.join("summary.csv"), &summary_csv(summary))?;

    let hist_dir = dir.join("histograms");
    std::fs::create_dir_all(&hist_dir).map_err(|source| HarnessError::Io {
        action: "create",
        path: hist_dir.clone(),
        source,
    })?;
    for ((vc, solver, ty), samples) in pooled {
        if samples.is_empty() {
            continue;
        }
        let histogram = Histogram::from_samples(samples, config.histogram_bin_width_ms)?;
        let name = format!("vc{vc}_{solver}_{ty}.csv");
        write_file(&hist_dir.join(name), &histogram.to_csv())?;
    }

    if config.emit_json {
        // The JSON mirror drops the raw sample vectors; they are fully
        // represented by the histogram files.
        let mut slim = summary.clone();
        for record in &mut slim.records {
            if let Some(report) = &mut record.report {
                report.per_type_delay_samples_ms.clear();
            }
        }
        let runs_json = serde_json::to_string_pretty(&slim.records).expect("serializable");
        write_file(&dir.join("runs.json"), &runs_json)?;
        let summaries_json = serde_json::to_string_pretty(&slim.summaries).expect("serializable");
        write_file(&dir.join("summary.json"), &summaries_json)?;
    }
    Ok(())
}

/// Outcome of validating an externally produced placement file.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationOutcome {
    pub report: FeasibilityReport,
    pub recomputed_objective_ms: f64,
    pub stored_objective_ms: f64,
    pub objective_consistent: bool,
}

/// Load a JSON file, reporting parse failures with file/line context.
pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        action: "read",
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|source| HarnessError::Parse { path: path.to_path_buf(), source })
}

/// Check an externally produced placement against a problem file: runs the
/// full feasibility check and recomputes the objective.
pub fn validate_placement_file(
    problem_path: &Path,
    placement_path: &Path,
) -> Result<ValidationOutcome, HarnessError> {
    let problem: PlacementProblem = load_json(problem_path)?;
    let placement: Placement = load_json(placement_path)?;
    let report = check_feasibility(&problem, &placement)?;
    let recomputed = match evaluate_objective(&problem, &placement) {
        Ok(value) => value,
        // An incomplete assignment has no objective; surface the violations
        // instead of failing.
        Err(ModelError::AssignmentIncomplete(_)) => f64::NAN,
        Err(err) => return Err(err.into()),
    };
    let objective_consistent = crate::model::relative_eq(
        placement.objective_ms,
        recomputed,
        crate::model::OBJECTIVE_REL_TOL,
    );
    Ok(ValidationOutcome {
        report,
        recomputed_objective_ms: recomputed,
        stored_objective_ms: placement.objective_ms,
        objective_consistent,
    })
}

/// Run one solver on one problem with the harness's settings; used by the
/// CLI `solve` subcommand.
pub fn solve_one(
    problem: &PlacementProblem,
    solver: SolverKind,
    greedy_delay_check: DelayCheck,
    ga: &GaConfig,
) -> Result<(Placement, SolveStats), SolveError> {
    match solver {
        SolverKind::Exact => solve_exact(problem),
        SolverKind::Greedy => solve_greedy(problem, greedy_delay_check),
        SolverKind::Ga => solve_ga(problem, ga),
    }
}

/// Expose the brute-force oracle for debugging workflows.
pub fn solve_oracle(problem: &PlacementProblem) -> Result<(Placement, SolveStats), SolveError> {
    solve_bruteforce(problem)
}
