//! Placement solvers.
//!
//! All solvers consume the same [`PlacementProblem`] and produce a
//! [`Placement`] plus [`SolveStats`]. They are deterministic: identical
//! inputs (and, for the genetic algorithm, an identical seed) yield
//! identical outputs. Runs on distinct problems share no mutable state and
//! may execute concurrently.

mod brute;
mod exact;
mod ga;
mod greedy;

pub use brute::{solve_bruteforce, BRUTE_FORCE_GUARD};
pub use exact::{projected_leaf_count, solve_exact, solve_exact_with_budget};
pub use ga::{solve_ga, GaConfig};
pub use greedy::solve_greedy;

use crate::model::{DelayStats, InstanceId, ModelError, PlacementProblem};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Which per-node delay statistic the greedy admissibility test uses.
///
/// The placement model's delay constraint bounds the worst-case vehicle
/// delay (`Max`), which is the default; `Mean` instead tests the mean that
/// also drives node selection, reproducing the greedy pseudocode literally
/// at the cost of possibly emitting placements the model considers
/// infeasible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DelayCheck {
    #[default]
    Max,
    Mean,
}

/// Solver selector used by the harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Greedy,
    Ga,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Exact, SolverKind::Greedy, SolverKind::Ga];

    pub fn label(&self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Greedy => "greedy",
            SolverKind::Ga => "ga",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How much work a solve did.
///
/// `nodes_explored` counts the solver's basic unit of work: complete
/// assignments evaluated for the exact and brute-force solvers, candidate
/// nodes evaluated for the greedy solver, fitness evaluations for the
/// genetic algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes_explored: u64,
    pub runtime_ms: f64,
    pub proven_optimal: bool,
}

#[derive(Debug, Error)]
pub enum SolveError {
    /// No assignment satisfies all constraints.
    #[error("no feasible placement exists")]
    Infeasible,
    /// Greedy-specific infeasibility: the named instance ran out of
    /// candidate nodes.
    #[error("no candidate node remains for instance `{0}`")]
    InstanceStuck(InstanceId),
    /// Brute-force enumeration guard tripped.
    #[error("search space of {size:.3e} assignments exceeds the enumeration guard of {guard:.1e}")]
    SearchSpaceTooLarge { size: f64, guard: f64 },
    /// Exact search aborted after exceeding its node budget.
    #[error("branch-and-bound exceeded its node budget of {budget}")]
    NodeBudgetExceeded { budget: u64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SolveError {
    /// True for both infeasibility flavors.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, SolveError::Infeasible | SolveError::InstanceStuck(_))
    }
}

/// Shared per-problem precomputation: delay statistics plus, per type, the
/// set of nodes admissible under the worst-case-delay constraint.
pub(crate) struct SolverView<'a> {
    pub problem: &'a PlacementProblem,
    pub stats: DelayStats,
    /// `admissible[t][c]`: node `c`'s worst-case vehicle delay is within
    /// type `t`'s threshold.
    pub admissible: Vec<Vec<bool>>,
}

impl<'a> SolverView<'a> {
    pub fn new(problem: &'a PlacementProblem) -> Result<Self, SolveError> {
        let stats = DelayStats::new(problem)?;
        let admissible = problem
            .types()
            .iter()
            .map(|t| {
                (0..problem.nodes().len())
                    .map(|c| stats.node_max_ms(c) <= t.delay_threshold_ms)
                    .collect()
            })
            .collect();
        Ok(Self { problem, stats, admissible })
    }

    /// Node indices admissible for type `t`, sorted by (mean delay, index).
    pub fn nodes_by_mean(&self, type_idx: usize) -> Vec<usize> {
        let mut nodes: Vec<usize> =
            (0..self.problem.nodes().len()).filter(|&c| self.admissible[type_idx][c]).collect();
        nodes.sort_by(|&a, &b| {
            (self.stats.node_mean_ms(a), a)
                .partial_cmp(&(self.stats.node_mean_ms(b), b))
                .expect("finite delays")
        });
        nodes
    }

    /// Instance indices in search order: ascending type delay threshold,
    /// ties by input order.
    pub fn instances_by_threshold(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.problem.instances().len()).collect();
        order.sort_by(|&a, &b| {
            let ta = self.problem.type_of_instance_ref(a).delay_threshold_ms;
            let tb = self.problem.type_of_instance_ref(b).delay_threshold_ms;
            ta.partial_cmp(&tb).expect("finite thresholds").then(a.cmp(&b))
        });
        order
    }
}
