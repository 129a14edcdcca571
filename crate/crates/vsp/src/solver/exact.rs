//! Depth-first branch and bound over instance→node assignments.
//!
//! Instances are processed in ascending order of their type's delay
//! threshold (the scarcest placements first). Each branch assigns the
//! current instance to a node that is admissible for its type's worst-case
//! delay constraint, has remaining capacity, and — because instances of a
//! type are interchangeable — carries a node index strictly greater than
//! the node of the type's previously placed instance. That last rule is
//! symmetry breaking: it explores one representative per set of nodes
//! rather than every permutation, and it also enforces anti-affinity.
//! Candidates are tried in ascending mean-delay order so the first leaf is
//! already a strong incumbent.
//!
//! The lower bound for a partial assignment is the objective of the
//! relaxed completion in which every unassigned instance takes its type's
//! minimum-mean admissible node, ignoring capacity and anti-affinity.
//! Because the bound and every leaf are evaluated by the same canonical
//! value-sorted summation, the bound's float value never exceeds any leaf
//! value it relaxes, so pruning at `bound ≥ incumbent` is safe to the last
//! bit.

use super::{SolveError, SolveStats, SolverView};
use crate::model::{Placement, PlacementProblem, ResourceVector};
use std::time::Instant;

/// Solve to proven optimality.
pub fn solve_exact(problem: &PlacementProblem) -> Result<(Placement, SolveStats), SolveError> {
    solve_exact_with_budget(problem, None)
}

/// Solve to proven optimality, aborting with
/// [`SolveError::NodeBudgetExceeded`] once the search has taken more than
/// `budget` branch steps.
pub fn solve_exact_with_budget(
    problem: &PlacementProblem,
    budget: Option<u64>,
) -> Result<(Placement, SolveStats), SolveError> {
    let start = Instant::now();
    let view = SolverView::new(problem)?;
    let order = view.instances_by_threshold();

    let n_types = problem.types().len();
    let candidates: Vec<Vec<usize>> = (0..n_types).map(|t| view.nodes_by_mean(t)).collect();

    // The worst-case delay constraint alone refutes some problems outright:
    // a type with fewer admissible nodes than instances can never satisfy
    // anti-affinity.
    for t in 0..n_types {
        if problem.instances_of_type(t).len() > candidates[t].len() {
            return Err(SolveError::Infeasible);
        }
    }

    let min_node_by_type: Vec<Option<usize>> =
        candidates.iter().map(|c| c.first().copied()).collect();

    // Assignment vector doubling as the bound's relaxed completion:
    // unassigned instances sit on their type's minimum-mean node.
    let mut assignment: Vec<usize> = (0..problem.instances().len())
        .map(|s| min_node_by_type[problem.type_of_instance(s)].expect("checked above"))
        .collect();

    let mut search = Search {
        view: &view,
        order: &order,
        candidates: &candidates,
        min_node_by_type: &min_node_by_type,
        remaining: problem.nodes().iter().map(|n| n.capacity).collect(),
        type_floor: vec![0; n_types],
        assignment: &mut assignment,
        incumbent: None,
        leaves: 0,
        steps: 0,
        budget,
    };
    search.descend(0)?;

    let Search { incumbent, leaves, .. } = search;
    match incumbent {
        Some((objective, best)) => {
            let placement = Placement::from_indices(problem, &view.stats, &best);
            debug_assert_eq!(placement.objective_ms, objective);
            Ok((
                placement,
                SolveStats {
                    nodes_explored: leaves,
                    runtime_ms: start.elapsed().as_secs_f64() * 1e3,
                    proven_optimal: true,
                },
            ))
        }
        None => Err(SolveError::Infeasible),
    }
}

struct Search<'a, 'b> {
    view: &'a SolverView<'a>,
    order: &'a [usize],
    candidates: &'a [Vec<usize>],
    min_node_by_type: &'a [Option<usize>],
    remaining: Vec<ResourceVector>,
    type_floor: Vec<usize>,
    assignment: &'b mut Vec<usize>,
    incumbent: Option<(f64, Vec<usize>)>,
    leaves: u64,
    steps: u64,
    budget: Option<u64>,
}

impl Search<'_, '_> {
    fn descend(&mut self, depth: usize) -> Result<(), SolveError> {
        if depth == self.order.len() {
            self.leaves += 1;
            let objective = self.view.stats.objective_ms(self.view.problem, self.assignment);
            // Reaching a leaf implies its bound beat the incumbent, which
            // for a complete assignment is the objective itself; the
            // improvement is always strict.
            let improves = match &self.incumbent {
                None => true,
                Some((best, _)) => objective < *best,
            };
            if improves {
                self.incumbent = Some((objective, self.assignment.clone()));
            }
            return Ok(());
        }

        let s = self.order[depth];
        let t = self.view.problem.type_of_instance(s);
        let demand = self.view.problem.types()[t].demand;

        for i in 0..self.candidates[t].len() {
            let c = self.candidates[t][i];
            if c < self.type_floor[t] {
                continue;
            }
            if !demand.fits_within(&self.remaining[c]) {
                continue;
            }

            self.steps += 1;
            if let Some(budget) = self.budget {
                if self.steps > budget {
                    return Err(SolveError::NodeBudgetExceeded { budget });
                }
            }

            let previous_floor = self.type_floor[t];
            self.assignment[s] = c;
            self.remaining[c] = self.remaining[c].sub(&demand);
            self.type_floor[t] = c + 1;

            let bound = self.view.stats.objective_ms(self.view.problem, self.assignment);
            let worth_exploring = match &self.incumbent {
                None => true,
                Some((best, _)) => bound < *best,
            };
            if worth_exploring {
                let result = self.descend(depth + 1);
                if result.is_err() {
                    return result;
                }
            }

            self.remaining[c] = self.remaining[c].add(&demand);
            self.assignment[s] = self.min_node_by_type[t].expect("type has admissible nodes");
            self.type_floor[t] = previous_floor;
        }
        Ok(())
    }
}

/// Upper bound on the number of leaves the symmetry-reduced exact search
/// can visit: the product over types of C(admissible nodes, instances).
/// The harness compares this against its node budget before attempting an
/// exact solve on large problems.
pub fn projected_leaf_count(problem: &PlacementProblem) -> Result<f64, SolveError> {
    let view = SolverView::new(problem)?;
    let mut product = 1.0f64;
    for t in 0..problem.types().len() {
        let admissible = (0..problem.nodes().len()).filter(|&c| view.admissible[t][c]).count();
        let k = problem.instances_of_type(t).len();
        product *= binomial(admissible, k);
    }
    Ok(product)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
