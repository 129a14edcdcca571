//! Exhaustive enumeration over all total assignments.
//!
//! This is the optimality oracle: it enumerates every one of the
//! `|nodes|^|instances|` complete assignments in lexicographic order,
//! filters them through the full feasibility check, and keeps the minimum
//! objective (first-seen wins ties, i.e. the lexicographically smallest
//! assignment vector). It shares no search machinery with the
//! branch-and-bound solver.

use super::{SolveError, SolveStats};
use crate::model::{self, DelayStats, Placement, PlacementProblem};
use std::time::Instant;

/// Enumeration refuses to run above this many assignments.
pub const BRUTE_FORCE_GUARD: f64 = 1e7;

/// Enumerate all total assignments and return the feasible minimum.
pub fn solve_bruteforce(problem: &PlacementProblem) -> Result<(Placement, SolveStats), SolveError> {
    let start = Instant::now();
    let n_nodes = problem.nodes().len();
    let n_instances = problem.instances().len();

    let size = (n_nodes as f64).powi(n_instances as i32);
    if size > BRUTE_FORCE_GUARD {
        return Err(SolveError::SearchSpaceTooLarge { size, guard: BRUTE_FORCE_GUARD });
    }

    let stats = DelayStats::new(problem)?;
    let node_max = model::max_delay_per_node(problem);

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut explored: u64 = 0;

    if n_instances == 0 {
        // The single empty assignment is trivially feasible.
        let placement = Placement::from_indices(problem, &stats, &[]);
        return Ok((
            placement,
            SolveStats { nodes_explored: 1, runtime_ms: elapsed_ms(start), proven_optimal: true },
        ));
    }
    if n_nodes == 0 {
        return Err(SolveError::Infeasible);
    }

    let mut current = vec![0usize; n_instances];
    let mut slots: Vec<Option<usize>> = vec![Some(0); n_instances];
    'enumerate: loop {
        explored += 1;
        for (slot, &c) in slots.iter_mut().zip(current.iter()) {
            *slot = Some(c);
        }
        if model::check_with_node_max(problem, &node_max, &slots).is_feasible() {
            let objective = stats.objective_ms(problem, &current);
            let better = match &best {
                None => true,
                Some((incumbent, _)) => objective < *incumbent,
            };
            if better {
                best = Some((objective, current.clone()));
            }
        }

        // Odometer step: the last instance varies fastest, so assignments
        // come out in lexicographic vector order and strict improvement
        // keeps the lexicographically smallest optimum.
        let mut pos = n_instances;
        while pos > 0 {
            pos -= 1;
            current[pos] += 1;
            if current[pos] < n_nodes {
                continue 'enumerate;
            }
            current[pos] = 0;
        }
        break;
    }

    match best {
        Some((_, assignment)) => {
            let placement = Placement::from_indices(problem, &stats, &assignment);
            Ok((
                placement,
                SolveStats {
                    nodes_explored: explored,
                    runtime_ms: elapsed_ms(start),
                    proven_optimal: true,
                },
            ))
        }
        None => Err(SolveError::Infeasible),
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
