//! Greedy placement: least delay-tolerant services first, each instance at
//! the lowest-mean-delay node that still fits it.
//!
//! Service types are sorted by ascending delay threshold (ties keep input
//! order). Each type starts with the full node set as candidates; placing
//! an instance removes its node from the type's candidates, which enforces
//! anti-affinity by construction. For each instance the candidates are
//! scanned in ascending (mean delay, node index) order; a node is accepted
//! when the demand fits its remaining capacity and the delay statistic
//! selected by [`DelayCheck`] is within the type's threshold, otherwise the
//! scan moves to the next-best node. An instance that rejects every
//! candidate makes the solve infeasible and is named in the error.
//!
//! Every scanned candidate counts one unit towards
//! `SolveStats::nodes_explored`; the scan visits each node at most once per
//! instance, so the total is at most `|nodes| · |instances|`.

use super::{DelayCheck, SolveError, SolveStats, SolverView};
use crate::model::{Placement, PlacementProblem};
use std::time::Instant;

pub fn solve_greedy(
    problem: &PlacementProblem,
    delay_check: DelayCheck,
) -> Result<(Placement, SolveStats), SolveError> {
    let start = Instant::now();
    let view = SolverView::new(problem)?;

    // Types in ascending threshold order, stable in input order.
    let mut type_order: Vec<usize> = (0..problem.types().len()).collect();
    type_order.sort_by(|&a, &b| {
        problem.types()[a]
            .delay_threshold_ms
            .partial_cmp(&problem.types()[b].delay_threshold_ms)
            .expect("finite thresholds")
            .then(a.cmp(&b))
    });

    // All nodes sorted once by (mean delay, index); per-type candidate sets
    // start full and shrink as instances are placed.
    let mut nodes_by_mean: Vec<usize> = (0..problem.nodes().len()).collect();
    nodes_by_mean.sort_by(|&a, &b| {
        (view.stats.node_mean_ms(a), a)
            .partial_cmp(&(view.stats.node_mean_ms(b), b))
            .expect("finite delays")
    });

    let mut remaining: Vec<_> = problem.nodes().iter().map(|n| n.capacity).collect();
    let mut assignment = vec![0usize; problem.instances().len()];
    let mut evaluations: u64 = 0;

    for &t in &type_order {
        let ty = &problem.types()[t];
        let mut taken_by_type = vec![false; problem.nodes().len()];
        for &s in problem.instances_of_type(t) {
            let mut placed = false;
            for &c in &nodes_by_mean {
                if taken_by_type[c] {
                    continue;
                }
                evaluations += 1;
                let delay_ok = match delay_check {
                    DelayCheck::Max => view.stats.node_max_ms(c) <= ty.delay_threshold_ms,
                    DelayCheck::Mean => view.stats.node_mean_ms(c) <= ty.delay_threshold_ms,
                };
                if delay_ok && ty.demand.fits_within(&remaining[c]) {
                    assignment[s] = c;
                    remaining[c] = remaining[c].sub(&ty.demand);
                    taken_by_type[c] = true;
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(SolveError::InstanceStuck(problem.instances()[s].id.clone()));
            }
        }
    }

    let placement = Placement::from_indices(problem, &view.stats, &assignment);
    Ok((
        placement,
        SolveStats {
            nodes_explored: evaluations,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            proven_optimal: false,
        },
    ))
}
