//! Placements, the objective, and the feasibility check.

use super::types::{InstanceId, NodeId, ResourceKind, ResourceVector, ServiceTypeId};
use super::{DelayStats, ModelError, PlacementProblem, OBJECTIVE_REL_TOL};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Instance → node map. `BTreeMap` keeps serialization order stable.
pub type Assignment = BTreeMap<InstanceId, NodeId>;

/// A placement decision together with its aggregate average delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub assignment: Assignment,
    pub objective_ms: f64,
}

impl Placement {
    /// Build a placement from a total assignment, computing the objective.
    pub fn new(problem: &PlacementProblem, assignment: Assignment) -> Result<Self, ModelError> {
        let objective_ms = objective_of_assignment(problem, &assignment)?;
        Ok(Self { assignment, objective_ms })
    }

    pub(crate) fn from_indices(problem: &PlacementProblem, stats: &DelayStats, nodes: &[usize]) -> Self {
        let mut assignment = Assignment::new();
        for (s, &c) in nodes.iter().enumerate() {
            assignment.insert(problem.instances()[s].id.clone(), problem.nodes()[c].id.clone());
        }
        let objective_ms = stats.objective_ms(problem, nodes);
        Self { assignment, objective_ms }
    }

    /// True when the stored objective matches a recomputation within the
    /// model's relative tolerance.
    pub fn objective_consistent(&self, problem: &PlacementProblem) -> Result<bool, ModelError> {
        let recomputed = objective_of_assignment(problem, &self.assignment)?;
        Ok(super::relative_eq(self.objective_ms, recomputed, OBJECTIVE_REL_TOL))
    }
}

/// Aggregate average delay of a placement:
/// Σ over instances of (1/|V|) Σ over vehicles of the delay towards the
/// assigned node.
///
/// Errors when an instance is unassigned or there are no vehicles; an empty
/// instance list yields 0.
pub fn evaluate_objective(problem: &PlacementProblem, placement: &Placement) -> Result<f64, ModelError> {
    objective_of_assignment(problem, &placement.assignment)
}

fn objective_of_assignment(problem: &PlacementProblem, assignment: &Assignment) -> Result<f64, ModelError> {
    if problem.vehicle_count() == 0 {
        return Err(ModelError::DegenerateProblem);
    }
    let resolved = problem.resolve_assignment(assignment)?;
    let mut nodes = Vec::with_capacity(resolved.len());
    for (s, c) in resolved.iter().enumerate() {
        match c {
            Some(c) => nodes.push(*c),
            None => {
                return Err(ModelError::AssignmentIncomplete(problem.instances()[s].id.clone()))
            }
        }
    }
    let stats = DelayStats::new(problem)?;
    Ok(stats.objective_ms(problem, &nodes))
}

/// One violated constraint, with the offending entity and the numbers that
/// witnessed the violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The worst-case vehicle delay towards the assigned node exceeds the
    /// instance's type threshold.
    DelayThresholdExceeded {
        instance: InstanceId,
        node: NodeId,
        max_delay_ms: f64,
        threshold_ms: f64,
    },
    /// A node's hosted demand exceeds its capacity in one resource dimension.
    CapacityExceeded {
        node: NodeId,
        resource: ResourceKind,
        used: f64,
        capacity: f64,
    },
    /// Fewer instances of a type are placed than its redundancy requirement.
    RedundancyUnmet {
        service_type: ServiceTypeId,
        placed: usize,
        required: u32,
    },
    /// Two or more instances of one type share a node.
    AntiAffinityViolated {
        service_type: ServiceTypeId,
        node: NodeId,
        instances: Vec<InstanceId>,
    },
    /// An instance is not assigned to any node.
    InstanceUnplaced { instance: InstanceId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DelayThresholdExceeded { instance, node, max_delay_ms, threshold_ms } => {
                write!(
                    f,
                    "delay threshold: instance `{instance}` on node `{node}` has worst-case \
                     vehicle delay {max_delay_ms:.3} ms > threshold {threshold_ms:.3} ms"
                )
            }
            Violation::CapacityExceeded { node, resource, used, capacity } => write!(
                f,
                "capacity: node `{node}` {} usage {used} exceeds capacity {capacity}",
                resource.label()
            ),
            Violation::RedundancyUnmet { service_type, placed, required } => write!(
                f,
                "redundancy: type `{service_type}` has {placed} placed instances, requires {required}"
            ),
            Violation::AntiAffinityViolated { service_type, node, instances } => {
                let ids: Vec<&str> = instances.iter().map(|i| i.as_str()).collect();
                write!(
                    f,
                    "anti-affinity: node `{node}` hosts {} instances of type `{service_type}` ({})",
                    instances.len(),
                    ids.join(", ")
                )
            }
            Violation::InstanceUnplaced { instance } => {
                write!(f, "placement: instance `{instance}` is not assigned to any node")
            }
        }
    }
}

/// Outcome of [`check_feasibility`]: empty means feasible. Violations are
/// data, not errors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count_of(&self, predicate: impl Fn(&Violation) -> bool) -> usize {
        self.violations.iter().filter(|v| predicate(v)).count()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_feasible() {
            writeln!(f, "feasible: no constraint violations")
        } else {
            writeln!(f, "{} constraint violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

/// Check every constraint family against a (possibly partial) placement.
///
/// * delay threshold — per instance, worst-case vehicle delay ≤ its type's
///   threshold;
/// * capacity — per node and resource dimension, hosted demand ≤ capacity;
/// * redundancy — per type, placed instances ≥ the requirement;
/// * anti-affinity — per type, at most one instance per node;
/// * completeness — every instance assigned to exactly one node.
///
/// Errors only on malformed input (ids that do not resolve).
pub fn check_feasibility(
    problem: &PlacementProblem,
    placement: &Placement,
) -> Result<FeasibilityReport, ModelError> {
    let resolved = problem.resolve_assignment(&placement.assignment)?;
    Ok(check_index_assignment(problem, &resolved))
}

/// Index-level feasibility check; `None` marks an unplaced instance.
pub fn check_index_assignment(problem: &PlacementProblem, assignment: &[Option<usize>]) -> FeasibilityReport {
    let node_max = max_delay_per_node(problem);
    check_with_node_max(problem, &node_max, assignment)
}

/// Worst-case vehicle delay per node; empty vehicle set leaves the delay
/// constraint vacuous (−∞ compares below every threshold).
pub(crate) fn max_delay_per_node(problem: &PlacementProblem) -> Vec<f64> {
    (0..problem.nodes().len())
        .map(|c| problem.delay_matrix().node_column(c).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

pub(crate) fn check_with_node_max(
    problem: &PlacementProblem,
    node_max: &[f64],
    assignment: &[Option<usize>],
) -> FeasibilityReport {
    debug_assert_eq!(assignment.len(), problem.instances().len());
    let mut violations = Vec::new();

    // Delay thresholds, per assigned instance.
    for (s, instance) in problem.instances().iter().enumerate() {
        if let Some(c) = assignment[s] {
            let ty = problem.type_of_instance_ref(s);
            if node_max[c] > ty.delay_threshold_ms {
                violations.push(Violation::DelayThresholdExceeded {
                    instance: instance.id.clone(),
                    node: problem.nodes()[c].id.clone(),
                    max_delay_ms: node_max[c],
                    threshold_ms: ty.delay_threshold_ms,
                });
            }
        }
    }

    // Capacities, per node and resource dimension.
    let mut used = vec![ResourceVector::ZERO; problem.nodes().len()];
    for (s, c) in assignment.iter().enumerate() {
        if let Some(c) = *c {
            used[c] = used[c].add(&problem.type_of_instance_ref(s).demand);
        }
    }
    for (c, node) in problem.nodes().iter().enumerate() {
        for kind in ResourceKind::ALL {
            let u = used[c].component(kind);
            let cap = node.capacity.component(kind);
            if u > cap {
                violations.push(Violation::CapacityExceeded {
                    node: node.id.clone(),
                    resource: kind,
                    used: u,
                    capacity: cap,
                });
            }
        }
    }

    // Redundancy, per type (counts placed instances).
    for (t, ty) in problem.types().iter().enumerate() {
        let placed = problem.instances_of_type(t).iter().filter(|&&s| assignment[s].is_some()).count();
        if placed < ty.redundancy_requirement as usize {
            violations.push(Violation::RedundancyUnmet {
                service_type: ty.id.clone(),
                placed,
                required: ty.redundancy_requirement,
            });
        }
    }

    // Anti-affinity, per (type, node).
    for (t, ty) in problem.types().iter().enumerate() {
        let mut per_node: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &s in problem.instances_of_type(t) {
            if let Some(c) = assignment[s] {
                per_node.entry(c).or_default().push(s);
            }
        }
        for (c, members) in per_node {
            if members.len() > 1 {
                violations.push(Violation::AntiAffinityViolated {
                    service_type: ty.id.clone(),
                    node: problem.nodes()[c].id.clone(),
                    instances: members.iter().map(|&s| problem.instances()[s].id.clone()).collect(),
                });
            }
        }
    }

    // Completeness.
    for (s, c) in assignment.iter().enumerate() {
        if c.is_none() {
            violations.push(Violation::InstanceUnplaced { instance: problem.instances()[s].id.clone() });
        }
    }

    FeasibilityReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ComputeNode, DelayMatrix, NodeTier, ServiceClass, ServiceInstance, ServiceType};

    fn ty(id: &str, threshold: f64, demand: ResourceVector, red: u32) -> ServiceType {
        ServiceType {
            id: id.into(),
            name: ServiceClass::Cam,
            delay_threshold_ms: threshold,
            demand,
            redundancy_requirement: red,
        }
    }

    fn node(id: &str, cap: ResourceVector) -> ComputeNode {
        ComputeNode { id: id.into(), tier: NodeTier::Enb, capacity: cap }
    }

    fn inst(id: &str, t: &str) -> ServiceInstance {
        ServiceInstance { id: id.into(), type_ref: t.into() }
    }

    /// Three services on three nodes serving two vehicles, with constant
    /// per-tier delays 100 / 30 / 5 ms and one-instance node capacities.
    pub(crate) fn three_tier_example() -> PlacementProblem {
        let unit = ResourceVector::new(1.0, 1.0, 1.0);
        PlacementProblem::new(
            vec![
                ty("svc1", 150.0, unit, 1),
                ty("svc2", 50.0, unit, 1),
                ty("svc3", 20.0, unit, 1),
            ],
            vec![inst("svc1-0", "svc1"), inst("svc2-0", "svc2"), inst("svc3-0", "svc3")],
            vec![
                ComputeNode { id: "core-0".into(), tier: NodeTier::Core, capacity: unit },
                ComputeNode { id: "enb-0".into(), tier: NodeTier::Enb, capacity: unit },
                ComputeNode { id: "rsu-0".into(), tier: NodeTier::Rsu, capacity: unit },
            ],
            2,
            DelayMatrix::new(vec![vec![100.0, 30.0, 5.0], vec![100.0, 30.0, 5.0]]),
        )
        .unwrap()
    }

    #[test]
    fn objective_of_three_tier_example_is_135() {
        let problem = three_tier_example();
        let mut assignment = Assignment::new();
        assignment.insert("svc1-0".into(), "core-0".into());
        assignment.insert("svc2-0".into(), "enb-0".into());
        assignment.insert("svc3-0".into(), "rsu-0".into());
        let placement = Placement::new(&problem, assignment).unwrap();
        assert_eq!(placement.objective_ms, 135.0);
        assert_eq!(evaluate_objective(&problem, &placement).unwrap(), 135.0);
        assert!(check_feasibility(&problem, &placement).unwrap().is_feasible());
    }

    #[test]
    fn empty_instance_list_has_zero_objective_and_empty_report() {
        let problem = PlacementProblem::new(
            vec![],
            vec![],
            vec![node("n0", ResourceVector::new(1.0, 1.0, 1.0))],
            3,
            DelayMatrix::new(vec![vec![1.0], vec![2.0], vec![3.0]]),
        )
        .unwrap();
        let placement = Placement::new(&problem, Assignment::new()).unwrap();
        assert_eq!(placement.objective_ms, 0.0);
        assert!(check_feasibility(&problem, &placement).unwrap().is_feasible());
    }

    #[test]
    fn zero_vehicles_is_degenerate_for_the_objective() {
        let problem = PlacementProblem::new(
            vec![ty("a", 20.0, ResourceVector::new(1.0, 1.0, 1.0), 1)],
            vec![inst("a-0", "a")],
            vec![node("n0", ResourceVector::new(2.0, 2.0, 2.0))],
            0,
            DelayMatrix::new(vec![]),
        )
        .unwrap();
        let mut assignment = Assignment::new();
        assignment.insert("a-0".into(), "n0".into());
        assert!(matches!(
            Placement::new(&problem, assignment),
            Err(ModelError::DegenerateProblem)
        ));
    }

    #[test]
    fn missing_assignment_is_an_error_for_the_objective() {
        let problem = three_tier_example();
        let placement = Placement { assignment: Assignment::new(), objective_ms: 0.0 };
        assert!(matches!(
            evaluate_objective(&problem, &placement),
            Err(ModelError::AssignmentIncomplete(_))
        ));
    }

    #[test]
    fn delay_threshold_violation_is_reported_once() {
        // A 20 ms service on a node whose worst vehicle delay is 35 ms.
        let problem = PlacementProblem::new(
            vec![ty("cam", 20.0, ResourceVector::new(2.0, 3.5, 4.0), 1)],
            vec![inst("cam-0", "cam")],
            vec![node("enb-0", ResourceVector::new(8.0, 16.0, 240.0))],
            2,
            DelayMatrix::new(vec![vec![25.0], vec![35.0]]),
        )
        .unwrap();
        let mut assignment = Assignment::new();
        assignment.insert("cam-0".into(), "enb-0".into());
        let placement = Placement::new(&problem, assignment).unwrap();
        let report = check_feasibility(&problem, &placement).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            &report.violations[0],
            Violation::DelayThresholdExceeded { max_delay_ms, threshold_ms, .. }
                if *max_delay_ms == 35.0 && *threshold_ms == 20.0
        ));
    }

    #[test]
    fn capacity_violations_reported_per_dimension() {
        // One node (8, 16, 240) hosting one large (4, 7, 4) and one
        // extra-large (8, 14, 40) instance: cpu and memory overflow,
        // storage does not.
        let problem = PlacementProblem::new(
            vec![
                ty("denm", 1000.0, ResourceVector::new(4.0, 7.0, 4.0), 1),
                ty("media", 1000.0, ResourceVector::new(8.0, 14.0, 40.0), 1),
            ],
            vec![inst("denm-0", "denm"), inst("media-0", "media")],
            vec![node("n0", ResourceVector::new(8.0, 16.0, 240.0)), node("n1", ResourceVector::new(8.0, 16.0, 240.0))],
            1,
            DelayMatrix::new(vec![vec![5.0, 5.0]]),
        )
        .unwrap();
        let mut assignment = Assignment::new();
        assignment.insert("denm-0".into(), "n0".into());
        assignment.insert("media-0".into(), "n0".into());
        let placement = Placement::new(&problem, assignment).unwrap();
        let report = check_feasibility(&problem, &placement).unwrap();
        let caps: Vec<_> = report
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::CapacityExceeded { resource, used, capacity, .. } => {
                    Some((*resource, *used, *capacity))
                }
                _ => None,
            })
            .collect();
        assert_eq!(
            caps,
            vec![(ResourceKind::Cpu, 12.0, 8.0), (ResourceKind::Memory, 21.0, 16.0)]
        );
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn anti_affinity_and_unplaced_are_flagged() {
        let unit = ResourceVector::new(1.0, 1.0, 1.0);
        let problem = PlacementProblem::new(
            vec![ty("a", 100.0, unit, 2)],
            vec![inst("a-0", "a"), inst("a-1", "a")],
            vec![node("n0", ResourceVector::new(4.0, 4.0, 4.0)), node("n1", ResourceVector::new(4.0, 4.0, 4.0))],
            1,
            DelayMatrix::new(vec![vec![1.0, 2.0]]),
        )
        .unwrap();

        // Both instances on one node.
        let mut doubled = Assignment::new();
        doubled.insert("a-0".into(), "n0".into());
        doubled.insert("a-1".into(), "n0".into());
        let report =
            check_feasibility(&problem, &Placement::new(&problem, doubled).unwrap()).unwrap();
        assert_eq!(report.count_of(|v| matches!(v, Violation::AntiAffinityViolated { .. })), 1);

        // One instance missing: unplaced plus unmet redundancy.
        let mut partial = Assignment::new();
        partial.insert("a-0".into(), "n0".into());
        let report = check_index_assignment(&problem, &problem.resolve_assignment(&partial).unwrap());
        assert_eq!(report.count_of(|v| matches!(v, Violation::InstanceUnplaced { .. })), 1);
        assert_eq!(report.count_of(|v| matches!(v, Violation::RedundancyUnmet { .. })), 1);
    }

    #[test]
    fn unknown_ids_are_errors_not_violations() {
        let problem = three_tier_example();
        let mut assignment = Assignment::new();
        assignment.insert("ghost".into(), "core-0".into());
        let placement = Placement { assignment, objective_ms: 0.0 };
        assert!(matches!(
            check_feasibility(&problem, &placement),
            Err(ModelError::UnknownInstance(_))
        ));
    }
}
