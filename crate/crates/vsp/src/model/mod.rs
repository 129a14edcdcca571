//! The placement model: entities, the delay objective, and the feasibility
//! constraints shared by every solver and the experiment harness.
//!
//! A [`PlacementProblem`] is a static snapshot: a set of service instances
//! (grouped into unique types), a set of compute nodes with capacities, and
//! a matrix of per-(vehicle, node) access delays. A [`Placement`] assigns
//! each instance to exactly one node. The objective is the aggregate
//! average delay: for each placed instance, the mean over vehicles of the
//! delay towards its node, summed over instances.
//!
//! All types are immutable after construction and all operations are pure,
//! so shared problem data can be evaluated concurrently.

mod placement;
mod types;

pub use placement::{
    check_feasibility, check_index_assignment, evaluate_objective, Assignment, FeasibilityReport,
    Placement, Violation,
};
pub(crate) use placement::{check_with_node_max, max_delay_per_node};
pub use types::{
    ComputeNode, DelayMatrix, InstanceId, NodeId, NodeTier, ResourceKind, ResourceVector,
    ServiceClass, ServiceInstance, ServiceType, ServiceTypeId,
};

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Relative tolerance for objective-value equality checks.
pub const OBJECTIVE_REL_TOL: f64 = 1e-9;

/// `|a - b| ≤ tol · max(|a|, |b|)`, with exact equality accepted (covers 0 = 0).
pub fn relative_eq(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("instance `{instance}` references unknown service type `{type_ref}`")]
    UnknownTypeRef { instance: InstanceId, type_ref: ServiceTypeId },
    #[error("unknown instance id `{0}`")]
    UnknownInstance(InstanceId),
    #[error("unknown node id `{0}`")]
    UnknownNode(NodeId),
    #[error("service type `{id}`: {reason}")]
    InvalidServiceType { id: ServiceTypeId, reason: String },
    #[error("node `{id}`: {reason}")]
    InvalidNode { id: NodeId, reason: String },
    #[error(
        "service type `{id}` has {instances} instances but redundancy requirement {required}; \
         the instance list must match the redundancy requirement exactly"
    )]
    RedundancyMismatch { id: ServiceTypeId, instances: usize, required: u32 },
    #[error(
        "service type `{id}` needs {instances} distinct nodes but only {nodes} exist; \
         the anti-affinity constraint is unsatisfiable"
    )]
    TooFewNodes { id: ServiceTypeId, instances: usize, nodes: usize },
    #[error("delay matrix has {rows} rows, expected vehicle_count = {expected}")]
    DelayMatrixRowCount { rows: usize, expected: usize },
    #[error("delay matrix row {row} has {cols} columns, expected node count = {expected}")]
    DelayMatrixColCount { row: usize, cols: usize, expected: usize },
    #[error("delay matrix entry ({row}, {col}) = {value} must be positive and finite")]
    DelayMatrixEntry { row: usize, col: usize, value: f64 },
    #[error("assignment is missing instance `{0}`")]
    AssignmentIncomplete(InstanceId),
    #[error("problem has no vehicles; the mean-delay objective is undefined")]
    DegenerateProblem,
}

/// Raw serialized form of a problem; validated into [`PlacementProblem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProblemParts {
    types: Vec<ServiceType>,
    instances: Vec<ServiceInstance>,
    nodes: Vec<ComputeNode>,
    vehicle_count: u32,
    delay_matrix: DelayMatrix,
}

/// A validated placement problem instance.
///
/// Construction enforces every structural invariant:
/// positive demands, thresholds and capacities; instance counts equal to
/// each type's redundancy requirement (and at most the node count); and a
/// strictly positive, finite `vehicle_count × node_count` delay matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProblemParts", into = "ProblemParts")]
pub struct PlacementProblem {
    types: Vec<ServiceType>,
    instances: Vec<ServiceInstance>,
    nodes: Vec<ComputeNode>,
    vehicle_count: u32,
    delay_matrix: DelayMatrix,
    // derived lookups
    type_index: HashMap<ServiceTypeId, usize>,
    instance_index: HashMap<InstanceId, usize>,
    node_index: HashMap<NodeId, usize>,
    instance_type: Vec<usize>,
    instances_of_type: Vec<Vec<usize>>,
}

impl PlacementProblem {
    pub fn new(
        types: Vec<ServiceType>,
        instances: Vec<ServiceInstance>,
        nodes: Vec<ComputeNode>,
        vehicle_count: u32,
        delay_matrix: DelayMatrix,
    ) -> Result<Self, ModelError> {
        let mut type_index = HashMap::new();
        for (i, t) in types.iter().enumerate() {
            if type_index.insert(t.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId { kind: "service type", id: t.id.to_string() });
            }
            if !(t.delay_threshold_ms > 0.0 && t.delay_threshold_ms.is_finite()) {
                return Err(ModelError::InvalidServiceType {
                    id: t.id.clone(),
                    reason: format!("delay_threshold_ms = {} must be positive", t.delay_threshold_ms),
                });
            }
            if !t.demand.is_strictly_positive() {
                return Err(ModelError::InvalidServiceType {
                    id: t.id.clone(),
                    reason: "demand components must all be positive".into(),
                });
            }
            if t.redundancy_requirement < 1 {
                return Err(ModelError::InvalidServiceType {
                    id: t.id.clone(),
                    reason: "redundancy_requirement must be at least 1".into(),
                });
            }
        }

        let mut node_index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId { kind: "node", id: n.id.to_string() });
            }
            if !n.capacity.is_strictly_positive() {
                return Err(ModelError::InvalidNode {
                    id: n.id.clone(),
                    reason: "capacity components must all be positive".into(),
                });
            }
        }

        let mut instance_index = HashMap::new();
        let mut instance_type = Vec::with_capacity(instances.len());
        let mut instances_of_type = vec![Vec::new(); types.len()];
        for (i, s) in instances.iter().enumerate() {
            if instance_index.insert(s.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId { kind: "instance", id: s.id.to_string() });
            }
            let t = *type_index.get(&s.type_ref).ok_or_else(|| ModelError::UnknownTypeRef {
                instance: s.id.clone(),
                type_ref: s.type_ref.clone(),
            })?;
            instance_type.push(t);
            instances_of_type[t].push(i);
        }

        for (t, members) in types.iter().zip(&instances_of_type) {
            if members.len() != t.redundancy_requirement as usize {
                return Err(ModelError::RedundancyMismatch {
                    id: t.id.clone(),
                    instances: members.len(),
                    required: t.redundancy_requirement,
                });
            }
            if members.len() > nodes.len() {
                return Err(ModelError::TooFewNodes {
                    id: t.id.clone(),
                    instances: members.len(),
                    nodes: nodes.len(),
                });
            }
        }

        if delay_matrix.delays_ms.len() != vehicle_count as usize {
            return Err(ModelError::DelayMatrixRowCount {
                rows: delay_matrix.delays_ms.len(),
                expected: vehicle_count as usize,
            });
        }
        for (row, r) in delay_matrix.delays_ms.iter().enumerate() {
            if r.len() != nodes.len() {
                return Err(ModelError::DelayMatrixColCount {
                    row,
                    cols: r.len(),
                    expected: nodes.len(),
                });
            }
            for (col, &value) in r.iter().enumerate() {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(ModelError::DelayMatrixEntry { row, col, value });
                }
            }
        }

        Ok(Self {
            types,
            instances,
            nodes,
            vehicle_count,
            delay_matrix,
            type_index,
            instance_index,
            node_index,
            instance_type,
            instances_of_type,
        })
    }

    pub fn types(&self) -> &[ServiceType] {
        &self.types
    }

    pub fn instances(&self) -> &[ServiceInstance] {
        &self.instances
    }

    pub fn nodes(&self) -> &[ComputeNode] {
        &self.nodes
    }

    pub fn vehicle_count(&self) -> u32 {
        self.vehicle_count
    }

    pub fn delay_matrix(&self) -> &DelayMatrix {
        &self.delay_matrix
    }

    /// Index of the type that instance `s` (by index) belongs to.
    pub fn type_of_instance(&self, instance: usize) -> usize {
        self.instance_type[instance]
    }

    pub fn type_of_instance_ref(&self, instance: usize) -> &ServiceType {
        &self.types[self.instance_type[instance]]
    }

    /// Instance indices of type `t` (by index), in input order.
    pub fn instances_of_type(&self, type_idx: usize) -> &[usize] {
        &self.instances_of_type[type_idx]
    }

    pub fn type_idx(&self, id: &ServiceTypeId) -> Option<usize> {
        self.type_index.get(id).copied()
    }

    pub fn instance_idx(&self, id: &InstanceId) -> Option<usize> {
        self.instance_index.get(id).copied()
    }

    pub fn node_idx(&self, id: &NodeId) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    /// Resolve an id-keyed assignment into per-instance node indices
    /// (`None` for instances absent from the map). Unknown instance or node
    /// ids are errors: they indicate a malformed file, not a constraint
    /// violation.
    pub fn resolve_assignment(&self, assignment: &Assignment) -> Result<Vec<Option<usize>>, ModelError> {
        let mut resolved = vec![None; self.instances.len()];
        for (instance_id, node_id) in assignment {
            let s = self
                .instance_idx(instance_id)
                .ok_or_else(|| ModelError::UnknownInstance(instance_id.clone()))?;
            let c = self
                .node_idx(node_id)
                .ok_or_else(|| ModelError::UnknownNode(node_id.clone()))?;
            resolved[s] = Some(c);
        }
        Ok(resolved)
    }
}

impl TryFrom<ProblemParts> for PlacementProblem {
    type Error = ModelError;

    fn try_from(p: ProblemParts) -> Result<Self, Self::Error> {
        PlacementProblem::new(p.types, p.instances, p.nodes, p.vehicle_count, p.delay_matrix)
    }
}

impl From<PlacementProblem> for ProblemParts {
    fn from(p: PlacementProblem) -> Self {
        ProblemParts {
            types: p.types,
            instances: p.instances,
            nodes: p.nodes,
            vehicle_count: p.vehicle_count,
            delay_matrix: p.delay_matrix,
        }
    }
}

/// Per-node delay statistics over the vehicle population: the mean enters
/// the objective, the max enters the delay-threshold constraint.
#[derive(Debug, Clone)]
pub struct DelayStats {
    node_mean_ms: Vec<f64>,
    node_max_ms: Vec<f64>,
}

impl DelayStats {
    /// Fails with [`ModelError::DegenerateProblem`] when there are no
    /// vehicles (the mean is undefined).
    pub fn new(problem: &PlacementProblem) -> Result<Self, ModelError> {
        let v = problem.vehicle_count() as usize;
        if v == 0 {
            return Err(ModelError::DegenerateProblem);
        }
        let n = problem.nodes().len();
        let mut node_mean_ms = Vec::with_capacity(n);
        let mut node_max_ms = Vec::with_capacity(n);
        for c in 0..n {
            let mut sum = 0.0;
            let mut max = f64::NEG_INFINITY;
            for d in problem.delay_matrix().node_column(c) {
                sum += d;
                max = max.max(d);
            }
            node_mean_ms.push(sum / v as f64);
            node_max_ms.push(max);
        }
        Ok(Self { node_mean_ms, node_max_ms })
    }

    pub fn node_mean_ms(&self, node: usize) -> f64 {
        self.node_mean_ms[node]
    }

    pub fn node_max_ms(&self, node: usize) -> f64 {
        self.node_max_ms[node]
    }

    pub fn means(&self) -> &[f64] {
        &self.node_mean_ms
    }

    pub fn maxes(&self) -> &[f64] {
        &self.node_max_ms
    }

    /// Aggregate average delay of a complete index assignment.
    ///
    /// Summation order is canonical: per type (in declaration order) the
    /// addends are sorted by (mean delay, node index) before accumulation.
    /// This implements exactly Σ_instances mean-delay while making the
    /// floating-point result invariant under relabeling of same-type
    /// instances, so independently obtained equal-cost placements compare
    /// bit-for-bit equal.
    pub fn objective_ms(&self, problem: &PlacementProblem, assignment: &[usize]) -> f64 {
        debug_assert_eq!(assignment.len(), problem.instances().len());
        let mut total = 0.0;
        let mut addends: Vec<(f64, usize)> = Vec::new();
        for t in 0..problem.types().len() {
            addends.clear();
            for &s in problem.instances_of_type(t) {
                let c = assignment[s];
                addends.push((self.node_mean_ms[c], c));
            }
            addends.sort_by(|a, b| a.partial_cmp(b).expect("finite delays"));
            let mut subtotal = 0.0;
            for (mean, _) in &addends {
                subtotal += mean;
            }
            total += subtotal;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_type(id: &str, threshold: f64, red: u32) -> ServiceType {
        ServiceType {
            id: id.into(),
            name: ServiceClass::Cam,
            delay_threshold_ms: threshold,
            demand: ResourceVector::new(1.0, 1.0, 1.0),
            redundancy_requirement: red,
        }
    }

    fn node(id: &str, tier: NodeTier, cap: ResourceVector) -> ComputeNode {
        ComputeNode { id: id.into(), tier, capacity: cap }
    }

    fn instance(id: &str, ty: &str) -> ServiceInstance {
        ServiceInstance { id: id.into(), type_ref: ty.into() }
    }

    #[test]
    fn constructor_accepts_well_formed_problem() {
        let p = PlacementProblem::new(
            vec![small_type("a", 50.0, 2)],
            vec![instance("a-0", "a"), instance("a-1", "a")],
            vec![
                node("n0", NodeTier::Rsu, ResourceVector::new(4.0, 4.0, 4.0)),
                node("n1", NodeTier::Enb, ResourceVector::new(4.0, 4.0, 4.0)),
            ],
            2,
            DelayMatrix::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]]),
        )
        .unwrap();
        assert_eq!(p.instances_of_type(0), &[0, 1]);
        assert_eq!(p.type_of_instance(1), 0);
    }

    #[test]
    fn constructor_rejects_redundancy_mismatch() {
        let err = PlacementProblem::new(
            vec![small_type("a", 50.0, 2)],
            vec![instance("a-0", "a")],
            vec![node("n0", NodeTier::Rsu, ResourceVector::new(4.0, 4.0, 4.0))],
            1,
            DelayMatrix::new(vec![vec![1.0]]),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::RedundancyMismatch { .. }));
    }

    #[test]
    fn constructor_rejects_more_instances_than_nodes() {
        let err = PlacementProblem::new(
            vec![small_type("a", 50.0, 2)],
            vec![instance("a-0", "a"), instance("a-1", "a")],
            vec![node("n0", NodeTier::Rsu, ResourceVector::new(4.0, 4.0, 4.0))],
            1,
            DelayMatrix::new(vec![vec![1.0]]),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::TooFewNodes { .. }));
    }

    #[test]
    fn constructor_rejects_bad_matrix() {
        let err = PlacementProblem::new(
            vec![small_type("a", 50.0, 1)],
            vec![instance("a-0", "a")],
            vec![node("n0", NodeTier::Rsu, ResourceVector::new(4.0, 4.0, 4.0))],
            2,
            DelayMatrix::new(vec![vec![1.0], vec![0.0]]),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DelayMatrixEntry { .. }));
    }

    #[test]
    fn json_round_trip_revalidates() {
        let p = PlacementProblem::new(
            vec![small_type("a", 50.0, 1)],
            vec![instance("a-0", "a")],
            vec![node("n0", NodeTier::Rsu, ResourceVector::new(4.0, 4.0, 4.0))],
            1,
            DelayMatrix::new(vec![vec![1.5]]),
        )
        .unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: PlacementProblem = serde_json::from_str(&text).unwrap();
        assert_eq!(back.instances()[0].id.as_str(), "a-0");

        // Tampering with the serialized form must fail validation on load.
        let bad = text.replace("1.5", "-3.0");
        assert!(serde_json::from_str::<PlacementProblem>(&bad).is_err());
    }
}
