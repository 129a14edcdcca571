//! Per-run measurements: per-service delays, resource utilization, and
//! delay histograms.

use crate::model::{
    DelayStats, ModelError, Placement, PlacementProblem, ResourceKind, ResourceVector,
    ServiceTypeId,
};
use crate::solver::SolverKind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("service type `{0}` does not exist in this problem")]
    UnknownType(ServiceTypeId),
    #[error("service type `{0}` has no delay samples; the histogram is empty")]
    EmptyHistogram(ServiceTypeId),
    #[error("bin width {0} must be positive")]
    InvalidBinWidth(f64),
    #[error("histogram needs at least one sample")]
    NoSamples,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Mean vehicle delay per service type, averaged uniformly over the type's
/// placed instances. Types with no placed instances are omitted.
pub fn per_type_avg_delay(
    problem: &PlacementProblem,
    placement: &Placement,
) -> Result<BTreeMap<ServiceTypeId, f64>, MetricsError> {
    let stats = DelayStats::new(problem)?;
    let resolved = problem.resolve_assignment(&placement.assignment)?;
    let mut out = BTreeMap::new();
    for (t, ty) in problem.types().iter().enumerate() {
        let nodes: Vec<usize> =
            problem.instances_of_type(t).iter().filter_map(|&s| resolved[s]).collect();
        if nodes.is_empty() {
            continue;
        }
        let sum: f64 = nodes.iter().map(|&c| stats.node_mean_ms(c)).sum();
        out.insert(ty.id.clone(), sum / nodes.len() as f64);
    }
    Ok(out)
}

/// Mean fractional usage per resource dimension across all nodes
/// (including empty ones): `(1/|C|) Σ_c used_c / capacity_c`.
pub fn utilization(
    problem: &PlacementProblem,
    placement: &Placement,
) -> Result<ResourceUtilization, MetricsError> {
    let resolved = problem.resolve_assignment(&placement.assignment)?;
    let mut used = vec![ResourceVector::ZERO; problem.nodes().len()];
    for (s, c) in resolved.iter().enumerate() {
        if let Some(c) = *c {
            used[c] = used[c].add(&problem.type_of_instance_ref(s).demand);
        }
    }
    let n = problem.nodes().len();
    let mut fractions = [0.0f64; 3];
    for (c, node) in problem.nodes().iter().enumerate() {
        for (slot, kind) in fractions.iter_mut().zip(ResourceKind::ALL) {
            *slot += used[c].component(kind) / node.capacity.component(kind);
        }
    }
    let scale = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    Ok(ResourceUtilization {
        cpu: fractions[0] * scale,
        memory: fractions[1] * scale,
        storage: fractions[2] * scale,
    })
}

/// Cluster-wide mean utilization per resource dimension, each in `[0, 1]`
/// for feasible placements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceUtilization {
    pub cpu: f64,
    pub memory: f64,
    pub storage: f64,
}

/// All per-(vehicle, instance) delay samples of one service type.
pub fn per_type_delay_samples(
    problem: &PlacementProblem,
    placement: &Placement,
    type_id: &ServiceTypeId,
) -> Result<Vec<f64>, MetricsError> {
    let t = problem.type_idx(type_id).ok_or_else(|| MetricsError::UnknownType(type_id.clone()))?;
    let resolved = problem.resolve_assignment(&placement.assignment)?;
    let mut samples = Vec::new();
    for &s in problem.instances_of_type(t) {
        if let Some(c) = resolved[s] {
            samples.extend(problem.delay_matrix().node_column(c));
        }
    }
    Ok(samples)
}

/// A density-normalized histogram: bin masses (density × width) sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width_ms: f64,
    pub sample_count: usize,
    pub bins: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left_ms: f64,
    pub right_ms: f64,
    pub density: f64,
}

impl Histogram {
    /// Build from raw samples; bins are anchored at zero.
    pub fn from_samples(samples: &[f64], bin_width_ms: f64) -> Result<Self, MetricsError> {
        if !(bin_width_ms > 0.0 && bin_width_ms.is_finite()) {
            return Err(MetricsError::InvalidBinWidth(bin_width_ms));
        }
        if samples.is_empty() {
            return Err(MetricsError::NoSamples);
        }
        let index_of = |x: f64| (x / bin_width_ms).floor() as i64;
        let first = samples.iter().copied().map(index_of).min().expect("non-empty");
        let last = samples.iter().copied().map(index_of).max().expect("non-empty");
        let mut counts = vec![0usize; (last - first + 1) as usize];
        for &x in samples {
            counts[(index_of(x) - first) as usize] += 1;
        }
        let norm = 1.0 / (samples.len() as f64 * bin_width_ms);
        let bins = counts
            .iter()
            .enumerate()
            .map(|(i, &count)| {
                let k = first + i as i64;
                HistogramBin {
                    left_ms: k as f64 * bin_width_ms,
                    right_ms: (k + 1) as f64 * bin_width_ms,
                    density: count as f64 * norm,
                }
            })
            .collect();
        Ok(Self { bin_width_ms, sample_count: samples.len(), bins })
    }

    /// Total mass, which is 1 by construction (up to rounding).
    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.density * self.bin_width_ms).sum()
    }

    /// `bin_left,bin_right,density` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left_ms,bin_right_ms,density\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{}\n", b.left_ms, b.right_ms, b.density));
        }
        out
    }
}

/// Default histogram bin width in ms.
pub const DEFAULT_BIN_WIDTH_MS: f64 = 5.0;

/// Histogram of one type's delay samples under a placement.
pub fn delay_histogram(
    problem: &PlacementProblem,
    placement: &Placement,
    type_id: &ServiceTypeId,
    bin_width_ms: f64,
) -> Result<Histogram, MetricsError> {
    let samples = per_type_delay_samples(problem, placement, type_id)?;
    if samples.is_empty() {
        return Err(MetricsError::EmptyHistogram(type_id.clone()));
    }
    Histogram::from_samples(&samples, bin_width_ms)
}

/// Everything measured about one solver run on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub solver: SolverKind,
    pub seed: u64,
    pub feasible: bool,
    pub aggregate_avg_delay_ms: f64,
    pub per_type_avg_delay_ms: BTreeMap<ServiceTypeId, f64>,
    pub per_resource_utilization: ResourceUtilization,
    /// One delay sample per (vehicle, instance) pair, keyed by type.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_type_delay_samples_ms: BTreeMap<ServiceTypeId, Vec<f64>>,
    pub runtime_ms: f64,
    pub nodes_explored: u64,
}

impl ExperimentReport {
    pub fn new(
        problem: &PlacementProblem,
        placement: &Placement,
        solver: SolverKind,
        seed: u64,
        runtime_ms: f64,
        nodes_explored: u64,
    ) -> Result<Self, MetricsError> {
        let feasible = crate::model::check_feasibility(problem, placement)?.is_feasible();
        let per_type_avg_delay_ms = per_type_avg_delay(problem, placement)?;
        let per_resource_utilization = utilization(problem, placement)?;
        let mut per_type_delay_samples_ms = BTreeMap::new();
        for ty in problem.types() {
            let samples = per_type_delay_samples(problem, placement, &ty.id)?;
            if !samples.is_empty() {
                per_type_delay_samples_ms.insert(ty.id.clone(), samples);
            }
        }
        Ok(Self {
            solver,
            seed,
            feasible,
            aggregate_avg_delay_ms: placement.objective_ms,
            per_type_avg_delay_ms,
            per_resource_utilization,
            per_type_delay_samples_ms,
            runtime_ms,
            nodes_explored,
        })
    }

    /// The aggregate objective always equals Σ over types of
    /// (instance count × per-type average delay); used as a self-check.
    pub fn aggregate_identity_holds(&self, problem: &PlacementProblem, rel_tol: f64) -> bool {
        let recombined: f64 = self
            .per_type_avg_delay_ms
            .iter()
            .map(|(id, avg)| {
                let t = problem.type_idx(id).expect("report types come from the problem");
                problem.instances_of_type(t).len() as f64 * avg
            })
            .sum();
        crate::model::relative_eq(self.aggregate_avg_delay_ms, recombined, rel_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Assignment, ComputeNode, DelayMatrix, NodeTier, ServiceClass, ServiceInstance, ServiceType,
    };
    use crate::model::OBJECTIVE_REL_TOL;

    fn one_cam_on_one_node() -> (PlacementProblem, Placement) {
        let problem = PlacementProblem::new(
            vec![ServiceType {
                id: "cam".into(),
                name: ServiceClass::Cam,
                delay_threshold_ms: 20.0,
                demand: ResourceVector::new(2.0, 3.5, 4.0),
                redundancy_requirement: 1,
            }],
            vec![ServiceInstance { id: "cam-0".into(), type_ref: "cam".into() }],
            vec![ComputeNode {
                id: "rsu-0".into(),
                tier: NodeTier::Rsu,
                capacity: ResourceVector::new(8.0, 16.0, 240.0),
            }],
            2,
            DelayMatrix::new(vec![vec![4.0], vec![6.0]]),
        )
        .unwrap();
        let mut assignment = Assignment::new();
        assignment.insert("cam-0".into(), "rsu-0".into());
        let placement = Placement::new(&problem, assignment).unwrap();
        (problem, placement)
    }

    #[test]
    fn utilization_divides_demand_by_capacity() {
        let (problem, placement) = one_cam_on_one_node();
        let u = utilization(&problem, &placement).unwrap();
        assert_eq!(u.cpu, 0.25);
        assert_eq!(u.memory, 0.21875);
        assert!((u.storage - 4.0 / 240.0).abs() < 1e-15);
    }

    #[test]
    fn empty_placement_has_zero_utilization() {
        let (problem, _) = one_cam_on_one_node();
        let placement = Placement { assignment: Assignment::new(), objective_ms: 0.0 };
        let u = utilization(&problem, &placement).unwrap();
        assert_eq!(u, ResourceUtilization::default());
    }

    #[test]
    fn constant_matrix_gives_constant_type_delay_and_single_bin() {
        let problem = PlacementProblem::new(
            vec![ServiceType {
                id: "a".into(),
                name: ServiceClass::Denm,
                delay_threshold_ms: 50.0,
                demand: ResourceVector::new(1.0, 1.0, 1.0),
                redundancy_requirement: 2,
            }],
            vec![
                ServiceInstance { id: "a-0".into(), type_ref: "a".into() },
                ServiceInstance { id: "a-1".into(), type_ref: "a".into() },
            ],
            vec![
                ComputeNode { id: "n0".into(), tier: NodeTier::Enb, capacity: ResourceVector::new(4.0, 4.0, 4.0) },
                ComputeNode { id: "n1".into(), tier: NodeTier::Enb, capacity: ResourceVector::new(4.0, 4.0, 4.0) },
            ],
            3,
            DelayMatrix::new(vec![vec![7.0, 7.0], vec![7.0, 7.0], vec![7.0, 7.0]]),
        )
        .unwrap();
        let mut assignment = Assignment::new();
        assignment.insert("a-0".into(), "n0".into());
        assignment.insert("a-1".into(), "n1".into());
        let placement = Placement::new(&problem, assignment).unwrap();

        let delays = per_type_avg_delay(&problem, &placement).unwrap();
        assert_eq!(delays.get(&"a".into()).copied(), Some(7.0));

        let hist = delay_histogram(&problem, &placement, &"a".into(), 5.0).unwrap();
        let nonzero: Vec<_> = hist.bins.iter().filter(|b| b.density > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].left_ms, 5.0);
        assert!((hist.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_of_absent_type_is_empty_error() {
        let (problem, _) = one_cam_on_one_node();
        let placement = Placement { assignment: Assignment::new(), objective_ms: 0.0 };
        assert!(matches!(
            delay_histogram(&problem, &placement, &"cam".into(), 5.0),
            Err(MetricsError::EmptyHistogram(_))
        ));
    }

    #[test]
    fn report_satisfies_the_aggregate_identity() {
        let (problem, placement) = one_cam_on_one_node();
        let report =
            ExperimentReport::new(&problem, &placement, SolverKind::Greedy, 1, 0.1, 1).unwrap();
        assert!(report.feasible);
        assert!(report.aggregate_identity_holds(&problem, OBJECTIVE_REL_TOL));
        assert_eq!(report.per_type_delay_samples_ms.get(&"cam".into()).unwrap().len(), 2);
    }
}
