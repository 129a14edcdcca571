//! Seeded scenario generation.
//!
//! A [`ScenarioSpec`] describes a highway segment: how many vehicles are in
//! coverage, how many compute nodes exist per tier and with what capacity,
//! the service catalog (delay budget and demand per class), and the
//! per-tier access-delay distributions. [`instantiate`] turns a spec into a
//! validated [`PlacementProblem`] with every delay drawn independently and
//! reproducibly from `(seed, vehicle index, node index)`.
//!
//! Two built-in parameterizations are provided, a small and a large
//! deployment; see [`builtin_scenario`].

use crate::model::{
    ComputeNode, DelayMatrix, ModelError, NodeTier, PlacementProblem, ResourceVector, ServiceClass,
    ServiceInstance, ServiceType, ServiceTypeId,
};
use crate::rng::{derive_seed, SplitMix64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario spec: {0}")]
    InvalidSpec(String),
    #[error(
        "spec is infeasible: {instances} instances of type `{service_type}` exceed the {nodes} available nodes"
    )]
    InfeasibleSpec { service_type: ServiceTypeId, instances: u32, nodes: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The built-in deployment sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// 2 km segment: 2 core + 3 eNB + 5 RSU nodes, 20–100 vehicles.
    Small,
    /// 8 km segment: 7 core + 8 eNB + 15 RSU nodes, 140–300 vehicles.
    Large,
}

impl Scenario {
    /// Vehicle counts the built-in sweeps use.
    pub fn standard_vehicle_counts(&self) -> &'static [u32] {
        match self {
            Scenario::Small => &[20, 40, 60, 80, 100],
            Scenario::Large => &[140, 180, 220, 260, 300],
        }
    }
}

/// Catalog entry: one service class to instantiate. The number of instances
/// is decided at instantiation time from the vehicle count, so the template
/// carries no redundancy field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceTemplate {
    pub id: ServiceTypeId,
    pub name: ServiceClass,
    pub delay_threshold_ms: f64,
    pub demand: ResourceVector,
}

/// Half-open uniform delay range per node tier, in ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierDelayRanges {
    pub core: (f64, f64),
    pub enb: (f64, f64),
    pub rsu: (f64, f64),
}

impl TierDelayRanges {
    pub fn range(&self, tier: NodeTier) -> (f64, f64) {
        match tier {
            NodeTier::Core => self.core,
            NodeTier::Enb => self.enb,
            NodeTier::Rsu => self.rsu,
        }
    }
}

fn default_vehicles_per_instance() -> u32 {
    20
}

/// A complete scenario description, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub lane_count: u32,
    pub lane_length_km: f64,
    pub vehicle_count: u32,
    pub core_nodes: u32,
    pub enb_nodes: u32,
    pub rsu_nodes: u32,
    pub core_capacity: ResourceVector,
    pub enb_capacity: ResourceVector,
    pub rsu_capacity: ResourceVector,
    pub service_catalog: Vec<ServiceTemplate>,
    pub delay_ranges_ms: TierDelayRanges,
    pub seed: u64,
    /// Divisor of the instance-count rule: each service type gets
    /// `ceil(vehicle_count / vehicles_per_instance)` instances.
    #[serde(default = "default_vehicles_per_instance")]
    pub vehicles_per_instance: u32,
    /// Set when the vehicle count is outside the scenario's standard sweep
    /// values; informational only.
    #[serde(default)]
    pub nonstandard_vehicle_count: bool,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.vehicle_count < 1 {
            return Err(ScenarioError::InvalidSpec("vehicle_count must be at least 1".into()));
        }
        if self.vehicles_per_instance < 1 {
            return Err(ScenarioError::InvalidSpec("vehicles_per_instance must be at least 1".into()));
        }
        for (tier, (low, high)) in [
            ("core", self.delay_ranges_ms.core),
            ("enb", self.delay_ranges_ms.enb),
            ("rsu", self.delay_ranges_ms.rsu),
        ] {
            if !(low.is_finite() && high.is_finite() && low < high && low > 0.0) {
                return Err(ScenarioError::InvalidSpec(format!(
                    "{tier} delay range ({low}, {high}) must be positive with low < high"
                )));
            }
        }
        for cap in [&self.core_capacity, &self.enb_capacity, &self.rsu_capacity] {
            if !cap.is_strictly_positive() {
                return Err(ScenarioError::InvalidSpec("node capacities must be positive".into()));
            }
        }
        for t in &self.service_catalog {
            if !(t.delay_threshold_ms > 0.0 && t.delay_threshold_ms.is_finite()) {
                return Err(ScenarioError::InvalidSpec(format!(
                    "service `{}` threshold must be positive",
                    t.id
                )));
            }
            if !t.demand.is_strictly_positive() {
                return Err(ScenarioError::InvalidSpec(format!(
                    "service `{}` demand must be positive",
                    t.id
                )));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> u32 {
        self.core_nodes + self.enb_nodes + self.rsu_nodes
    }

    /// Instances per service type for this spec's vehicle count:
    /// `ceil(vehicle_count / vehicles_per_instance)`.
    pub fn instances_per_type(&self) -> u32 {
        self.vehicle_count.div_ceil(self.vehicles_per_instance)
    }
}

/// The service catalog shared by both built-in scenarios: a 20 ms
/// cooperative-awareness class sized as a medium VM, a 50 ms notification
/// class sized large, and a 150 ms media class sized extra-large.
pub fn builtin_catalog() -> Vec<ServiceTemplate> {
    vec![
        ServiceTemplate {
            id: "cam".into(),
            name: ServiceClass::Cam,
            delay_threshold_ms: 20.0,
            demand: ResourceVector::new(2.0, 3.5, 4.0),
        },
        ServiceTemplate {
            id: "denm".into(),
            name: ServiceClass::Denm,
            delay_threshold_ms: 50.0,
            demand: ResourceVector::new(4.0, 7.0, 4.0),
        },
        ServiceTemplate {
            id: "media".into(),
            name: ServiceClass::Media,
            delay_threshold_ms: 150.0,
            demand: ResourceVector::new(8.0, 14.0, 40.0),
        },
    ]
}

/// Build one of the built-in scenario specs for a given vehicle count and
/// seed. Vehicle counts outside the scenario's standard sweep are allowed
/// but flagged via [`ScenarioSpec::nonstandard_vehicle_count`].
pub fn builtin_scenario(which: Scenario, vehicle_count: u32, seed: u64) -> Result<ScenarioSpec, ScenarioError> {
    if vehicle_count < 1 {
        return Err(ScenarioError::InvalidSpec("vehicle_count must be at least 1".into()));
    }
    let (lane_length_km, core_nodes, enb_nodes, rsu_nodes) = match which {
        Scenario::Small => (2.0, 2, 3, 5),
        Scenario::Large => (8.0, 7, 8, 15),
    };
    let spec = ScenarioSpec {
        lane_count: 2,
        lane_length_km,
        vehicle_count,
        core_nodes,
        enb_nodes,
        rsu_nodes,
        core_capacity: ResourceVector::new(32.0, 64.0, 240.0),
        enb_capacity: ResourceVector::new(8.0, 16.0, 240.0),
        rsu_capacity: ResourceVector::new(8.0, 16.0, 240.0),
        service_catalog: builtin_catalog(),
        delay_ranges_ms: TierDelayRanges { core: (60.0, 130.0), enb: (20.0, 40.0), rsu: (1.0, 10.0) },
        seed,
        vehicles_per_instance: default_vehicles_per_instance(),
        nonstandard_vehicle_count: !which.standard_vehicle_counts().contains(&vehicle_count),
    };
    spec.validate()?;
    Ok(spec)
}

/// A vehicle's position on the segment. Positions are descriptive output
/// only: the delay model draws from per-tier distributions, so they never
/// influence the generated problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehiclePosition {
    pub vehicle: u32,
    pub lane: u32,
    pub position_km: f64,
}

/// Equal spacing along the lanes, round-robin across lanes.
pub fn vehicle_positions(spec: &ScenarioSpec) -> Vec<VehiclePosition> {
    let lanes = spec.lane_count.max(1);
    let per_lane = spec.vehicle_count.div_ceil(lanes).max(1);
    (0..spec.vehicle_count)
        .map(|v| {
            let lane = v % lanes;
            let slot = v / lanes;
            VehiclePosition {
                vehicle: v,
                lane,
                position_km: spec.lane_length_km * (slot as f64 + 0.5) / per_lane as f64,
            }
        })
        .collect()
}

/// Materialize a spec into a validated problem.
///
/// Nodes are laid out core tier first, then eNBs, then RSUs, with ids like
/// `core-0`, `enb-1`, `rsu-4`. Each catalog entry becomes a service type
/// whose redundancy requirement follows the instance-count rule, with
/// instances `cam-0 … cam-(n−1)` and so on. Every delay-matrix entry is an
/// independent half-open uniform draw from the node tier's range, keyed by
/// `(spec.seed, vehicle index, node index)`, so equal seeds reproduce the
/// problem bit for bit and entries may be generated in any order.
pub fn instantiate(spec: &ScenarioSpec) -> Result<PlacementProblem, ScenarioError> {
    spec.validate()?;

    let mut nodes = Vec::with_capacity(spec.node_count() as usize);
    for (tier, count, capacity) in [
        (NodeTier::Core, spec.core_nodes, spec.core_capacity),
        (NodeTier::Enb, spec.enb_nodes, spec.enb_capacity),
        (NodeTier::Rsu, spec.rsu_nodes, spec.rsu_capacity),
    ] {
        let prefix = match tier {
            NodeTier::Core => "core",
            NodeTier::Enb => "enb",
            NodeTier::Rsu => "rsu",
        };
        for k in 0..count {
            nodes.push(ComputeNode { id: format!("{prefix}-{k}").into(), tier, capacity });
        }
    }

    let redundancy = spec.instances_per_type();
    if redundancy > spec.node_count() {
        let first = spec
            .service_catalog
            .first()
            .map(|t| t.id.clone())
            .unwrap_or_else(|| "?".into());
        return Err(ScenarioError::InfeasibleSpec {
            service_type: first,
            instances: redundancy,
            nodes: spec.node_count(),
        });
    }

    let mut types = Vec::with_capacity(spec.service_catalog.len());
    let mut instances = Vec::new();
    for template in &spec.service_catalog {
        types.push(ServiceType {
            id: template.id.clone(),
            name: template.name,
            delay_threshold_ms: template.delay_threshold_ms,
            demand: template.demand,
            redundancy_requirement: redundancy,
        });
        for k in 0..redundancy {
            instances.push(ServiceInstance {
                id: format!("{}-{k}", template.id).into(),
                type_ref: template.id.clone(),
            });
        }
    }

    let mut rows = Vec::with_capacity(spec.vehicle_count as usize);
    for v in 0..spec.vehicle_count {
        let mut row = Vec::with_capacity(nodes.len());
        for (c, node) in nodes.iter().enumerate() {
            let (low, high) = spec.delay_ranges_ms.range(node.tier);
            let mut cell = SplitMix64::new(derive_seed(spec.seed, &[v as u64, c as u64]));
            row.push(cell.uniform(low, high));
        }
        rows.push(row);
    }

    Ok(PlacementProblem::new(
        types,
        instances,
        nodes,
        spec.vehicle_count,
        DelayMatrix::new(rows),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_spec_matches_expected_layout() {
        let spec = builtin_scenario(Scenario::Small, 20, 1).unwrap();
        assert_eq!(spec.node_count(), 10);
        assert_eq!(spec.instances_per_type(), 1);
        assert!(!spec.nonstandard_vehicle_count);
        assert_eq!(spec, builtin_scenario(Scenario::Small, 20, 1).unwrap());
    }

    #[test]
    fn large_spec_matches_expected_layout() {
        let spec = builtin_scenario(Scenario::Large, 300, 9).unwrap();
        assert_eq!(spec.node_count(), 30);
        assert_eq!(spec.instances_per_type(), 15);
    }

    #[test]
    fn instance_count_rule_hits_the_published_endpoints() {
        for (vehicles, expected) in [(20, 1), (40, 2), (60, 3), (80, 4), (100, 5)] {
            let spec = builtin_scenario(Scenario::Small, vehicles, 0).unwrap();
            assert_eq!(spec.instances_per_type(), expected, "small, {vehicles} vehicles");
        }
        for (vehicles, expected) in [(140, 7), (180, 9), (220, 11), (260, 13), (300, 15)] {
            let spec = builtin_scenario(Scenario::Large, vehicles, 0).unwrap();
            assert_eq!(spec.instances_per_type(), expected, "large, {vehicles} vehicles");
        }
    }

    #[test]
    fn nonstandard_vehicle_count_is_flagged() {
        let spec = builtin_scenario(Scenario::Small, 33, 0).unwrap();
        assert!(spec.nonstandard_vehicle_count);
        assert_eq!(spec.instances_per_type(), 2);
    }

    #[test]
    fn zero_vehicles_is_rejected() {
        assert!(matches!(
            builtin_scenario(Scenario::Small, 0, 0),
            Err(ScenarioError::InvalidSpec(_))
        ));
    }

    #[test]
    fn sixty_vehicles_yield_nine_instances() {
        let problem = instantiate(&builtin_scenario(Scenario::Small, 60, 5).unwrap()).unwrap();
        assert_eq!(problem.instances().len(), 9);
        for t in 0..problem.types().len() {
            assert_eq!(problem.instances_of_type(t).len(), 3);
        }
    }

    #[test]
    fn delays_stay_within_their_tier_ranges() {
        let spec = builtin_scenario(Scenario::Small, 40, 77).unwrap();
        let problem = instantiate(&spec).unwrap();
        for v in 0..problem.vehicle_count() as usize {
            for (c, node) in problem.nodes().iter().enumerate() {
                let d = problem.delay_matrix().delay_ms(v, c);
                let (low, high) = spec.delay_ranges_ms.range(node.tier);
                assert!(d >= low && d < high, "delay {d} outside [{low},{high}) for {}", node.id);
            }
        }
    }

    #[test]
    fn equal_seeds_reproduce_bit_identical_problems() {
        let a = instantiate(&builtin_scenario(Scenario::Small, 40, 1234).unwrap()).unwrap();
        let b = instantiate(&builtin_scenario(Scenario::Small, 40, 1234).unwrap()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn differing_seeds_differ_in_some_delay() {
        for seed in 0..100u64 {
            let a = instantiate(&builtin_scenario(Scenario::Small, 20, seed).unwrap()).unwrap();
            let b = instantiate(&builtin_scenario(Scenario::Small, 20, seed + 1).unwrap()).unwrap();
            assert_ne!(
                a.delay_matrix().delays_ms, b.delay_matrix().delays_ms,
                "seeds {seed} and {} collided", seed + 1
            );
        }
    }

    #[test]
    fn overfull_spec_is_rejected_as_infeasible() {
        // 20 instances per type against 10 nodes.
        let spec = builtin_scenario(Scenario::Small, 400, 0).unwrap();
        assert!(matches!(instantiate(&spec), Err(ScenarioError::InfeasibleSpec { .. })));
    }

    #[test]
    fn positions_are_descriptive_and_span_the_segment() {
        let spec = builtin_scenario(Scenario::Small, 20, 3).unwrap();
        let positions = vehicle_positions(&spec);
        assert_eq!(positions.len(), 20);
        assert!(positions.iter().all(|p| p.lane < spec.lane_count));
        assert!(positions.iter().all(|p| p.position_km > 0.0 && p.position_km <= spec.lane_length_km));
    }
}
