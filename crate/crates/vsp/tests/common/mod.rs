//! Shared helpers for the integration suites: a seeded generator of small
//! random problems (mixing feasible and infeasible structures) and the
//! constant-delay three-tier example.

use vsp::model::{
    ComputeNode, DelayMatrix, NodeTier, PlacementProblem, ResourceVector, ServiceClass,
    ServiceInstance, ServiceType,
};
use vsp::rng::SplitMix64;

/// Unvalidated building blocks, so tests can permute before construction.
#[derive(Debug, Clone)]
pub struct RawProblem {
    pub types: Vec<ServiceType>,
    pub instances: Vec<ServiceInstance>,
    pub nodes: Vec<ComputeNode>,
    pub vehicle_count: u32,
    pub delays: Vec<Vec<f64>>,
}

impl RawProblem {
    pub fn build(&self) -> PlacementProblem {
        PlacementProblem::new(
            self.types.clone(),
            self.instances.clone(),
            self.nodes.clone(),
            self.vehicle_count,
            DelayMatrix::new(self.delays.clone()),
        )
        .expect("generator respects the constructor invariants")
    }
}

/// Random problem with up to 4 nodes, 4 instances, and 6 vehicles. Delay
/// thresholds and capacities are drawn wide enough that a seed population
/// contains both feasible and infeasible instances.
pub fn random_small_problem(seed: u64) -> RawProblem {
    let mut rng = SplitMix64::new(seed);
    let n_nodes = 2 + (rng.next_u64() % 3) as usize; // 2..=4
    let n_vehicles = 1 + (rng.next_u64() % 6) as u32; // 1..=6

    let tiers = [NodeTier::Rsu, NodeTier::Enb, NodeTier::Core];
    let nodes: Vec<ComputeNode> = (0..n_nodes)
        .map(|c| ComputeNode {
            id: format!("n{c}").into(),
            tier: tiers[c % tiers.len()],
            capacity: ResourceVector::new(
                rng.uniform(4.0, 12.0),
                rng.uniform(4.0, 12.0),
                rng.uniform(4.0, 12.0),
            ),
        })
        .collect();

    let n_types = 1 + (rng.next_u64() % 3) as usize; // 1..=3
    let classes = [ServiceClass::Cam, ServiceClass::Denm, ServiceClass::Media];
    let mut types = Vec::new();
    let mut instances = Vec::new();
    let mut budget = 4usize; // at most four instances overall
    for t in 0..n_types {
        if budget == 0 {
            break;
        }
        let max_red = budget.min(n_nodes).min(2);
        let redundancy = 1 + (rng.next_u64() as usize % max_red);
        budget -= redundancy;
        let id = format!("t{t}");
        types.push(ServiceType {
            id: id.clone().into(),
            name: classes[t],
            delay_threshold_ms: rng.uniform(15.0, 70.0),
            demand: ResourceVector::new(
                rng.uniform(0.5, 4.0),
                rng.uniform(0.5, 4.0),
                rng.uniform(0.5, 4.0),
            ),
            redundancy_requirement: redundancy as u32,
        });
        for k in 0..redundancy {
            instances.push(ServiceInstance {
                id: format!("{id}-{k}").into(),
                type_ref: id.clone().into(),
            });
        }
    }

    let delays = (0..n_vehicles)
        .map(|_| (0..n_nodes).map(|_| rng.uniform(1.0, 35.0)).collect())
        .collect();

    RawProblem { types, instances, nodes, vehicle_count: n_vehicles, delays }
}

/// Three services, three nodes, two vehicles; constant per-node delays of
/// 100 / 30 / 5 ms; every node fits exactly one instance. The unique
/// optimum places the 20 ms service at the RSU, the 50 ms service at the
/// eNB, and the 150 ms service at the core, for an objective of 135 ms.
pub fn three_tier_example() -> PlacementProblem {
    let unit = ResourceVector::new(1.0, 1.0, 1.0);
    let ty = |id: &str, class: ServiceClass, threshold: f64| ServiceType {
        id: id.into(),
        name: class,
        delay_threshold_ms: threshold,
        demand: unit,
        redundancy_requirement: 1,
    };
    PlacementProblem::new(
        vec![
            ty("svc1", ServiceClass::Media, 150.0),
            ty("svc2", ServiceClass::Denm, 50.0),
            ty("svc3", ServiceClass::Cam, 20.0),
        ],
        vec![
            ServiceInstance { id: "svc1-0".into(), type_ref: "svc1".into() },
            ServiceInstance { id: "svc2-0".into(), type_ref: "svc2".into() },
            ServiceInstance { id: "svc3-0".into(), type_ref: "svc3".into() },
        ],
        vec![
            ComputeNode { id: "core-0".into(), tier: NodeTier::Core, capacity: unit },
            ComputeNode { id: "enb-0".into(), tier: NodeTier::Enb, capacity: unit },
            ComputeNode { id: "rsu-0".into(), tier: NodeTier::Rsu, capacity: unit },
        ],
        2,
        DelayMatrix::new(vec![vec![100.0, 30.0, 5.0], vec![100.0, 30.0, 5.0]]),
    )
    .expect("example is well-formed")
}
