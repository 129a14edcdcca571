//! Domain types of the placement model.

use serde::{Deserialize, Serialize};
use std::fmt;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_newtype!(
    /// Identifier of a unique service type.
    ServiceTypeId
);
id_newtype!(
    /// Identifier of a service instance.
    InstanceId
);
id_newtype!(
    /// Identifier of a compute node.
    NodeId
);

/// CPU / memory / storage triple. Used both for instance demands and node
/// capacities (cores, GB, GB). No unit conversion happens anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceVector {
    pub cpu: f64,
    pub memory: f64,
    pub storage: f64,
}

impl ResourceVector {
    pub const ZERO: ResourceVector = ResourceVector { cpu: 0.0, memory: 0.0, storage: 0.0 };

    pub fn new(cpu: f64, memory: f64, storage: f64) -> Self {
        Self { cpu, memory, storage }
    }

    /// All components finite and ≥ 0.
    pub fn is_valid(&self) -> bool {
        [self.cpu, self.memory, self.storage]
            .iter()
            .all(|x| x.is_finite() && *x >= 0.0)
    }

    /// All components strictly positive.
    pub fn is_strictly_positive(&self) -> bool {
        self.is_valid() && self.cpu > 0.0 && self.memory > 0.0 && self.storage > 0.0
    }

    pub fn add(&self, other: &ResourceVector) -> ResourceVector {
        ResourceVector {
            cpu: self.cpu + other.cpu,
            memory: self.memory + other.memory,
            storage: self.storage + other.storage,
        }
    }

    pub fn sub(&self, other: &ResourceVector) -> ResourceVector {
        ResourceVector {
            cpu: self.cpu - other.cpu,
            memory: self.memory - other.memory,
            storage: self.storage - other.storage,
        }
    }

    /// Component-wise `self ≤ other` in all three dimensions.
    pub fn fits_within(&self, other: &ResourceVector) -> bool {
        self.cpu <= other.cpu && self.memory <= other.memory && self.storage <= other.storage
    }

    pub fn component(&self, kind: ResourceKind) -> f64 {
        match kind {
            ResourceKind::Cpu => self.cpu,
            ResourceKind::Memory => self.memory,
            ResourceKind::Storage => self.storage,
        }
    }
}

/// The three resource dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Cpu,
    Memory,
    Storage,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 3] = [ResourceKind::Cpu, ResourceKind::Memory, ResourceKind::Storage];

    pub fn label(&self) -> &'static str {
        match self {
            ResourceKind::Cpu => "cpu",
            ResourceKind::Memory => "memory",
            ResourceKind::Storage => "storage",
        }
    }
}

/// The service classes carried by the model: periodic cooperative-awareness
/// messaging, event-driven environmental notifications, and media
/// download/streaming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ServiceClass {
    Cam,
    Denm,
    Media,
}

impl fmt::Display for ServiceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ServiceClass::Cam => "CAM",
            ServiceClass::Denm => "DENM",
            ServiceClass::Media => "MEDIA",
        };
        f.write_str(s)
    }
}

/// A unique service type: delay budget, per-instance resource demand, and
/// the minimum number of instances that must be placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceType {
    pub id: ServiceTypeId,
    pub name: ServiceClass,
    /// Maximum tolerable delay for vehicles served by this type, in ms.
    pub delay_threshold_ms: f64,
    pub demand: ResourceVector,
    /// Minimum number of placed instances (each on a distinct node).
    pub redundancy_requirement: u32,
}

/// One placeable instance of a service type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceInstance {
    pub id: InstanceId,
    /// The unique service type this instance belongs to.
    pub type_ref: ServiceTypeId,
}

/// Where a compute node sits in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NodeTier {
    /// Core cloud data center: largest capacity, highest access delay.
    Core,
    /// LTE base station edge host.
    Enb,
    /// Road-side unit edge host: smallest access delay.
    Rsu,
}

impl fmt::Display for NodeTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeTier::Core => "CORE",
            NodeTier::Enb => "ENB",
            NodeTier::Rsu => "RSU",
        };
        f.write_str(s)
    }
}

/// A compute node that can host service instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeNode {
    pub id: NodeId,
    pub tier: NodeTier,
    pub capacity: ResourceVector,
}

/// Per-(vehicle, node) access delay samples in ms. Row `v` holds vehicle
/// `v`'s delay towards each node, so the shape is `vehicle_count × node_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayMatrix {
    pub delays_ms: Vec<Vec<f64>>,
}

impl DelayMatrix {
    pub fn new(delays_ms: Vec<Vec<f64>>) -> Self {
        Self { delays_ms }
    }

    pub fn vehicle_count(&self) -> usize {
        self.delays_ms.len()
    }

    /// Delay of vehicle `v` towards node `c`, in ms.
    pub fn delay_ms(&self, vehicle: usize, node: usize) -> f64 {
        self.delays_ms[vehicle][node]
    }

    /// Column view: every vehicle's delay towards `node`.
    pub fn node_column(&self, node: usize) -> impl Iterator<Item = f64> + '_ {
        self.delays_ms.iter().map(move |row| row[node])
    }
}
