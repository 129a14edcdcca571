//! Latency-aware placement of V2X service instances on a hybrid
//! core/edge cluster.
//!
//! The crate models a static placement snapshot — service instances with
//! delay budgets, resource demands and redundancy requirements; compute
//! nodes with capacities; per-(vehicle, node) access delays — and solves
//! for the assignment minimizing the aggregate average delay. Three
//! solvers are provided:
//!
//! * [`solver::solve_exact`] — depth-first branch and bound, proven optimal;
//! * [`solver::solve_greedy`] — places the least delay-tolerant services
//!   first at the lowest-mean-delay node with remaining capacity;
//! * [`solver::solve_ga`] — a penalty-based genetic algorithm baseline;
//!
//! plus [`solver::solve_bruteforce`], an exhaustive enumerator kept as an
//! independent optimality oracle for tests.
//!
//! [`scenario`] builds seeded, reproducible problem instances for a
//! two-tier-edge highway setting, [`metrics`] derives per-run reports
//! (per-service delays, utilization, delay histograms), and [`harness`]
//! sweeps vehicle counts × repetitions × solvers and writes CSV/JSON
//! results.
//!
//! The `book/` directory of the repository walks through the model and the
//! algorithms chapter by chapter; every snippet there compiles and runs
//! against this crate.

pub mod harness;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod scenario;
pub mod solver;
