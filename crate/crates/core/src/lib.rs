//! Joint functional/security configuration search for software-defined
//! networks.
//!
//! The crate is organized as a pipeline:
//!
//! * [`scenario`] — problem instances: topology, flows, risk and cost data.
//! * [`topology`] — generators for the benchmark topologies and DOT export.
//! * [`kpaths`] — candidate-path priming (k shortest simple paths per pair).
//! * [`optimkit`] — solver-neutral model IR, boolean linearizations, an
//!   embedded exact solver and a file bridge to external MILP solvers.
//! * [`functional`] — the routing layer: one active path per flow, demand
//!   and capacity satisfaction, load balancing, segregation rewards.
//! * [`risk`] — per-path risk scoring over the logical topology.
//! * [`security`] — firewall / packet-inspection placement against a fixed
//!   routing.
//! * [`feedback`] — segregation-cut generation and accept/revoke arbitration.
//! * [`coordinator`] — the outer loop tying the layers together, plus rule
//!   emission and run reports.

pub mod coordinator;
pub mod feedback;
pub mod functional;
pub mod kpaths;
pub mod optimkit;
pub mod risk;
pub mod scenario;
pub mod security;
pub mod topology;

pub use scenario::{NodeId, NodeKind, Scenario};
