//! Round-based simulation of energy-aware routing in wireless IoT sensor
//! networks.
//!
//! The crate provides the MINEN protocol (feature clustering, residual-energy
//! head election and minimum-cost routing over a cluster-head graph), the
//! GSO/GA/PSO family of evolutionary sleep schedulers, LEACH and fuzzy
//! c-means baselines, and the metric collection used to compare them.

pub mod baselines;
pub mod clustering;
pub mod config;
pub mod coverage;
pub mod energy;
pub mod error;
pub mod network;
pub mod rng;
pub mod routing;
pub mod sim;
pub mod sleepsched;

pub use config::{ClusteringMethod, NetworkConfig, ProtocolKind, SchedulerKind, SimConfig};
pub use energy::{EdgeCost, EnergyParams};
pub use error::{Error, Result};
pub use network::{build_network, distance, NodeState, Position};
pub use rng::RngStream;
pub use sim::{run_simulation, CoverageGrid, RoundMetrics, RunSummary, Simulation};
pub use sleepsched::{SchedulerConfig, SleepSolution};
