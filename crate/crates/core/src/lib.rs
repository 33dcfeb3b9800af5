//! Discrete-event simulator of mobile devices offloading tasks to edge
//! and cloud servers.
//!
//! Two engines implement the same model. [`Engine::Baseline`] computes all
//! device trajectories and task arrivals before the clock starts and keeps
//! every task in an append-only list; [`Engine::Renovated`] drives
//! mobility and load with events and keeps only in-flight tasks. With the
//! same seed both engines consume identical random streams, so their
//! results agree exactly; [`campaign`] compares them statistically and
//! benchmarks them.

pub mod campaign;
pub mod engine;
pub mod error;
pub mod kernel;
pub mod load;
pub mod metrics;
pub mod mobility;
pub mod network;
pub mod orchestration;
pub mod registry;
pub mod rng;
pub mod scenario;
pub mod stats;
pub mod types;

pub use engine::{run_scenario, run_scenario_opts, Engine, RunOptions, RunOutput};
pub use error::SimError;
pub use metrics::MetricsSummary;
pub use scenario::{parse_scenario, ScenarioConfig};
pub use types::{ApId, DeviceId, SimTime, TaskId};
