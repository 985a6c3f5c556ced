//! Aggregation scheduling for multichannel duty-cycled sensor networks.
//!
//! The pipeline is: [`netgen::generate_network`] builds a connected random
//! geometric network with per-node duty cycles; [`tree::compute_layers`]
//! splits it into hop layers; [`tree::build_ddas_tree`] (minimal sleep
//! delay) or [`tree::build_spt_tree`] (shortest path) picks each node's
//! parent; [`schedule::schedule`] assigns slots and channels round by round;
//! [`verify::verify_schedule`] audits the result. [`oracle`] solves tiny
//! instances exactly and [`experiments`] runs parameter sweeps.

pub mod error;
pub mod experiments;
pub mod model;
pub mod netgen;
pub mod oracle;
pub mod par;
pub mod schedule;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use experiments::{run_sweep, summarize, ExperimentResult, Figure, Scheme, SweepField, SweepSpec};
pub use model::{min_sleep_delay, sleep_delay, DutyCycle, Network, NodeId, Params, Point, SinkPlacement, SleepDelay};
pub use netgen::{generate_network, network_stats, NetworkStats};
pub use oracle::brute_force_optimal;
pub use par::Execution;
pub use schedule::{aggregation_delay, schedule, CandidatePolicy, Schedule, Transmission};
pub use tree::{build_ddas_tree, build_spt_tree, compute_layers, AggregationTree, Layering};
pub use verify::{verify_schedule, Rule, Violation};
