//! Graph-analytics traffic modelling for a placed network-on-chip.
//!
//! A graph is partitioned into typed memory shards, an algorithm run emits the
//! shard-to-shard messages of every phase, the shards are placed on a 2D grid
//! to shorten the heaviest routes, and the trace is replayed over the grid to
//! estimate latency and energy.
// Negated float comparisons (`!(x > 0.0)`) deliberately reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod noc;
pub mod partition;
pub mod placement;
pub mod report;

pub use config::{validate_config, ExperimentConfig, Strategy};
pub use engine::{Algorithm, AlgorithmSpec, Message, Phase, TrafficTrace};
pub use error::{EngineError, GraphError, PartitionError, PlacementError, SimError};
pub use experiment::run_experiment;
pub use graph::{Graph, VertexId};
pub use noc::{NocParams, ReportSummary, SimReport};
pub use partition::{PartitionConfig, PartitionMap, ShardKind};
pub use placement::{Coord, CostMode, GridSpec, Placement, PlacementProblem, Topology};
