//! Discrete-event model of a software-defined sensor network on a grid.

mod attack;
mod config;
mod engine;
mod topology;
mod trace;

pub use attack::{apply_fdff, apply_fni, select_attackers};
pub use config::{AttackKind, EvictionPolicy, Neighborhood, ScenarioConfig, SimTuning};
pub use engine::{simulate, simulate_with_attackers, BOGUS_FLOW_BASE};
pub use topology::{routes_toward, Grid, NodeId, Role, CONTROLLER, DATA_SINK};
pub use trace::{SimTrace, TraceMeta, WindowCounts};
