//! Scenario generation, channel and link models, allocation methods and
//! evaluation metrics for groupcasting in multi-platoon cellular networks.

pub mod allocator;
pub mod channel;
pub mod config;
pub mod error;
pub mod link;
pub mod metrics;
pub mod scenario;
pub mod sweep;

pub use allocator::{Allocation, Candidate, GroupcastEnv, Match, Method, ScenarioEnv};
pub use config::ConfigFile;
pub use error::{Error, Result};
pub use link::GroupcastRole;
pub use metrics::MetricsReport;
pub use scenario::{generate_scenario, ModelParams, Scenario};
pub use sweep::{run_sweep, SweepConfig, SweepResults, SweepRow};
