//! Factorized sampling-based motion planning for multiple disc robots.
//!
//! The crate provides joint-space planners (RRG and PRM*), the factorized
//! planner that splits agents into independent blocks once a heuristic
//! certifies their independence, optimal hyperpath extraction, closed-form
//! sample-complexity estimates and a seeded benchmark harness.
//!
//! ```
//! use factplan::{planners, Algorithm, PlannerParams, Scenario};
//!
//! let scenario = Scenario::builtin_cross4().with_agents(1).unwrap();
//! let params = PlannerParams { max_iterations: 300, stop_nodes: Some(100), ..Default::default() };
//! let heuristic = scenario.heuristic().unwrap();
//! let result = planners::run(Algorithm::FactRrg, &scenario, &params, heuristic.as_ref(), 7).unwrap();
//! assert!(result.stats.nodes > 1);
//! ```

pub mod agents;
pub mod analysis;
pub mod bench;
pub mod environment;
pub mod error;
pub mod factorization;
pub mod hypergraph;
pub mod planners;
pub mod scenario;
pub mod verify;

pub use agents::{AgentId, AgentSet, BlockConfig, BlockGroup, Partition};
pub use bench::{Algorithm, BenchConfig, TrialReport};
pub use environment::{Environment, Rect, Workspace};
pub use error::{Error, Result};
pub use factorization::{ConeHeuristic, FactorizationHeuristic, NeverFactorize};
pub use hypergraph::{GraphStats, HyperPath, NodeId, PlanHypergraph, RadiusMode};
pub use planners::{PlanResult, PlannerParams};
pub use scenario::{HeuristicSpec, Scenario, ScenarioError};
