use thiserror::Error;

use crate::agents::AgentSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("agent sets {0} and {1} overlap")]
    Overlap(AgentSet, AgentSet),
    #[error("agent set {subset} is not contained in {superset}")]
    NotSubset {
        subset: AgentSet,
        superset: AgentSet,
    },
    #[error("agent set mismatch: {0} vs {1}")]
    AgentSetMismatch(AgentSet, AgentSet),
    #[error("malformed configuration: {0}")]
    Malformed(String),
    #[error("{what} supports at most {max} agents, got {got}")]
    TooManyAgents {
        what: &'static str,
        max: usize,
        got: usize,
    },
    #[error("sampling gave up after {0} rejected draws")]
    SamplingExhausted(usize),
    #[error("invalid hyperedge: {0}")]
    InvalidEdge(String),
    #[error("heuristic contract violated: {0}")]
    Contract(String),
    #[error("planner setup: {0}")]
    Setup(String),
    #[error("outside the domain of the formula: {0}")]
    Domain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
