//! What-if sandbox: scenario operators over a twin state, coupled-seed
//! finish and cost deltas, sensitivity ranking, and the knowledge graph.

mod evaluate;
pub mod kg;
mod scenario;
mod state;

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub use evaluate::{
    affected_cost_codes, evaluate, evaluate_with, sensitivity_rank, EvalConfig, QuantileMode, ScenarioResult, TornadoRow,
    DEFAULT_COST_P80_FACTOR, DEFAULT_EVAL_TRIALS,
};
pub use kg::{kg_query, Audit, KnowledgeGraph, Node, NodeRef, NodeType, QueryContext, QueryResult};
pub use scenario::{apply_scenario, apply_with_footprint, reference_schedule, Footprint, ItemSelector, Operator, RelationEdit, Scenario};
pub use state::TwinState;

use crate::cost::CostError;
use crate::project::NetworkError;
use crate::stochastic::StochasticError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WhatIfError {
    #[error("unknown target {0:?}")]
    UnknownTarget(String),
    #[error("edits would create a cycle through {0:?}")]
    AcyclicityViolation(Vec<String>),
    #[error("{op} needs a positive finite value, got {value}")]
    InvalidFactor { op: String, value: f64 },
    #[error("{0}")]
    InvalidOperator(String),
    #[error("{0}")]
    Invalid(String),
    #[error("malformed pattern: {0}")]
    MalformedPattern(String),
    #[error("duplicate graph node {0}")]
    DuplicateNode(String),
    #[error("edge endpoint {0} does not exist")]
    DanglingEdge(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
    #[error(transparent)]
    Cost(#[from] CostError),
}
