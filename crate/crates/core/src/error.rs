use thiserror::Error;

use crate::graph_store::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node {0} already present")]
    DuplicateNode(NodeId),
    #[error("node {0} is not present")]
    UnknownNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node {node} lists neighbor {neighbor} more than once")]
    DuplicateNeighbor { node: NodeId, neighbor: NodeId },
    #[error("node {0} has no neighbors")]
    ZeroDegree(NodeId),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("points have mismatched dimensions ({expected} vs {found} at point {index})")]
    DimensionMismatch { expected: usize, found: usize, index: usize },
    #[error("brute-force optimum supports at most {max} nodes, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("node {0} has no cluster label")]
    Unlabeled(NodeId),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
