use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have at least two nodes")]
    EmptyGraph,
    #[error("edge ({0}, {1}) references a node outside 1..={2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("self loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected: node {0} is unreachable from node 1")]
    DisconnectedGraph(usize),
    #[error("edge set is not a spanning tree: {0}")]
    NotASpanningTree(String),
    #[error("graph is not a tree ({edges} edges on {nodes} nodes)")]
    NotATree { nodes: usize, edges: usize },
    #[error("tree Gram matrix is singular")]
    SingularTreeGram,
    #[error("cycle Gram matrix R W R^T is singular")]
    SingularCycleGram,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("system matrix has an eigenvalue with nonpositive real part ({0:e})")]
    UnstablePair(f64),
    #[error("-A is not Hurwitz: eigenvalue real part {0:e}")]
    UnstableA(f64),
    #[error("Lyapunov residual {residual:e} exceeds tolerance {tolerance:e}")]
    IllConditioned { residual: f64, tolerance: f64 },
    #[error("Z has a nontrivial null space (smallest singular value {0:e})")]
    RankDeficientZ(f64),
    #[error("mu = {mu} is infeasible; feasible range is mu <= {max}")]
    InfeasibleMu { mu: f64, max: f64 },
    #[error("solver did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("time step {dt} violates the stability bound dt < {max_dt}")]
    UnstableStep { dt: f64, max_dt: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by invalid user input (as opposed to numerical
    /// failure inside a valid problem).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::SingularTreeGram
                | Error::SingularCycleGram
                | Error::IllConditioned { .. }
                | Error::NonConvergence(_)
                | Error::UnstableA(_)
        )
    }
}
