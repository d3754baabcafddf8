use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: loop edge at vertex {vertex}")]
    LoopEdge { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error("pairing model rejected {attempts} consecutive configurations")]
    RetryCapExceeded { attempts: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("vertex {vertex} has degree {degree}, minimum degree 2 required")]
    MinDegree { vertex: usize, degree: usize },
    #[error("vector has dimension {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("walk count overflows 128 bits at length {length}")]
    Overflow { length: usize },
    #[error(
        "covering tree exceeds node cap {cap} at depth {depth_reached} (estimated {estimated_nodes:.3e} nodes)"
    )]
    NodeCap {
        cap: usize,
        depth_reached: usize,
        estimated_nodes: f64,
    },
    #[error("{edges} edges exceeds the enumeration guard of {guard}")]
    GuardExceeded { edges: usize, guard: usize },
    #[error("graph is acyclic; the cyclic family is empty")]
    Acyclic,
}
