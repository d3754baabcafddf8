//! Non-backtracking spectral thresholds and cycle percolation on finite
//! simple graphs.
//!
//! The crate computes the Perron eigenvalue `λ*` of the non-backtracking arc
//! operator, the probability that a `p`-random edge subset contains a cycle
//! (by Monte Carlo and by exhaustive enumeration), percolation on truncated
//! covering trees, and checks the quantitative bounds that tie these
//! together.

pub mod corpus;
pub mod error;
pub mod graph;
pub mod mc;
pub mod oracle;
pub mod percolation;
pub mod report;
pub mod spectral;
pub mod tree;
pub mod verify;
mod unionfind;

pub use error::{Error, Result};
pub use graph::{EdgeSubset, Girth, Graph, GraphSpec, Subgraph};
pub use mc::McEstimate;
pub use unionfind::UnionFind;
