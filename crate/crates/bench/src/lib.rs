//! Fixed-seed input graphs shared by the benchmarks.

use nbperc_core::corpus::gnm_core;
use nbperc_core::graph::{generate, Graph, GraphSpec};

pub const SEED: u64 = 1;

pub fn random_regular(n: usize, d: usize) -> Graph {
    generate(&GraphSpec::RandomRegular { n, d }, SEED).expect("feasible regular spec")
}

/// Giant 2-core of G(n, 3n/2), average degree a little above 3.
pub fn sparse_core(n: usize) -> Graph {
    gnm_core(n, 3 * n / 2, SEED)
}

pub fn petersen() -> Graph {
    generate(&GraphSpec::Petersen, 0).expect("petersen")
}
