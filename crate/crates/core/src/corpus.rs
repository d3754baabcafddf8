//! Named test graphs shared by the verification suite, the acceptance run
//! and the benches.

use crate::graph::{generate, giant_two_core, Graph, GraphSpec};
use crate::mc::substream_seed;

#[derive(Debug, Clone)]
pub struct NamedGraph {
    pub name: String,
    pub graph: Graph,
}

impl NamedGraph {
    fn new(name: impl Into<String>, graph: Graph) -> Self {
        Self {
            name: name.into(),
            graph,
        }
    }

    fn spec(spec: GraphSpec) -> Self {
        Self::new(spec.to_string(), generate(&spec, 0).expect("fixed spec"))
    }
}

fn fixed(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::new(n, edges.to_vec()).expect("fixed graph")
}

pub fn k4_minus_edge() -> Graph {
    fixed(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)])
}

/// Two vertices joined by internally disjoint paths of the given lengths.
pub fn theta(lengths: &[usize]) -> Graph {
    let mut edges = Vec::new();
    let mut next = 2;
    for &len in lengths {
        assert!(len >= 1);
        let mut prev = 0;
        for _ in 1..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, 1));
    }
    Graph::new(next, edges).expect("theta paths must not both be single edges")
}

/// Cyclic graphs with at most 16 edges, small enough for exhaustive
/// enumeration.
pub fn small() -> Vec<NamedGraph> {
    let mut out = vec![NamedGraph::spec(GraphSpec::Complete(3))];
    out.extend((4..=8).map(|n| NamedGraph::spec(GraphSpec::Cycle(n))));
    out.push(NamedGraph::spec(GraphSpec::Complete(4)));
    out.push(NamedGraph::new("k4-minus-edge", k4_minus_edge()));
    out.push(NamedGraph::new("theta:1:2:3", theta(&[1, 2, 3])));
    out.push(NamedGraph::new("theta:2:2:2", theta(&[2, 2, 2])));
    out.push(NamedGraph::new("theta:3:3:4", theta(&[3, 3, 4])));
    out.push(NamedGraph::new(
        "bowtie",
        fixed(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]),
    ));
    out.push(NamedGraph::new(
        "k2,3",
        fixed(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]),
    ));
    out.push(NamedGraph::spec(GraphSpec::Complete(5)));
    out.push(NamedGraph::spec(GraphSpec::Petersen));
    out
}

/// Largest component of the 2-core of `G(n, m)`.
pub fn gnm_core(n: usize, m: usize, seed: u64) -> Graph {
    giant_two_core(&generate(&GraphSpec::Gnm { n, m }, seed).expect("m within range")).graph
}

/// `count` connected graphs of minimum degree 2, each the giant 2-core of a
/// seeded `G(n, m)` with `n ≤ 300` and average degree between 2.4 and 5.
/// Cores with fewer than 4 vertices are skipped.
pub fn two_core_corpus(count: usize, master_seed: u64) -> Vec<NamedGraph> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let s = substream_seed(master_seed, i);
        i += 1;
        let n = 20 + (s % 281) as usize;
        let tenths = 24 + (s >> 16) % 27;
        let m = n * tenths as usize / 20;
        let g = gnm_core(n, m, s);
        if g.vertex_count() >= 4 {
            out.push(NamedGraph::new(format!("core(gnm:{n}:{m}@{s:016x})"), g));
        }
    }
    out
}
