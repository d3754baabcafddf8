use std::collections::VecDeque;
use std::fmt;

use serde::{Serialize, Serializer};

use super::{EdgeSubset, Graph};
use crate::unionfind::UnionFind;

/// Length of a shortest cycle; forests have infinite girth.
///
/// Ordered so that every finite girth is below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }

    pub fn at_least(self, s: usize) -> bool {
        self >= Girth::Finite(s)
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => f.write_str("inf"),
        }
    }
}

/// Finite girth as a number, infinite as `null`.
impl Serialize for Girth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.finite().serialize(s)
    }
}

/// Pairwise edge-disjoint short circuits and what remains of the host once
/// their edges are removed.
#[derive(Debug, Clone)]
pub struct CircuitPacking {
    /// Host edge indices of each circuit, in cyclic order.
    pub circuits: Vec<Vec<usize>>,
    /// Host graph minus every packed edge; same vertex ids.
    pub residual: Graph,
    /// Host index of each residual edge.
    pub residual_edge_origin: Vec<usize>,
    /// Every packed circuit is shorter than this.
    pub length_bound: usize,
}

impl CircuitPacking {
    pub fn removed_edge_count(&self) -> usize {
        self.circuits.iter().map(Vec::len).sum()
    }
}

pub fn girth(g: &Graph) -> Girth {
    let alive = vec![true; g.edge_count()];
    let mut bfs = Bfs::new(g.vertex_count());
    let mut best = usize::MAX;
    for root in 0..g.vertex_count() {
        if let Some(hit) = bfs.shortest_cycle_from(g, &alive, root, best.saturating_sub(1)) {
            best = best.min(hit.length);
            if best == 3 {
                break;
            }
        }
    }
    if best == usize::MAX {
        Girth::Infinite
    } else {
        Girth::Finite(best)
    }
}

/// True iff the spanning subgraph `(V, x)` has a cycle.
pub fn contains_circuit(g: &Graph, x: &EdgeSubset) -> bool {
    assert_eq!(x.universe(), g.edge_count(), "edge subset sized for another graph");
    let mut uf = UnionFind::new(g.vertex_count());
    x.iter().any(|e| {
        let (u, v) = g.edge(e);
        !uf.union(u, v)
    })
}

/// Greedy maximal packing of edge-disjoint circuits of length `< s`.
///
/// Circuits are taken shortest first; among circuits of one length the one
/// found from the lowest root vertex wins. The residual has girth `>= s`.
pub fn pack_short_circuits(g: &Graph, s: usize) -> CircuitPacking {
    assert!(s >= 3, "circuit length bound must be at least 3");
    let mut alive = vec![true; g.edge_count()];
    let mut circuits = Vec::new();
    let mut bfs = Bfs::new(g.vertex_count());
    for len in 3..s {
        for root in 0..g.vertex_count() {
            // Removing edges never creates a cycle, so once a root is
            // exhausted at this length it stays exhausted.
            while let Some(hit) = bfs.shortest_cycle_from(g, &alive, root, len) {
                debug_assert_eq!(hit.length, len, "shorter cycle survived its level");
                let cycle = bfs.cycle_edges(&hit);
                for &e in &cycle {
                    alive[e] = false;
                }
                circuits.push(cycle);
            }
        }
    }
    let (residual, residual_edge_origin) = g.edge_filtered(|e| alive[e]);
    CircuitPacking {
        circuits,
        residual,
        residual_edge_origin,
        length_bound: s,
    }
}

struct CycleHit {
    length: usize,
    /// The non-tree edge closing the cycle and its two ends.
    edge: usize,
    ends: (usize, usize),
}

/// Reusable breadth-first search state.
struct Bfs {
    dist: Vec<usize>,
    parent_edge: Vec<usize>,
    parent: Vec<usize>,
    touched: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Bfs {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![usize::MAX; n],
            parent_edge: vec![usize::MAX; n],
            parent: vec![usize::MAX; n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn clear(&mut self) {
        for &v in &self.touched {
            self.dist[v] = usize::MAX;
            self.parent_edge[v] = usize::MAX;
            self.parent[v] = usize::MAX;
        }
        self.touched.clear();
        self.queue.clear();
    }

    /// Shortest closed walk through `root` that the BFS tree exposes, if its
    /// length is at most `max_len`. When no cycle shorter than the returned
    /// length exists anywhere in the graph, the walk is a genuine cycle.
    fn shortest_cycle_from(
        &mut self,
        g: &Graph,
        alive: &[bool],
        root: usize,
        max_len: usize,
    ) -> Option<CycleHit> {
        self.clear();
        self.dist[root] = 0;
        self.touched.push(root);
        self.queue.push_back(root);
        let mut best: Option<CycleHit> = None;
        while let Some(u) = self.queue.pop_front() {
            let du = self.dist[u];
            // Every closed walk found from here on has length >= 2 * du.
            let bound = best.as_ref().map_or(max_len, |b| b.length - 1);
            if 2 * du > bound {
                break;
            }
            for &(w, e) in g.neighbors(u) {
                if !alive[e] || e == self.parent_edge[u] {
                    continue;
                }
                if self.dist[w] == usize::MAX {
                    self.dist[w] = du + 1;
                    self.parent_edge[w] = e;
                    self.parent[w] = u;
                    self.touched.push(w);
                    self.queue.push_back(w);
                } else {
                    let length = du + self.dist[w] + 1;
                    let limit = best.as_ref().map_or(max_len, |b| b.length - 1);
                    if length <= limit {
                        best = Some(CycleHit {
                            length,
                            edge: e,
                            ends: (u, w),
                        });
                    }
                }
            }
        }
        best
    }

    /// Edges of the cycle closed by `hit`, in cyclic order starting at the
    /// BFS root.
    fn cycle_edges(&self, hit: &CycleHit) -> Vec<usize> {
        let climb = |mut v: usize| {
            let mut path = Vec::new();
            while self.parent_edge[v] != usize::MAX {
                path.push(self.parent_edge[v]);
                v = self.parent[v];
            }
            path
        };
        let (u, w) = hit.ends;
        let mut edges = climb(u);
        edges.reverse();
        edges.push(hit.edge);
        edges.extend(climb(w));
        debug_assert_eq!(edges.len(), hit.length);
        edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphSpec};

    fn gen(spec: GraphSpec) -> Graph {
        generate(&spec, 1).unwrap()
    }

    /// Every vertex touched by `cycle` has exactly two incident cycle edges
    /// and the edges form one connected closed trail.
    pub(crate) fn is_simple_cycle(g: &Graph, cycle: &[usize]) -> bool {
        use std::collections::HashMap;
        let mut deg: HashMap<usize, usize> = HashMap::new();
        for &e in cycle {
            let (u, v) = g.edge(e);
            *deg.entry(u).or_default() += 1;
            *deg.entry(v).or_default() += 1;
        }
        if deg.values().any(|&d| d != 2) || deg.len() != cycle.len() {
            return false;
        }
        let sub = EdgeSubset::from_indices(g.edge_count(), cycle.iter().copied());
        let (h, _) = g.edge_filtered(|e| sub.contains(e));
        let verts: Vec<usize> = deg.keys().copied().collect();
        let (labels, _) = h.component_labels();
        verts.iter().all(|&v| labels[v] == labels[verts[0]])
    }

    #[test]
    fn girth_of_standard_graphs() {
        assert_eq!(girth(&gen(GraphSpec::Complete(4))), Girth::Finite(3));
        assert_eq!(girth(&gen(GraphSpec::Cycle(9))), Girth::Finite(9));
        assert_eq!(girth(&gen(GraphSpec::Cycle(4))), Girth::Finite(4));
        assert_eq!(girth(&gen(GraphSpec::Petersen)), Girth::Finite(5));
        assert_eq!(girth(&gen(GraphSpec::Path(6))), Girth::Infinite);
        assert_eq!(girth(&Graph::empty()), Girth::Infinite);
    }

    #[test]
    fn girth_ordering() {
        assert!(Girth::Finite(1000) < Girth::Infinite);
        assert!(Girth::Infinite.at_least(7));
        assert!(!Girth::Finite(4).at_least(5));
    }

    #[test]
    fn contains_circuit_examples() {
        let k3 = gen(GraphSpec::Complete(3));
        assert!(contains_circuit(&k3, &EdgeSubset::full(3)));
        assert!(!contains_circuit(&k3, &EdgeSubset::empty(3)));
        let k4 = gen(GraphSpec::Complete(4));
        let star: Vec<usize> = (0..6).filter(|&e| {
            let (u, v) = k4.edge(e);
            u == 0 || v == 0
        }).collect();
        assert_eq!(star.len(), 3);
        assert!(!contains_circuit(&k4, &EdgeSubset::from_indices(6, star)));
    }

    #[test]
    fn pack_single_cycle() {
        let c4 = gen(GraphSpec::Cycle(4));
        let pack = pack_short_circuits(&c4, 5);
        assert_eq!(pack.circuits.len(), 1);
        assert_eq!(pack.circuits[0].len(), 4);
        assert!(is_simple_cycle(&c4, &pack.circuits[0]));
        assert_eq!(girth(&pack.residual), Girth::Infinite);
    }

    #[test]
    fn pack_k4_takes_one_triangle() {
        let k4 = gen(GraphSpec::Complete(4));
        let pack = pack_short_circuits(&k4, 4);
        assert_eq!(pack.circuits.len(), 1);
        assert_eq!(pack.circuits[0].len(), 3);
        assert_eq!(pack.residual.edge_count(), 3);
        assert!(girth(&pack.residual).at_least(4));
    }

    #[test]
    fn pack_forest_is_empty() {
        let p = gen(GraphSpec::Path(7));
        let pack = pack_short_circuits(&p, 10);
        assert!(pack.circuits.is_empty());
        assert_eq!(pack.residual, p);
    }

    #[test]
    fn pack_takes_shortest_first() {
        // A 4-cycle 0-1-2-3 with a chord 0-2: triangles come out before the
        // 4-cycle is considered, and then nothing short remains.
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let pack = pack_short_circuits(&g, 5);
        assert_eq!(pack.circuits.len(), 1);
        assert_eq!(pack.circuits[0].len(), 3);
        assert!(is_simple_cycle(&g, &pack.circuits[0]));
        assert_eq!(girth(&pack.residual), Girth::Infinite);
    }
}
