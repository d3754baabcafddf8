//! Simple undirected graphs, edge subsets and the structural reductions
//! (girth, short-circuit packing, 2-core peeling) used by the rest of the
//! crate.
//!
//! A [`Graph`] is immutable once built. Edges carry a stable index
//! `0..edge_count`, which is the universe over which percolation samples
//! an [`EdgeSubset`].

mod cycles;
mod generate;
mod reduce;

pub use cycles::{contains_circuit, girth, pack_short_circuits, CircuitPacking, Girth};
pub use generate::{generate, GraphSpec};
pub use reduce::{extract_high_girth_subgraph, giant_two_core, largest_component, peel_to_two_core};

use std::collections::HashSet;
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// `(neighbor, edge index)`.
pub type Neighbor = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<Neighbor>>,
}

/// A graph carved out of a larger host, with the host id of each vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub graph: Graph,
    pub original_ids: Vec<usize>,
}

impl Graph {
    /// Builds a simple graph, rejecting loops, duplicate pairs and
    /// out-of-range endpoints.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidParameter(format!(
                    "edge {i} ({u},{v}) out of range for {vertex_count} vertices"
                )));
            }
            if u == v {
                return Err(Error::LoopEdge { line: i + 1, vertex: u });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge { line: i + 1, u, v });
            }
        }
        Ok(Self::from_simple_edges(vertex_count, edges))
    }

    /// Caller guarantees simplicity.
    pub(crate) fn from_simple_edges(vertex_count: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (i, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push((v, i));
            adjacency[v].push((u, i));
        }
        Self {
            vertex_count,
            edges,
            adjacency,
        }
    }

    pub fn empty() -> Self {
        Self::from_simple_edges(0, Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    pub fn neighbors(&self, v: usize) -> &[Neighbor] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.adjacency.iter().map(Vec::len).min()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.adjacency.iter().map(Vec::len).max()
    }

    /// The common degree if every vertex has the same one.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.min_degree()?;
        (self.max_degree() == Some(d)).then_some(d)
    }

    /// `2|E| / |V|`, exactly.
    pub fn average_degree(&self) -> Result<Ratio<u64>> {
        if self.vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(Ratio::new(
            2 * self.edges.len() as u64,
            self.vertex_count as u64,
        ))
    }

    /// Component label per vertex, labels numbered in order of their
    /// smallest vertex.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.vertex_count {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(w, _) in &self.adjacency[u] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Connected and nonempty.
    pub fn is_connected(&self) -> bool {
        self.vertex_count > 0 && self.component_labels().1 == 1
    }

    /// Induced subgraph on `vertices` (taken in the given order).
    pub fn induced(&self, vertices: &[usize]) -> Subgraph {
        let mut new_id = vec![usize::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            new_id[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| new_id[u] != usize::MAX && new_id[v] != usize::MAX)
            .map(|&(u, v)| (new_id[u], new_id[v]))
            .collect();
        Subgraph {
            graph: Self::from_simple_edges(vertices.len(), edges),
            original_ids: vertices.to_vec(),
        }
    }

    /// Same vertex set, only the edges whose index satisfies `keep`.
    /// Returns the new graph and the host index of each kept edge.
    pub fn edge_filtered(&self, mut keep: impl FnMut(usize) -> bool) -> (Graph, Vec<usize>) {
        let mut origin = Vec::new();
        let mut edges = Vec::new();
        for (i, &e) in self.edges.iter().enumerate() {
            if keep(i) {
                origin.push(i);
                edges.push(e);
            }
        }
        (Self::from_simple_edges(self.vertex_count, edges), origin)
    }

    /// Checks that the adjacency lists mirror the edge list exactly.
    pub fn audit(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.adjacency.len() != self.vertex_count {
            return bad("adjacency length differs from vertex count".into());
        }
        let mut hits = vec![0u8; self.edges.len()];
        let mut pairs = HashSet::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            for &(w, e) in list {
                let Some(&(a, b)) = self.edges.get(e) else {
                    return bad(format!("vertex {u} references missing edge {e}"));
                };
                if !((a == u && b == w) || (a == w && b == u)) {
                    return bad(format!("edge {e} does not join {u} and {w}"));
                }
                hits[e] += 1;
            }
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if u == v || u >= self.vertex_count || v >= self.vertex_count {
                return bad(format!("edge {e} is a loop or out of range"));
            }
            if !pairs.insert((u.min(v), u.max(v))) {
                return bad(format!("edge {e} repeats a pair"));
            }
            if hits[e] != 2 {
                return bad(format!("edge {e} appears {} times in adjacency", hits[e]));
            }
        }
        Ok(())
    }

    /// Canonical edge-list text, one `u v` line per edge in index order.
    /// Isolated trailing vertices are recorded in a `# vertices N` comment so
    /// that loading the output reproduces the vertex count.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let max_listed = self.edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        if max_listed != self.vertex_count {
            let _ = writeln!(out, "# vertices {}", self.vertex_count);
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Parses whitespace-separated `u v` lines; `#` starts a comment. The vertex
/// set is `0..=max_id`, extended by a `# vertices N` directive if present.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut vertex_count = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(n) = comment.and_then(parse_vertex_directive) {
            vertex_count = vertex_count.max(n);
        }
        let mut fields = body.split_whitespace();
        let Some(first) = fields.next() else { continue };
        let parse = |tok: &str| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("expected a nonnegative integer, found {tok:?}"),
            })
        };
        let u = parse(first)?;
        let v = match fields.next() {
            Some(tok) => parse(tok)?,
            None => {
                return Err(Error::Parse {
                    line,
                    message: "expected two vertex ids".into(),
                })
            }
        };
        if let Some(extra) = fields.next() {
            return Err(Error::Parse {
                line,
                message: format!("unexpected trailing token {extra:?}"),
            });
        }
        if u == v {
            return Err(Error::LoopEdge { line, vertex: u });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::DuplicateEdge { line, u, v });
        }
        vertex_count = vertex_count.max(u.max(v) + 1);
        edges.push((u, v));
    }
    Ok(Graph::from_simple_edges(vertex_count, edges))
}

fn parse_vertex_directive(comment: &str) -> Option<usize> {
    let mut it = comment.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some("vertices"), Some(n), None) => n.parse().ok(),
        _ => None,
    }
}

/// Bitmask over the edge indices of a fixed graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSubset {
    words: Vec<u64>,
    len: usize,
}

impl EdgeSubset {
    pub fn empty(edge_count: usize) -> Self {
        Self {
            words: vec![0; edge_count.div_ceil(64)],
            len: edge_count,
        }
    }

    pub fn full(edge_count: usize) -> Self {
        let mut s = Self::empty(edge_count);
        for i in 0..edge_count {
            s.insert(i);
        }
        s
    }

    /// Low `edge_count` bits of `mask`.
    pub fn from_mask(edge_count: usize, mask: u64) -> Self {
        assert!(edge_count <= 64, "mask form only covers up to 64 edges");
        let mut s = Self::empty(edge_count);
        if edge_count > 0 {
            let keep = if edge_count == 64 { u64::MAX } else { (1 << edge_count) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    pub fn from_indices(edge_count: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(edge_count);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Number of edges in the universe, not the number of members.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "edge index {i} out of range {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len);
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
            len: self.len,
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}
