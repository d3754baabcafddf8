use num_rational::Ratio;

use super::{girth, pack_short_circuits, Graph, Subgraph};

/// Maximal subgraph of minimum degree at least 2, found by repeatedly
/// deleting vertices of degree at most 1. Surviving vertices keep their
/// relative order.
pub fn peel_to_two_core(g: &Graph) -> Subgraph {
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut work: Vec<usize> = (0..n).filter(|&v| degree[v] < 2).collect();
    while let Some(v) = work.pop() {
        if removed[v] {
            continue;
        }
        removed[v] = true;
        for &(w, _) in g.neighbors(v) {
            if !removed[w] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    work.push(w);
                }
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    g.induced(&keep)
}

/// Component with the most vertices; ties go to the one holding the smallest
/// vertex.
pub fn largest_component(g: &Graph) -> Subgraph {
    let (labels, count) = g.component_labels();
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    let best = (0..count).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
    let members: Vec<usize> = (0..labels.len()).filter(|&v| labels[v] == best).collect();
    g.induced(&members)
}

/// Largest component of the 2-core, with ids mapped back to `g`. Empty when
/// `g` is a forest.
pub fn giant_two_core(g: &Graph) -> Subgraph {
    let core = peel_to_two_core(g);
    let giant = largest_component(&core.graph);
    Subgraph {
        original_ids: giant.original_ids.iter().map(|&v| core.original_ids[v]).collect(),
        graph: giant.graph,
    }
}

/// Connected subgraph of girth `>= s`, minimum degree `>= 2` and average
/// degree `>= mu1`, obtained by packing out short circuits, peeling to the
/// 2-core and taking a densest component. `None` when that component is
/// missing or too sparse, or when `mu1 <= 2`.
///
/// Among equally dense components the one holding the smallest host vertex
/// is returned. Vertex ids in the result map back to `g`.
pub fn extract_high_girth_subgraph(g: &Graph, s: usize, mu1: Ratio<u64>) -> Option<Subgraph> {
    if mu1 <= Ratio::from_integer(2) {
        return None;
    }
    let packing = pack_short_circuits(g, s.max(3));
    let core = peel_to_two_core(&packing.residual);
    let (labels, count) = core.graph.component_labels();
    if count == 0 {
        return None;
    }
    let mut vertices = vec![0u64; count];
    let mut edges = vec![0u64; count];
    for &l in &labels {
        vertices[l] += 1;
    }
    for &(u, _) in core.graph.edges() {
        edges[labels[u]] += 1;
    }
    // Labels follow smallest vertex, so the first maximum wins ties.
    let mut best = 0;
    for c in 1..count {
        if Ratio::new(2 * edges[c], vertices[c]) > Ratio::new(2 * edges[best], vertices[best]) {
            best = c;
        }
    }
    let members: Vec<usize> = (0..labels.len()).filter(|&v| labels[v] == best).collect();
    let component = core.graph.induced(&members);
    let density = component.graph.average_degree().ok()?;
    if density < mu1 {
        return None;
    }
    assert!(girth(&component.graph).at_least(s));
    assert!(component.graph.min_degree().is_some_and(|d| d >= 2));
    Some(Subgraph {
        original_ids: component
            .original_ids
            .iter()
            .map(|&v| core.original_ids[v])
            .collect(),
        graph: component.graph,
    })
}
