//! Truncated covering trees and percolation from their root.
//!
//! The covering tree at arc `e0` has the length-zero walk as root, the walk
//! `(e0)` as its only child, and below every walk its one-arc
//! non-backtracking extensions. Nodes are stored breadth first, so each
//! level and each node's children occupy contiguous index ranges.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::{self, McEstimate, MeanEstimate};
use crate::spectral::{ArcId, ArcSystem, PerronPair};

pub const DEFAULT_NODE_CAP: usize = 5_000_000;

#[derive(Debug, Clone)]
pub struct TruncatedCoveringTree {
    root_arc: ArcId,
    depth: usize,
    parent: Vec<u32>,
    /// Last arc of each walk; unused for the root.
    last_arc: Vec<u32>,
    /// Final vertex of each walk (the homomorphism onto the host).
    vertex: Vec<u32>,
    child_offsets: Vec<usize>,
    level_offsets: Vec<usize>,
}

impl TruncatedCoveringTree {
    /// All walks of at most `depth` arcs starting with `root_arc`, plus the
    /// root. Fails rather than truncating when `node_cap` would be exceeded.
    pub fn build(arcs: &ArcSystem, root_arc: ArcId, depth: usize, node_cap: usize) -> Result<Self> {
        if depth < 1 {
            return Err(Error::InvalidParameter("tree depth must be at least 1".into()));
        }
        if root_arc >= arcs.arc_count() {
            return Err(Error::InvalidParameter(format!("arc {root_arc} out of range")));
        }
        let mut tree = Self {
            root_arc,
            depth,
            parent: vec![u32::MAX, 0],
            last_arc: vec![u32::MAX, root_arc as u32],
            vertex: vec![arcs.tail(root_arc) as u32, arcs.head(root_arc) as u32],
            child_offsets: vec![1, 2],
            level_offsets: vec![0, 1, 2],
        };
        for level in 1..depth {
            let (lo, hi) = (tree.level_offsets[level], tree.level_offsets[level + 1]);
            for v in lo..hi {
                let arc = tree.last_arc[v] as usize;
                for f in arcs.successors(arc) {
                    tree.parent.push(v as u32);
                    tree.last_arc.push(f as u32);
                    tree.vertex.push(arcs.head(f) as u32);
                }
                tree.child_offsets.push(tree.parent.len());
                if tree.parent.len() > node_cap {
                    let done = tree.parent.len() as f64;
                    let growth = (done - lo as f64) / (hi - lo) as f64;
                    return Err(Error::NodeCap {
                        cap: node_cap,
                        depth_reached: level,
                        estimated_nodes: done * growth.max(1.0).powi((depth - level) as i32),
                    });
                }
            }
            tree.level_offsets.push(tree.parent.len());
        }
        // Leaves at the bottom level have no children.
        let total = tree.parent.len();
        tree.child_offsets.resize(total + 1, total);
        Ok(tree)
    }

    pub fn root_arc(&self) -> ArcId {
        self.root_arc
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn level(&self, k: usize) -> std::ops::Range<usize> {
        self.level_offsets[k]..self.level_offsets[k + 1]
    }

    pub fn node_depth(&self, v: usize) -> usize {
        self.level_offsets.partition_point(|&o| o <= v) - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v != 0).then(|| self.parent[v] as usize)
    }

    pub fn last_arc(&self, v: usize) -> Option<ArcId> {
        (v != 0).then(|| self.last_arc[v] as usize)
    }

    /// Final vertex of the walk at node `v`.
    pub fn vertex(&self, v: usize) -> usize {
        self.vertex[v] as usize
    }

    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        self.child_offsets[v]..self.child_offsets[v + 1]
    }

    fn check_depth(&self, n: usize) -> Result<()> {
        if n < 1 || n > self.depth {
            return Err(Error::InvalidParameter(format!(
                "target depth {n} outside 1..={}",
                self.depth
            )));
        }
        Ok(())
    }
}

/// `φ(root) = 1` and `φ(v) = λ^(1−|v|) w(π(v))` elsewhere.
#[derive(Debug, Clone)]
pub struct UnitFlow {
    pub lambda: f64,
    pub phi: Vec<f64>,
}

impl UnitFlow {
    pub fn new(tree: &TruncatedCoveringTree, perron: &PerronPair) -> Self {
        let lambda = perron.lambda_star;
        let mut phi = Vec::with_capacity(tree.node_count());
        phi.push(1.0);
        for k in 1..=tree.depth() {
            let scale = lambda.powi(1 - k as i32);
            phi.extend(tree.level(k).map(|v| scale * perron.w[tree.last_arc[v] as usize]));
        }
        Self { lambda, phi }
    }

    /// Largest relative gap between a node's flow and the sum over its
    /// children, over internal nodes.
    pub fn conservation_error(&self, tree: &TruncatedCoveringTree) -> f64 {
        (0..tree.level_offsets[tree.depth()])
            .map(|v| {
                let out: f64 = tree.children(v).map(|c| self.phi[c]).sum();
                (out - self.phi[v]).abs() / self.phi[v]
            })
            .fold(0.0, f64::max)
    }

    pub fn level_mass(&self, tree: &TruncatedCoveringTree, k: usize) -> f64 {
        tree.level(k).map(|v| self.phi[v]).sum()
    }
}

/// Depth-first walk of the root cluster of one `p`-percolation sample.
/// Edge coins are only tossed below reached nodes, in a fixed order.
fn explore<R: Rng>(
    tree: &TruncatedCoveringTree,
    p: f64,
    n: usize,
    rng: &mut R,
    stack: &mut Vec<usize>,
    mut on_bottom: impl FnMut(usize) -> bool,
) {
    stack.clear();
    stack.push(0);
    while let Some(v) = stack.pop() {
        if v >= tree.level_offsets[n] {
            if on_bottom(v) {
                return;
            }
            continue;
        }
        for c in tree.children(v) {
            if rng.random::<f64>() < p {
                stack.push(c);
            }
        }
    }
}

/// One draw of `Q = p^(−n) Σ_{|x|=n} φ(x) 1[x ∈ R_X]`.
pub fn sample_q<R: Rng>(tree: &TruncatedCoveringTree, flow: &UnitFlow, p: f64, n: usize, rng: &mut R) -> f64 {
    let mut reached = 0.0;
    explore(tree, p, n, rng, &mut Vec::new(), |v| {
        reached += flow.phi[v];
        false
    });
    reached / p.powi(n as i32)
}

/// Fraction of trials whose root cluster reaches depth `n`.
pub fn estimate_root_path_prob(
    tree: &TruncatedCoveringTree,
    p: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<McEstimate> {
    tree.check_depth(n)?;
    check_probability(p)?;
    check_trials(trials)?;
    let hits = mc::count_hits(trials, master_seed, |rng| {
        let mut hit = false;
        explore(tree, p, n, rng, &mut Vec::new(), |_| {
            hit = true;
            true
        });
        hit
    });
    Ok(McEstimate::from_counts(hits, trials, master_seed))
}

/// Probability that the root cluster reaches depth `n`, from
/// `g(x) = 1` at depth `n` and `g(v) = 1 − Π_children (1 − p g(c))`.
pub fn exact_root_path_prob(tree: &TruncatedCoveringTree, p: f64, n: usize) -> Result<f64> {
    tree.check_depth(n)?;
    check_probability(p)?;
    let mut g = vec![0.0; tree.level_offsets[n + 1]];
    for v in tree.level(n) {
        g[v] = 1.0;
    }
    for k in (0..n).rev() {
        for v in tree.level(k) {
            let miss: f64 = tree.children(v).map(|c| 1.0 - p * g[c]).product();
            g[v] = 1.0 - miss;
        }
    }
    Ok(g[0])
}

/// Exact `E(Q²)` by splitting pairs of depth-`n` nodes at their join:
/// `Σ_z p^(−|z|) (A(z)² − Σ_c A(c)²)` with `A` the flow reaching depth `n`
/// below each node.
pub fn exact_second_moment(tree: &TruncatedCoveringTree, flow: &UnitFlow, p: f64, n: usize) -> Result<f64> {
    tree.check_depth(n)?;
    let mut below = vec![0.0; tree.level_offsets[n + 1]];
    for v in tree.level(n) {
        below[v] = flow.phi[v];
    }
    let mut total = 0.0;
    for k in (1..=n).rev() {
        let weight = p.powi(-(k as i32));
        for v in tree.level(k) {
            // Mass of ordered pairs whose join is exactly v.
            let own = if k == n {
                below[v] * below[v]
            } else {
                let mut sum = 0.0;
                let mut squares = 0.0;
                for c in tree.children(v) {
                    sum += below[c];
                    squares += below[c] * below[c];
                }
                below[v] = sum;
                sum * sum - squares
            };
            total += weight * own;
        }
    }
    Ok(total)
}

/// Monte Carlo moments of `Q` against `E(Q) = 1` and `E(Q²) ≤ (p − 1/λ)⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondMomentAudit {
    pub p: f64,
    pub n: usize,
    pub trials: u64,
    pub mean_q: MeanEstimate,
    pub mean_q2: MeanEstimate,
    /// `(p − 1/λ)⁻¹`, present when `pλ > 1`.
    pub bound: Option<f64>,
    /// Empirical `P(Q > 0)`.
    pub positive_fraction: f64,
}

impl SecondMomentAudit {
    pub fn mean_ok(&self) -> bool {
        (self.mean_q.mean - 1.0).abs() <= 3.0 * self.mean_q.std_error + 1e-12
    }

    pub fn second_moment_ok(&self) -> bool {
        self.bound
            .is_none_or(|b| self.mean_q2.mean <= b + 3.0 * self.mean_q2.std_error)
    }

    /// `P̂(Q > 0) ≥ mean(Q)² / mean(Q²)`, which the empirical measure obeys
    /// by Cauchy–Schwarz.
    pub fn cauchy_schwarz_ok(&self) -> bool {
        self.mean_q2.mean == 0.0
            || self.positive_fraction * self.mean_q2.mean >= self.mean_q.mean.powi(2) * (1.0 - 1e-12)
    }

    pub fn passed(&self) -> bool {
        self.mean_ok() && self.second_moment_ok() && self.cauchy_schwarz_ok()
    }
}

pub fn second_moment_audit(
    tree: &TruncatedCoveringTree,
    flow: &UnitFlow,
    p: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<SecondMomentAudit> {
    tree.check_depth(n)?;
    check_trials(trials)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1]")));
    }
    let qs = mc::collect_samples(trials, master_seed, |rng| sample_q(tree, flow, p, n, rng));
    let squares: Vec<f64> = qs.iter().map(|q| q * q).collect();
    let positive = qs.iter().filter(|&&q| q > 0.0).count();
    Ok(SecondMomentAudit {
        p,
        n,
        trials,
        mean_q: MeanEstimate::from_samples(&qs),
        mean_q2: MeanEstimate::from_samples(&squares),
        bound: (p * flow.lambda > 1.0).then(|| 1.0 / (p - 1.0 / flow.lambda)),
        positive_fraction: positive as f64 / trials as f64,
    })
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Graph, GraphSpec};
    use crate::mc::trial_rng;
    use rand::RngCore;

    /// Always returns the largest word, so every coin with p < 1 fails.
    struct AlwaysHigh;

    impl RngCore for AlwaysHigh {
        fn next_u32(&mut self) -> u32 {
            u32::MAX
        }
        fn next_u64(&mut self) -> u64 {
            u64::MAX
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0xff);
        }
    }

    fn host(spec: GraphSpec) -> (ArcSystem, PerronPair) {
        let arcs = ArcSystem::new(&generate(&spec, 0).unwrap()).unwrap();
        let pair = arcs.perron_default().unwrap();
        (arcs, pair)
    }

    fn irregular() -> (ArcSystem, PerronPair) {
        let g = Graph::new(6, vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 5), (5, 0), (1, 4)]).unwrap();
        let arcs = ArcSystem::new(&g).unwrap();
        let pair = arcs.perron_default().unwrap();
        (arcs, pair)
    }

    #[test]
    fn cycle_tree_is_a_path() {
        let (arcs, _) = host(GraphSpec::Cycle(5));
        let t = TruncatedCoveringTree::build(&arcs, 3, 3, 100).unwrap();
        assert_eq!(t.node_count(), 4);
        for v in 0..3 {
            assert_eq!(t.children(v).len(), 1);
        }
        assert_eq!(t.children(3).len(), 0);
        assert_eq!(t.last_arc(1), Some(3));
        assert_eq!(t.parent(0), None);
    }

    #[test]
    fn k4_levels() {
        let (arcs, _) = host(GraphSpec::Complete(4));
        let t = TruncatedCoveringTree::build(&arcs, 0, 2, 100).unwrap();
        assert_eq!(t.level(0).len(), 1);
        assert_eq!(t.level(1).len(), 1);
        assert_eq!(t.level(2).len(), 2);
        assert_eq!(t.node_depth(3), 2);
    }

    #[test]
    fn level_sizes_match_walk_counts() {
        for (arcs, pair) in [host(GraphSpec::Petersen), irregular()] {
            let e0 = pair.select_root_arc();
            let t = TruncatedCoveringTree::build(&arcs, e0, 9, 1 << 20).unwrap();
            for k in 2..=9 {
                let walks: u128 = arcs.nb_walk_counts_from(e0, k).unwrap().iter().sum();
                assert_eq!(t.level(k).len() as u128, walks);
            }
        }
    }

    #[test]
    fn homomorphism_is_locally_injective() {
        let (arcs, pair) = irregular();
        let t = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 7, 1 << 20).unwrap();
        for v in 1..t.node_count() {
            let a = t.last_arc(v).unwrap();
            assert_eq!(t.vertex(v), arcs.head(a));
            assert_eq!(t.vertex(t.parent(v).unwrap()), arcs.tail(a));
            let mut heads: Vec<usize> = t.children(v).map(|c| t.vertex(c)).collect();
            let back = arcs.tail(a);
            assert!(!heads.contains(&back));
            heads.sort_unstable();
            heads.dedup();
            assert_eq!(heads.len(), t.children(v).len());
        }
    }

    #[test]
    fn node_cap_fails_loudly() {
        let (arcs, _) = host(GraphSpec::Complete(4));
        match TruncatedCoveringTree::build(&arcs, 0, 20, 1000) {
            Err(Error::NodeCap { cap: 1000, depth_reached, estimated_nodes }) => {
                assert!(depth_reached < 20);
                assert!(estimated_nodes > 1000.0);
            }
            other => panic!("expected node cap error, got {other:?}"),
        }
    }

    #[test]
    fn flow_values() {
        let (arcs, pair) = host(GraphSpec::Complete(4));
        let t = TruncatedCoveringTree::build(&arcs, 0, 6, 1 << 16).unwrap();
        let flow = UnitFlow::new(&t, &pair);
        assert_eq!(flow.phi[0], 1.0);
        assert!((flow.phi[1] - 1.0).abs() < 1e-12);
        for k in 1..=6 {
            for v in t.level(k) {
                assert!((flow.phi[v] - 2f64.powi(1 - k as i32)).abs() < 1e-12);
            }
            assert!((flow.level_mass(&t, k) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn flow_conserved_on_irregular_host() {
        let (arcs, pair) = irregular();
        let t = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 10, 1 << 20).unwrap();
        let flow = UnitFlow::new(&t, &pair);
        assert!((flow.phi[1] - 1.0).abs() < 1e-12);
        assert!(flow.conservation_error(&t) < 1e-9);
        for k in 1..=10 {
            assert!((flow.level_mass(&t, k) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn q_extremes() {
        let (arcs, pair) = irregular();
        let t = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 6, 1 << 20).unwrap();
        let flow = UnitFlow::new(&t, &pair);
        let q = sample_q(&t, &flow, 1.0, 6, &mut trial_rng(0, 0));
        assert!((q - 1.0).abs() < 1e-9);
        assert_eq!(sample_q(&t, &flow, 0.5, 6, &mut AlwaysHigh), 0.0);
    }

    #[test]
    fn exact_closed_forms() {
        let (arcs, _) = host(GraphSpec::Cycle(5));
        let t = TruncatedCoveringTree::build(&arcs, 0, 3, 100).unwrap();
        for p in [0.0, 0.3, 0.9, 1.0] {
            assert!((exact_root_path_prob(&t, p, 3).unwrap() - p.powi(3)).abs() < 1e-15);
        }
        let (arcs, _) = host(GraphSpec::Complete(4));
        let t = TruncatedCoveringTree::build(&arcs, 0, 2, 100).unwrap();
        for p in [0.2, 0.5, 0.8] {
            let want = p * (2.0 * p - p * p);
            assert!((exact_root_path_prob(&t, p, 2).unwrap() - want).abs() < 1e-15);
        }
        assert!(exact_root_path_prob(&t, 0.5, 3).is_err());
        assert!(exact_root_path_prob(&t, 1.5, 2).is_err());
    }

    /// Probability of reaching depth n, by enumerating every coin pattern on
    /// the tree's edges.
    fn brute_root_path_prob(t: &TruncatedCoveringTree, p: f64, n: usize) -> f64 {
        let edges = t.level_offsets[n + 1] - 1;
        assert!(edges <= 20);
        let mut total = 0.0;
        for mask in 0u32..1 << edges {
            let present = |v: usize| mask >> (v - 1) & 1 == 1;
            let mut reached = vec![false; edges + 1];
            reached[0] = true;
            for v in 1..=edges {
                reached[v] = present(v) && reached[t.parent(v).unwrap()];
            }
            if t.level(n).any(|v| reached[v]) {
                let k = mask.count_ones() as i32;
                total += p.powi(k) * (1.0 - p).powi(edges as i32 - k);
            }
        }
        total
    }

    #[test]
    fn exact_matches_brute_force() {
        let (arcs, pair) = irregular();
        let t = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 5, 1 << 20).unwrap();
        for n in 1..=4 {
            if t.level_offsets[n + 1] - 1 > 20 {
                continue;
            }
            for p in [0.3, 0.6, 0.95] {
                let exact = exact_root_path_prob(&t, p, n).unwrap();
                assert!((exact - brute_root_path_prob(&t, p, n)).abs() < 1e-12, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn tree_bound_holds_exactly() {
        for (arcs, pair) in [host(GraphSpec::Petersen), host(GraphSpec::Complete(4)), irregular()] {
            let lambda = pair.lambda_star;
            let t = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 10, 1 << 22).unwrap();
            for i in 1..=10 {
                let p = 1.0 / lambda + (1.0 - 1.0 / lambda) * i as f64 / 10.0;
                for n in 1..=10 {
                    let exact = exact_root_path_prob(&t, p, n).unwrap();
                    assert!(exact >= p - 1.0 / lambda - 1e-12, "p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn monte_carlo_matches_exact() {
        let (arcs, pair) = host(GraphSpec::Petersen);
        let t = TruncatedCoveringTree::build(&arcs, 0, 8, 1 << 16).unwrap();
        let est = estimate_root_path_prob(&t, 0.7, 8, 100_000, 11).unwrap();
        let exact = exact_root_path_prob(&t, 0.7, 8).unwrap();
        assert!(est.agrees_with(exact, 3.0), "{est:?} vs {exact}");
        assert!(est.estimate >= 0.2 - est.half_width());
        let one = estimate_root_path_prob(&t, 1.0, 8, 1000, 1).unwrap();
        assert_eq!(one.estimate, 1.0);
        let _ = pair;
    }

    #[test]
    fn cycle_host_is_power() {
        let (arcs, _) = host(GraphSpec::Cycle(6));
        let t = TruncatedCoveringTree::build(&arcs, 0, 4, 100).unwrap();
        assert!((exact_root_path_prob(&t, 0.5, 4).unwrap() - 0.0625).abs() < 1e-15);
        let est = estimate_root_path_prob(&t, 0.5, 4, 50_000, 3).unwrap();
        assert!(est.agrees_with(0.0625, 3.0));
    }

    #[test]
    fn second_moment_closed_form_and_bound() {
        let (arcs, pair) = irregular();
        let lambda = pair.lambda_star;
        let t = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 8, 1 << 20).unwrap();
        let flow = UnitFlow::new(&t, &pair);
        for p in [0.75, 0.9, 1.0] {
            let m2 = exact_second_moment(&t, &flow, p, 8).unwrap();
            assert!(m2 >= 1.0 - 1e-9);
            if p * lambda > 1.0 {
                assert!(m2 <= 1.0 / (p - 1.0 / lambda), "p={p}: {m2}");
            }
        }
        assert!((exact_second_moment(&t, &flow, 1.0, 8).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn second_moment_audit_on_k4() {
        let (arcs, pair) = host(GraphSpec::Complete(4));
        let t = TruncatedCoveringTree::build(&arcs, 0, 5, 1 << 16).unwrap();
        let flow = UnitFlow::new(&t, &pair);
        let audit = second_moment_audit(&t, &flow, 0.9, 5, 100_000, 5).unwrap();
        assert!(audit.passed(), "{audit:?}");
        assert_eq!(audit.bound, Some(1.0 / (0.9 - 0.5)));
        let exact = exact_second_moment(&t, &flow, 0.9, 5).unwrap();
        assert!((audit.mean_q2.mean - exact).abs() <= 3.0 * audit.mean_q2.std_error);
        let full = second_moment_audit(&t, &flow, 1.0, 5, 100, 5).unwrap();
        assert!((full.mean_q2.mean - 1.0).abs() < 1e-9);
        assert!(full.mean_q2.mean <= full.bound.unwrap());
    }
}
