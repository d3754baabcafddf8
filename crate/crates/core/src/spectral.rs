//! The non-backtracking operator on arcs and its Perron pair.
//!
//! Edge `e = (u, v)` contributes arc `2e = (u, v)` and arc `2e + 1 = (v, u)`,
//! so reversal is `a ^ 1`. The operator is never stored: row `(u, v)` of `B`
//! selects every arc `(v, x)` with `x != u`, and
//!
//! ```text
//! (B x)(u, v) = S(v) - x(v, u),    S(v) = sum of x over arcs leaving v
//! ```
//!
//! gives a matrix-vector product in `O(|V| + |E|)`.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub type ArcId = usize;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Arcs of a connected graph of minimum degree at least 2.
#[derive(Debug, Clone)]
pub struct ArcSystem {
    vertex_count: usize,
    tail: Vec<usize>,
    head: Vec<usize>,
    out_offsets: Vec<usize>,
    out_arcs: Vec<ArcId>,
}

impl ArcSystem {
    pub fn new(g: &Graph) -> Result<Self> {
        if g.vertex_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        if let Some(v) = (0..g.vertex_count()).find(|&v| g.degree(v) < 2) {
            return Err(Error::MinDegree {
                vertex: v,
                degree: g.degree(v),
            });
        }
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let arc_count = 2 * g.edge_count();
        let mut tail = vec![0; arc_count];
        let mut head = vec![0; arc_count];
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            (tail[2 * e], head[2 * e]) = (u, v);
            (tail[2 * e + 1], head[2 * e + 1]) = (v, u);
        }
        let mut out_offsets = Vec::with_capacity(g.vertex_count() + 1);
        let mut out_arcs = Vec::with_capacity(arc_count);
        out_offsets.push(0);
        for v in 0..g.vertex_count() {
            for &(_, e) in g.neighbors(v) {
                out_arcs.push(if tail[2 * e] == v { 2 * e } else { 2 * e + 1 });
            }
            out_offsets.push(out_arcs.len());
        }
        Ok(Self {
            vertex_count: g.vertex_count(),
            tail,
            head,
            out_offsets,
            out_arcs,
        })
    }

    pub fn arc_count(&self) -> usize {
        self.tail.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn tail(&self, a: ArcId) -> usize {
        self.tail[a]
    }

    pub fn head(&self, a: ArcId) -> usize {
        self.head[a]
    }

    pub fn reverse(&self, a: ArcId) -> ArcId {
        a ^ 1
    }

    /// `(tail, head)`.
    pub fn arc(&self, a: ArcId) -> (usize, usize) {
        (self.tail[a], self.head[a])
    }

    pub fn out_arcs(&self, v: usize) -> &[ArcId] {
        &self.out_arcs[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// Arcs `f` with `B[a][f] = 1`, in adjacency order of `head(a)`.
    pub fn successors(&self, a: ArcId) -> impl Iterator<Item = ArcId> + '_ {
        let back = a ^ 1;
        self.out_arcs(self.head[a]).iter().copied().filter(move |&f| f != back)
    }

    /// `out = B x`.
    pub fn nb_matvec_into(&self, x: &[f64], out: &mut [f64], sums: &mut Vec<f64>) -> Result<()> {
        self.check_dim(x.len())?;
        self.check_dim(out.len())?;
        sums.clear();
        sums.extend((0..self.vertex_count).map(|v| self.out_arcs(v).iter().map(|&a| x[a]).sum::<f64>()));
        for (a, y) in out.iter_mut().enumerate() {
            *y = sums[self.head[a]] - x[a ^ 1];
        }
        Ok(())
    }

    pub fn nb_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.arc_count()];
        self.nb_matvec_into(x, &mut out, &mut Vec::new())?;
        Ok(out)
    }

    /// `r^T B` in exact arithmetic: entry `f` sums `r` over the arcs into
    /// `tail(f)` other than `reverse(f)`.
    fn exact_row_step(&self, r: &[u128], length: usize) -> Result<Vec<u128>> {
        let mut into = Vec::with_capacity(self.vertex_count);
        for v in 0..self.vertex_count {
            let mut s: u128 = 0;
            for &a in self.out_arcs(v) {
                s = s.checked_add(r[a ^ 1]).ok_or(Error::Overflow { length })?;
            }
            into.push(s);
        }
        Ok((0..self.arc_count())
            .map(|f| into[self.tail[f]] - r[f ^ 1])
            .collect())
    }

    /// Row `e` of `B^(len-1)`: entry `f` counts non-backtracking walks with
    /// `len` arcs, first arc `e` and last arc `f`.
    pub fn nb_walk_counts_from(&self, e: ArcId, len: usize) -> Result<Vec<u128>> {
        if len < 1 {
            return Err(Error::InvalidParameter("walk length must be at least 1".into()));
        }
        if e >= self.arc_count() {
            return Err(Error::InvalidParameter(format!("arc {e} out of range")));
        }
        let mut row = vec![0u128; self.arc_count()];
        row[e] = 1;
        for step in 2..=len {
            row = self.exact_row_step(&row, step)?;
        }
        Ok(row)
    }

    /// `(B^(len-1))[e][f]`, for `len >= 2`.
    pub fn count_nb_walks(&self, e: ArcId, f: ArcId, len: usize) -> Result<u128> {
        if len < 2 {
            return Err(Error::InvalidParameter("walk length must be at least 2".into()));
        }
        if f >= self.arc_count() {
            return Err(Error::InvalidParameter(format!("arc {f} out of range")));
        }
        Ok(self.nb_walk_counts_from(e, len)?[f])
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.arc_count() {
            return Err(Error::DimensionMismatch {
                expected: self.arc_count(),
                actual,
            });
        }
        Ok(())
    }

    pub fn default_max_iter(&self) -> usize {
        100 * self.arc_count() + 10_000
    }

    /// Perron pair with the default tolerance and iteration cap.
    pub fn perron_default(&self) -> Result<PerronPair> {
        self.perron(DEFAULT_TOL, self.default_max_iter())
    }

    /// Power iteration on `B + I` from the all-ones vector.
    ///
    /// The identity shift makes the iteration converge even when `B` is
    /// periodic (a cycle makes `B` a permutation). Each step estimates `λ`
    /// as the largest entry of `B w` for the max-normalized iterate `w`,
    /// and stops once `‖B w − λ w‖∞ ≤ tol · λ`.
    pub fn perron(&self, tol: f64, max_iter: usize) -> Result<PerronPair> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let n = self.arc_count();
        let mut w = vec![1.0; n];
        let mut bw = vec![0.0; n];
        let mut sums = Vec::with_capacity(self.vertex_count);
        let mut residual = f64::INFINITY;
        for iteration in 1..=max_iter {
            self.nb_matvec_into(&w, &mut bw, &mut sums)?;
            let lambda = bw.iter().copied().fold(f64::MIN, f64::max);
            residual = bw
                .iter()
                .zip(&w)
                .map(|(y, x)| (y - lambda * x).abs())
                .fold(0.0, f64::max);
            if residual <= tol * lambda {
                return Ok(PerronPair {
                    lambda_star: lambda,
                    w,
                    iterations_used: iteration,
                    residual,
                });
            }
            let mut top = 0.0f64;
            for (x, y) in w.iter_mut().zip(&bw) {
                *x += y;
                top = top.max(*x);
            }
            for x in &mut w {
                *x /= top;
            }
        }
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual,
        })
    }

    /// `‖Bⁿ 1‖₁ / ‖Bⁿ⁻¹ 1‖₁`, normalizing every step to stay in range.
    ///
    /// Tends to `λ*` when `B` is aperiodic; for periodic `B` it may
    /// oscillate, which is why it serves only as a cross-check.
    pub fn gelfand_ratio_estimate(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::InvalidParameter("need n >= 2".into()));
        }
        let len = self.arc_count() as f64;
        let mut x = vec![1.0 / len; self.arc_count()];
        let mut y = vec![0.0; self.arc_count()];
        let mut sums = Vec::new();
        let mut ratio = 0.0;
        for _ in 0..n {
            self.nb_matvec_into(&x, &mut y, &mut sums)?;
            // x sums to one, so the new sum is the ratio.
            ratio = y.iter().sum::<f64>();
            for (a, b) in x.iter_mut().zip(&y) {
                *a = b / ratio;
            }
        }
        Ok(ratio)
    }
}

/// Perron eigenvalue of `B` and its positive eigenvector, scaled so the
/// largest entry is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair {
    pub lambda_star: f64,
    pub w: Vec<f64>,
    pub iterations_used: usize,
    pub residual: f64,
}

impl PerronPair {
    /// Lowest-indexed arc whose weight is within `1e-9` of the maximum.
    pub fn select_root_arc(&self) -> ArcId {
        let top = self.w.iter().copied().fold(f64::MIN, f64::max);
        self.w
            .iter()
            .position(|&x| x >= top - 1e-9)
            .expect("Perron vector is nonempty")
    }
}

/// Average-degree lower bounds on `λ*`: `μ − 1`, and the refinement
/// `μ − 1 + η(μ)³ / (8μ³)` with `η(μ)` the distance from `μ` to the nearest
/// integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeBounds {
    pub mu: f64,
    pub mu_minus_1: f64,
    pub refined: f64,
    pub integral: bool,
}

pub fn degree_lower_bounds(g: &Graph) -> Result<DegreeBounds> {
    Ok(bounds_for_average_degree(g.average_degree()?))
}

pub fn bounds_for_average_degree(mu: Ratio<u64>) -> DegreeBounds {
    let frac = mu - mu.floor();
    let eta = if frac > Ratio::new(1, 2) {
        Ratio::from_integer(1) - frac
    } else {
        frac
    };
    let mu_f = ratio_to_f64(mu);
    let eta_f = ratio_to_f64(eta);
    DegreeBounds {
        mu: mu_f,
        mu_minus_1: mu_f - 1.0,
        refined: mu_f - 1.0 + eta_f.powi(3) / (8.0 * mu_f.powi(3)),
        integral: frac == Ratio::from_integer(0),
    }
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphSpec};

    fn arcs(spec: GraphSpec) -> ArcSystem {
        ArcSystem::new(&generate(&spec, 0).unwrap()).unwrap()
    }

    #[test]
    fn arc_structure() {
        let c3 = arcs(GraphSpec::Cycle(3));
        assert_eq!(c3.arc_count(), 6);
        assert!((0..6).all(|a| c3.successors(a).count() == 1));
        let k4 = arcs(GraphSpec::Complete(4));
        assert_eq!(k4.arc_count(), 12);
        for a in 0..12 {
            assert_eq!(k4.successors(a).count(), 2);
            let r = k4.reverse(a);
            assert_eq!(k4.reverse(r), a);
            assert_eq!((k4.tail(r), k4.head(r)), (k4.head(a), k4.tail(a)));
        }
        for v in 0..4 {
            assert!(k4.out_arcs(v).iter().all(|&a| k4.tail(a) == v));
            assert_eq!(k4.out_arcs(v).len(), 3);
        }
    }

    #[test]
    fn preconditions() {
        let p3 = generate(&GraphSpec::Path(3), 0).unwrap();
        assert!(matches!(ArcSystem::new(&p3), Err(Error::MinDegree { degree: 1, .. })));
        let two_triangles =
            Graph::new(6, vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert_eq!(ArcSystem::new(&two_triangles).unwrap_err(), Error::Disconnected);
        assert_eq!(ArcSystem::new(&Graph::empty()).unwrap_err(), Error::EmptyGraph);
    }

    #[test]
    fn matvec_on_ones() {
        let c7 = arcs(GraphSpec::Cycle(7));
        assert!(c7.nb_matvec(&[1.0; 14]).unwrap().iter().all(|&y| y == 1.0));
        let p = arcs(GraphSpec::Petersen);
        assert!(p.nb_matvec(&vec![1.0; 30]).unwrap().iter().all(|&y| y == 2.0));
        assert!(matches!(
            p.nb_matvec(&[1.0; 3]),
            Err(Error::DimensionMismatch { expected: 30, actual: 3 })
        ));
    }

    #[test]
    fn matvec_on_indicator_hits_predecessors() {
        // (B x)(g) = x(e) exactly when e is a successor of g.
        let k4 = arcs(GraphSpec::Complete(4));
        for e in 0..12 {
            let mut x = vec![0.0; 12];
            x[e] = 1.0;
            let y = k4.nb_matvec(&x).unwrap();
            for (g, &yg) in y.iter().enumerate() {
                let expect = k4.successors(g).any(|f| f == e);
                assert_eq!(yg, if expect { 1.0 } else { 0.0 });
            }
            assert_eq!(y.iter().sum::<f64>(), 2.0);
        }
    }

    #[test]
    fn regular_perron() {
        for (spec, d) in [
            (GraphSpec::Complete(4), 3.0),
            (GraphSpec::Cycle(6), 2.0),
            (GraphSpec::Petersen, 3.0),
        ] {
            let pair = arcs(spec).perron_default().unwrap();
            assert!((pair.lambda_star - (d - 1.0)).abs() < 1e-9, "{spec}");
            assert!(pair.w.iter().all(|&x| (x - 1.0).abs() < 1e-9));
            assert_eq!(pair.select_root_arc(), 0);
        }
    }

    #[test]
    fn perron_irregular_residual() {
        // Two triangles sharing vertex 0 plus a chord: irregular, aperiodic.
        let g = Graph::new(5, vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        let a = ArcSystem::new(&g).unwrap();
        let pair = a.perron_default().unwrap();
        let bw = a.nb_matvec(&pair.w).unwrap();
        for (y, x) in bw.iter().zip(&pair.w) {
            assert!((y - pair.lambda_star * x).abs() <= 1e-9 * pair.lambda_star);
        }
        assert!(pair.w.iter().all(|&x| x > 0.0));
        let top = pair.w.iter().copied().fold(0.0, f64::max);
        assert!((top - 1.0).abs() < 1e-12);
        assert!(pair.w[pair.select_root_arc()] >= 1.0 - 1e-9);
    }

    #[test]
    fn perron_reports_nonconvergence() {
        let g = Graph::new(5, vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        let a = ArcSystem::new(&g).unwrap();
        assert!(matches!(a.perron(1e-14, 2), Err(Error::NoConvergence { iterations: 2, .. })));
        assert!(a.perron(0.0, 10).is_err());
    }

    #[test]
    fn walk_counts() {
        let c5 = arcs(GraphSpec::Cycle(5));
        let row = c5.nb_walk_counts_from(0, 5).unwrap();
        assert_eq!(row.iter().filter(|&&c| c == 1).count(), 1);
        assert_eq!(row.iter().sum::<u128>(), 1);
        let k4 = arcs(GraphSpec::Complete(4));
        for e in 0..12 {
            let two: Vec<_> = (0..12).map(|f| k4.count_nb_walks(e, f, 2).unwrap()).collect();
            assert_eq!(two.iter().filter(|&&c| c == 1).count(), 2);
            assert_eq!(two.iter().sum::<u128>(), 2);
            for len in 2..12 {
                let total: u128 = k4.nb_walk_counts_from(e, len).unwrap().iter().sum();
                assert_eq!(total, 1 << (len - 1));
            }
        }
        assert!(k4.count_nb_walks(0, 0, 1).is_err());
    }

    #[test]
    fn walk_count_overflow_detected() {
        let k4 = arcs(GraphSpec::Complete(4));
        assert!(k4.nb_walk_counts_from(0, 128).is_ok());
        assert!(matches!(k4.nb_walk_counts_from(0, 140), Err(Error::Overflow { .. })));
    }

    #[test]
    fn degree_bounds() {
        let p = generate(&GraphSpec::Petersen, 0).unwrap();
        let b = degree_lower_bounds(&p).unwrap();
        assert_eq!((b.mu_minus_1, b.refined, b.integral), (2.0, 2.0, true));
        let b = bounds_for_average_degree(Ratio::new(5, 2));
        assert!((b.refined - 1.501).abs() < 1e-15);
        assert!(!b.integral);
        let b = bounds_for_average_degree(Ratio::from_integer(2));
        assert_eq!(b.mu_minus_1, 1.0);
        // η uses the nearest integer from above too: μ = 2.9 → η = 0.1.
        let b = bounds_for_average_degree(Ratio::new(29, 10));
        assert!((b.refined - (1.9 + 0.001 / (8.0 * 2.9f64.powi(3)))).abs() < 1e-15);
        assert!(degree_lower_bounds(&Graph::empty()).is_err());
    }

    #[test]
    fn gelfand_estimates() {
        let k4 = arcs(GraphSpec::Complete(4));
        assert!((k4.gelfand_ratio_estimate(20).unwrap() - 2.0).abs() < 1e-6);
        let c8 = arcs(GraphSpec::Cycle(8));
        assert_eq!(c8.gelfand_ratio_estimate(20).unwrap(), 1.0);
        assert!(k4.gelfand_ratio_estimate(1).is_err());
    }
}
