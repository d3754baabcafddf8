//! `p`-random edge subsets of a host graph and the probability that they
//! contain a cycle.
//!
//! Every trial draws one uniform per edge, in edge order, from its own
//! substream and keeps the edges whose uniform is below `p`. A coupled sweep
//! reuses those uniforms at every grid point, so its curve is monotone in
//! `p` sample by sample.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{contains_circuit, girth, EdgeSubset, Girth, Graph};
use crate::mc::{self, McEstimate};
use crate::spectral::{ratio_to_f64, ArcSystem};
use crate::unionfind::UnionFind;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_GRID_POINTS: usize = 101;

pub fn sample_subgraph<R: Rng>(g: &Graph, p: f64, rng: &mut R) -> EdgeSubset {
    let m = g.edge_count();
    if p <= 0.0 {
        return EdgeSubset::empty(m);
    }
    if p >= 1.0 {
        return EdgeSubset::full(m);
    }
    EdgeSubset::from_indices(m, (0..m).filter(|_| rng.random::<f64>() < p))
}

/// Same draws as [`sample_subgraph`], stopping at the first edge that
/// closes a cycle.
fn sample_is_cyclic<R: Rng>(g: &Graph, p: f64, rng: &mut R, uf: &mut UnionFind) -> bool {
    uf.reset();
    g.edges()
        .iter()
        .any(|&(u, v)| rng.random::<f64>() < p && !uf.union(u, v))
}

/// Smallest `p` at which this trial's coupled sample turns cyclic: the
/// subset `{e : u_e < p}` has a cycle iff `p` exceeds the returned value.
/// Infinite when the host is a forest.
fn critical_threshold<R: Rng>(g: &Graph, rng: &mut R) -> f64 {
    let draws: Vec<f64> = (0..g.edge_count()).map(|_| rng.random::<f64>()).collect();
    let mut order: Vec<usize> = (0..draws.len()).collect();
    order.sort_unstable_by(|&a, &b| draws[a].total_cmp(&draws[b]).then(a.cmp(&b)));
    let mut uf = UnionFind::new(g.vertex_count());
    for e in order {
        let (u, v) = g.edge(e);
        if !uf.union(u, v) {
            return draws[e];
        }
    }
    f64::INFINITY
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Fraction of `p`-random subsets containing a cycle. `p = 0` and `p = 1`
/// are answered without sampling.
pub fn mc_cycle_prob(g: &Graph, p: f64, trials: u64, master_seed: u64) -> Result<McEstimate> {
    check_probability(p)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if p == 0.0 {
        return Ok(McEstimate::exact(0.0, trials, master_seed));
    }
    if p == 1.0 {
        let cyclic = contains_circuit(g, &EdgeSubset::full(g.edge_count()));
        return Ok(McEstimate::exact(f64::from(u8::from(cyclic)), trials, master_seed));
    }
    let n = g.vertex_count();
    let hits = mc::count_hits(trials, master_seed, |rng| {
        sample_is_cyclic(g, p, rng, &mut UnionFind::new(n))
    });
    Ok(McEstimate::from_counts(hits, trials, master_seed))
}

/// `p2` with `1 − p = (1 − p1)(1 − p2)`.
pub fn sprinkle_split(p: f64, p1: f64) -> Result<f64> {
    if !(0.0 <= p1 && p1 <= p && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= p1 <= p <= 1, got p = {p}, p1 = {p1}"
        )));
    }
    if p1 == 1.0 {
        return Err(Error::InvalidParameter("p1 = 1 leaves nothing to sprinkle".into()));
    }
    Ok((p - p1) / (1.0 - p1))
}

/// Cycle probability at `p = 1/λ* + ε` against the guaranteed `ε²/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundCheck {
    pub lambda_star: f64,
    pub epsilon: f64,
    pub p: f64,
    pub f_hat: McEstimate,
    pub bound: f64,
}

impl LowerBoundCheck {
    /// `f̂ + 3·(CI half width) ≥ ε²/4`.
    pub fn passed(&self) -> bool {
        self.f_hat.estimate + 3.0 * self.f_hat.half_width() >= self.bound
    }
}

pub fn theorem4_bound_check(g: &Graph, epsilon: f64, trials: u64, master_seed: u64) -> Result<LowerBoundCheck> {
    let arcs = ArcSystem::new(g)?;
    let lambda = arcs.perron_default()?.lambda_star;
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut p = 1.0 / lambda + epsilon;
    if p > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "1/λ* + ε = {p} exceeds 1 (λ* = {lambda})"
        )));
    }
    p = p.min(1.0);
    Ok(LowerBoundCheck {
        lambda_star: lambda,
        epsilon,
        p,
        f_hat: mc_cycle_prob(g, p, trials, master_seed)?,
        bound: epsilon * epsilon / 4.0,
    })
}

/// Summary statistics reported alongside a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphMeta {
    pub n: usize,
    pub m: usize,
    pub mu: Option<f64>,
    pub girth: Girth,
    pub lambda_star: Option<f64>,
    pub inv_lambda_star: Option<f64>,
    pub inv_mu_minus_1: Option<f64>,
}

impl GraphMeta {
    /// Spectral fields are `None` unless the graph is connected with
    /// minimum degree at least 2.
    pub fn of(g: &Graph) -> Self {
        let mu = g.average_degree().ok().map(ratio_to_f64);
        let lambda_star = ArcSystem::new(g)
            .and_then(|a| a.perron_default())
            .ok()
            .map(|pair| pair.lambda_star);
        Self {
            n: g.vertex_count(),
            m: g.edge_count(),
            mu,
            girth: girth(g),
            lambda_star,
            inv_lambda_star: lambda_star.map(|l| 1.0 / l),
            inv_mu_minus_1: mu.filter(|&m| m > 1.0).map(|m| 1.0 / (m - 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCurve {
    pub points: Vec<CurvePoint>,
    pub coupled: bool,
    pub meta: GraphMeta,
}

impl ThresholdCurve {
    pub fn values(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|pt| (pt.p, pt.estimate.estimate)).collect()
    }

    /// No later point falls below an earlier one by more than `k` combined
    /// CI half widths.
    pub fn is_monotone_within(&self, k: f64) -> bool {
        self.points.windows(2).all(|w| {
            let slack = k * (w[0].estimate.half_width() + w[1].estimate.half_width());
            w[1].estimate.estimate + slack >= w[0].estimate.estimate
        })
    }
}

/// Strictly increasing probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(Vec<f64>);

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("grid point outside [0, 1]".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
        Ok(Self(points))
    }

    /// `count` evenly spaced points from 0 to 1 inclusive.
    pub fn uniform(count: usize) -> Self {
        assert!(count >= 2);
        Self((0..count).map(|i| i as f64 / (count - 1) as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::uniform(DEFAULT_GRID_POINTS)
    }
}

/// `lo:hi:step`, both ends included. Points are `lo + (hi − lo)·i/k`, so the
/// endpoints are exact and steps do not accumulate rounding.
impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidParameter(format!("grid {s:?}: {why}"));
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("expected lo:hi:step"))?;
        let [lo, hi, step] = parts[..] else {
            return Err(bad("expected lo:hi:step"));
        };
        if step.is_nan() || step <= 0.0 || lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(bad("need lo <= hi and step > 0"));
        }
        let steps = ((hi - lo) / step).round();
        if ((hi - lo) - steps * step).abs() > 1e-9 * step.max(1.0) {
            return Err(bad("step does not divide hi - lo"));
        }
        let k = steps as usize;
        if k == 0 {
            return Self::new(vec![lo]);
        }
        Self::new((0..=k).map(|i| if i == k { hi } else { lo + (hi - lo) * i as f64 / k as f64 }).collect())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Cycle probability at every grid point.
///
/// Coupled: one vector of edge uniforms per trial, thresholded at each `p`.
/// Uncoupled: grid point `i` runs [`mc_cycle_prob`] under master seed
/// `substream_seed(master_seed, i)`.
pub fn threshold_sweep(g: &Graph, grid: &Grid, trials: u64, master_seed: u64, coupled: bool) -> Result<ThresholdCurve> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let meta = GraphMeta::of(g);
    let cyclic = meta.girth != Girth::Infinite;
    let points = if coupled {
        let thresholds = mc::collect_samples(trials, master_seed, |rng| critical_threshold(g, rng));
        grid.points()
            .iter()
            .map(|&p| {
                let estimate = match p {
                    0.0 => McEstimate::exact(0.0, trials, master_seed),
                    1.0 => McEstimate::exact(f64::from(u8::from(cyclic)), trials, master_seed),
                    _ => {
                        let hits = thresholds.iter().filter(|&&t| t < p).count() as u64;
                        McEstimate::from_counts(hits, trials, master_seed)
                    }
                };
                CurvePoint { p, estimate }
            })
            .collect()
    } else {
        grid.points()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let seed = mc::substream_seed(master_seed, i as u64);
                Ok(CurvePoint {
                    p,
                    estimate: mc_cycle_prob(g, p, trials, seed)?,
                })
            })
            .collect::<Result<_>>()?
    };
    Ok(ThresholdCurve { points, coupled, meta })
}

/// Length of `{p : ε ≤ f(p) ≤ 1 − ε}` for the piecewise-linear interpolant
/// of the curve over its grid hull.
pub fn transition_width(curve: &ThresholdCurve, epsilon: f64) -> Result<f64> {
    transition_width_of(&curve.values(), epsilon)
}

pub fn transition_width_of(points: &[(f64, f64)], epsilon: f64) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("need at least two curve points".into()));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside (0, 1/2)")));
    }
    let (lo, hi) = (epsilon, 1.0 - epsilon);
    let mut width = 0.0;
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let dx = x1 - x0;
        if y0 == y1 {
            if (lo..=hi).contains(&y0) {
                width += dx;
            }
            continue;
        }
        // Parameter t in [0, 1] where the segment lies inside the band.
        let at = |y: f64| (y - y0) / (y1 - y0);
        let (ta, tb) = (at(lo), at(hi));
        let (t_min, t_max) = (ta.min(tb).max(0.0), ta.max(tb).min(1.0));
        if t_max > t_min {
            width += (t_max - t_min) * dx;
        }
    }
    Ok(width)
}
