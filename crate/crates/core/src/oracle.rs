//! Exhaustive enumeration over edge subsets of small graphs.
//!
//! Subset `x` is the bitmask of edge indices it contains. Cyclicity of a
//! subset is tested with a union-find pass over its edges.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::unionfind::UnionFind;

pub const POLY_GUARD: usize = 24;
pub const DELTA_GUARD: usize = 18;
/// Two rounds enumerate `4^m` subset pairs, so the cap is lower.
pub const TWO_ROUND_GUARD: usize = 12;

const CHUNK: u64 = 1 << 12;

fn check_guard(g: &Graph, guard: usize, force: bool) -> Result<()> {
    let edges = g.edge_count();
    if edges > 40 || (!force && edges > guard) {
        return Err(Error::GuardExceeded { edges, guard });
    }
    Ok(())
}

fn mask_is_cyclic(g: &Graph, mask: u64, uf: &mut UnionFind) -> bool {
    uf.reset();
    let mut rest = mask;
    while rest != 0 {
        let e = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let (u, v) = g.edge(e);
        if !uf.union(u, v) {
            return true;
        }
    }
    false
}

/// `N_k` = number of `k`-edge subsets containing a cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclicityPolynomial {
    pub m: usize,
    pub counts: Vec<u64>,
}

impl CyclicityPolynomial {
    /// Probability that a `p`-random subset contains a cycle.
    pub fn eval(&self, p: f64) -> f64 {
        let m = self.m;
        if p <= 0.0 {
            return self.counts[0] as f64;
        }
        if p >= 1.0 {
            return self.counts[m] as f64;
        }
        let q = 1.0 - p;
        if m <= 20 {
            return self
                .counts
                .iter()
                .enumerate()
                .map(|(k, &n)| n as f64 * p.powi(k as i32) * q.powi((m - k) as i32))
                .sum();
        }
        let (lp, lq) = (p.ln(), q.ln());
        self.counts
            .iter()
            .enumerate()
            .filter(|&(_, &n)| n > 0)
            .map(|(k, &n)| ((n as f64).ln() + k as f64 * lp + (m - k) as f64 * lq).exp())
            .sum()
    }

    pub fn binomial(m: usize, k: usize) -> u64 {
        let k = k.min(m - k);
        (0..k).fold(1u64, |acc, i| acc * (m - i) as u64 / (i + 1) as u64)
    }

    /// `N_k ≤ C(m, k)` and `N_k / C(m, k)` weakly increasing.
    pub fn is_consistent(&self) -> bool {
        let fractions: Vec<(u64, u64)> = (0..=self.m)
            .map(|k| (self.counts[k], Self::binomial(self.m, k)))
            .collect();
        fractions.iter().all(|&(n, c)| n <= c)
            && fractions
                .windows(2)
                .all(|w| u128::from(w[0].0) * u128::from(w[1].1) <= u128::from(w[1].0) * u128::from(w[0].1))
    }
}

pub fn exact_cyclicity_poly(g: &Graph) -> Result<CyclicityPolynomial> {
    exact_cyclicity_poly_with(g, false)
}

/// `force` lifts the default 24-edge guard.
pub fn exact_cyclicity_poly_with(g: &Graph, force: bool) -> Result<CyclicityPolynomial> {
    check_guard(g, POLY_GUARD, force)?;
    let m = g.edge_count();
    let total = 1u64 << m;
    let counts = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut uf = UnionFind::new(g.vertex_count());
            let mut local = vec![0u64; m + 1];
            for mask in chunk * CHUNK..((chunk + 1) * CHUNK).min(total) {
                if mask_is_cyclic(g, mask, &mut uf) {
                    local[mask.count_ones() as usize] += 1;
                }
            }
            local
        })
        .reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(CyclicityPolynomial { m, counts })
}

pub fn exact_cycle_prob(g: &Graph, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    Ok(exact_cyclicity_poly(g)?.eval(p))
}

fn cyclic_table(g: &Graph) -> Vec<bool> {
    let total = 1u64 << g.edge_count();
    (0..total)
        .into_par_iter()
        .map_init(
            || UnionFind::new(g.vertex_count()),
            |uf, mask| mask_is_cyclic(g, mask, uf),
        )
        .collect()
}

/// Smallest nonzero number of acyclic neighbours `X \ {e}` over cyclic edge
/// sets `X`. Supersets of a cyclic set are cyclic, so only removals count.
pub fn exact_delta(g: &Graph) -> Result<usize> {
    exact_delta_with(g, false)
}

pub fn exact_delta_with(g: &Graph, force: bool) -> Result<usize> {
    check_guard(g, DELTA_GUARD, force)?;
    let cyclic = cyclic_table(g);
    (0..cyclic.len() as u64)
        .into_par_iter()
        .filter(|&x| cyclic[x as usize])
        .filter_map(|x| {
            let mut rest = x;
            let mut boundary = 0;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                rest ^= bit;
                if !cyclic[(x ^ bit) as usize] {
                    boundary += 1;
                }
            }
            (boundary > 0).then_some(boundary)
        })
        .min()
        .ok_or(Error::Acyclic)
}

/// Probability that the union of independent `p1`- and `p2`-random subsets
/// contains a cycle, by enumerating each edge's outcome in both rounds.
pub fn exact_two_round_cycle_prob(g: &Graph, p1: f64, p2: f64) -> Result<f64> {
    check_guard(g, TWO_ROUND_GUARD, false)?;
    for p in [p1, p2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
        }
    }
    let m = g.edge_count();
    let cyclic = cyclic_table(g);
    let full = (1u64 << m) - 1;
    let total = (0..=full)
        .into_par_iter()
        .map(|first| {
            let k1 = first.count_ones() as i32;
            let w1 = p1.powi(k1) * (1.0 - p1).powi(m as i32 - k1);
            if w1 == 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for second in 0..=full {
                if cyclic[(first | second) as usize] {
                    let k2 = second.count_ones() as i32;
                    acc += p2.powi(k2) * (1.0 - p2).powi(m as i32 - k2);
                }
            }
            w1 * acc
        })
        .collect::<Vec<f64>>();
    Ok(total.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, girth, Girth, GraphSpec};
    use crate::percolation::sprinkle_split;

    fn gen(spec: GraphSpec) -> Graph {
        generate(&spec, 0).unwrap()
    }

    /// K4 minus an edge, and two theta graphs.
    fn extras() -> Vec<Graph> {
        vec![
            Graph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]).unwrap(),
            // Paths of lengths 1, 2, 3 between 0 and 1.
            Graph::new(5, vec![(0, 1), (0, 2), (2, 1), (0, 3), (3, 4), (4, 1)]).unwrap(),
            // Three paths of length 2.
            Graph::new(5, vec![(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)]).unwrap(),
        ]
    }

    #[test]
    fn triangle_counts() {
        let poly = exact_cyclicity_poly(&gen(GraphSpec::Complete(3))).unwrap();
        assert_eq!(poly.counts, vec![0, 0, 0, 1]);
        assert_eq!(poly.eval(0.5), 0.125);
    }

    #[test]
    fn k4_fixture() {
        let poly = exact_cyclicity_poly(&gen(GraphSpec::Complete(4))).unwrap();
        // 4 triangles; 3-sets minus 16 spanning trees; all larger sets.
        assert_eq!(poly.counts, vec![0, 0, 0, 4, 15, 6, 1]);
        assert!((poly.eval(0.5) - 26.0 / 64.0).abs() < 1e-15);
        assert!(poly.is_consistent());
    }

    #[test]
    fn cycles_are_powers() {
        for n in 3..=9 {
            let poly = exact_cyclicity_poly(&gen(GraphSpec::Cycle(n))).unwrap();
            for p in [0.1, 0.5, 0.9] {
                assert!((poly.eval(p) - p.powi(n as i32)).abs() < 1e-14);
            }
        }
        let c4 = gen(GraphSpec::Cycle(4));
        assert!((exact_cycle_prob(&c4, 0.9).unwrap() - 0.6561).abs() < 1e-12);
    }

    #[test]
    fn forests_are_zero() {
        let path = gen(GraphSpec::Path(6));
        for p in [0.0, 0.4, 1.0] {
            assert_eq!(exact_cycle_prob(&path, p).unwrap(), 0.0);
        }
        assert_eq!(exact_delta(&path), Err(Error::Acyclic));
    }

    #[test]
    fn log_space_matches_direct() {
        let g = generate(&GraphSpec::Gnm { n: 12, m: 22 }, 3).unwrap();
        let poly = exact_cyclicity_poly(&g).unwrap();
        assert!(poly.is_consistent());
        assert_eq!(poly.counts[22], 1);
        for p in [0.05f64, 0.3, 0.7, 0.95] {
            let direct: f64 = poly
                .counts
                .iter()
                .enumerate()
                .map(|(k, &n)| n as f64 * p.powi(k as i32) * (1.0 - p).powi(22 - k as i32))
                .sum();
            assert!((poly.eval(p) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_with_exact_endpoints() {
        let poly = exact_cyclicity_poly(&gen(GraphSpec::Petersen)).unwrap();
        assert_eq!(poly.eval(0.0), 0.0);
        assert_eq!(poly.eval(1.0), 1.0);
        let values: Vec<f64> = (0..=100).map(|i| poly.eval(i as f64 / 100.0)).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }

    #[test]
    fn guards() {
        let big = generate(&GraphSpec::Gnm { n: 10, m: 25 }, 0).unwrap();
        assert_eq!(
            exact_cyclicity_poly(&big),
            Err(Error::GuardExceeded { edges: 25, guard: 24 })
        );
        let petersen = gen(GraphSpec::Petersen);
        assert!(matches!(exact_delta(&petersen), Ok(5)));
        let k5 = gen(GraphSpec::Complete(5));
        assert!(exact_delta(&k5).is_ok());
        let k7 = gen(GraphSpec::Complete(7));
        assert!(matches!(exact_delta(&k7), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn delta_equals_girth() {
        let mut corpus: Vec<Graph> = (3..=8).map(|n| gen(GraphSpec::Cycle(n))).collect();
        corpus.push(gen(GraphSpec::Complete(4)));
        corpus.extend(extras());
        for g in &corpus {
            let Girth::Finite(s) = girth(g) else { unreachable!() };
            assert_eq!(exact_delta(g).unwrap(), s, "{:?}", g.edges());
        }
    }

    #[test]
    fn sprinkling_matches_single_round() {
        let mut corpus = vec![
            gen(GraphSpec::Complete(3)),
            gen(GraphSpec::Complete(4)),
            gen(GraphSpec::Cycle(5)),
        ];
        corpus.extend(extras());
        for g in &corpus {
            for p in [0.3, 0.6] {
                for p1 in [0.1, 0.5] {
                    if p1 > p {
                        continue;
                    }
                    let p2 = sprinkle_split(p, p1).unwrap();
                    let two = exact_two_round_cycle_prob(g, p1, p2).unwrap();
                    let one = exact_cycle_prob(g, p).unwrap();
                    assert!((two - one).abs() < 1e-12, "{two} vs {one}");
                }
            }
        }
        let k3 = gen(GraphSpec::Complete(3));
        let two = exact_two_round_cycle_prob(&k3, 0.5, 0.2).unwrap();
        assert!((two - 0.216).abs() < 1e-12);
    }
}
