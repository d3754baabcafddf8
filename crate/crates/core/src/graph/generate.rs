use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

const PAIRING_RETRY_CAP: usize = 1000;

/// Generator spec in the shell-friendly `kind:arg:arg` grammar, e.g.
/// `cycle:6`, `complete:4`, `random_regular:50:3`, `gnm:100:180`, `petersen`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSpec {
    Cycle(usize),
    Path(usize),
    Complete(usize),
    Petersen,
    RandomRegular { n: usize, d: usize },
    Gnm { n: usize, m: usize },
}

impl GraphSpec {
    /// Whether the output depends on the seed.
    pub fn is_random(&self) -> bool {
        matches!(self, GraphSpec::RandomRegular { .. } | GraphSpec::Gnm { .. })
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Petersen => f.write_str("petersen"),
            GraphSpec::RandomRegular { n, d } => write!(f, "random_regular:{n}:{d}"),
            GraphSpec::Gnm { n, m } => write!(f, "gnm:{n}:{m}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::InvalidParameter(format!("cannot parse generator spec {s:?}"));
        let num = |i: usize| -> Result<usize> {
            parts.get(i).and_then(|t| t.parse().ok()).ok_or_else(bad)
        };
        let spec = match (parts[0], parts.len()) {
            ("cycle", 2) => GraphSpec::Cycle(num(1)?),
            ("path", 2) => GraphSpec::Path(num(1)?),
            ("complete", 2) => GraphSpec::Complete(num(1)?),
            ("petersen", 1) => GraphSpec::Petersen,
            ("random_regular", 3) => GraphSpec::RandomRegular {
                n: num(1)?,
                d: num(2)?,
            },
            ("gnm", 3) => GraphSpec::Gnm {
                n: num(1)?,
                m: num(2)?,
            },
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

/// Deterministic in `(spec, seed)`; the seed is ignored by the
/// deterministic families.
pub fn generate(spec: &GraphSpec, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *spec {
        GraphSpec::Cycle(n) => {
            if n < 3 {
                return Err(Error::Infeasible(format!("cycle needs n >= 3, got {n}")));
            }
            Ok(Graph::from_simple_edges(
                n,
                (0..n).map(|i| (i, (i + 1) % n)).collect(),
            ))
        }
        GraphSpec::Path(n) => Ok(Graph::from_simple_edges(
            n,
            (1..n).map(|i| (i - 1, i)).collect(),
        )),
        GraphSpec::Complete(n) => {
            let edges = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            Ok(Graph::from_simple_edges(n, edges))
        }
        GraphSpec::Petersen => {
            let mut edges = Vec::with_capacity(15);
            edges.extend((0..5).map(|i| (i, (i + 1) % 5)));
            edges.extend((0..5).map(|i| (i, i + 5)));
            edges.extend((0..5).map(|i| (5 + i, 5 + (i + 2) % 5)));
            Ok(Graph::from_simple_edges(10, edges))
        }
        GraphSpec::RandomRegular { n, d } => random_regular(n, d, &mut rng),
        GraphSpec::Gnm { n, m } => gnm(n, m, &mut rng),
    }
}

/// Pairing (configuration) model, rejecting loops and repeated pairs.
fn random_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if (n * d) % 2 != 0 || (n > 0 && d >= n) {
        return Err(Error::Infeasible(format!(
            "no simple {d}-regular graph on {n} vertices"
        )));
    }
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut seen = HashSet::with_capacity(n * d / 2);
    'attempt: for _ in 0..PAIRING_RETRY_CAP {
        points.shuffle(rng);
        seen.clear();
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return Ok(Graph::from_simple_edges(n, edges));
    }
    Err(Error::RetryCapExceeded {
        attempts: PAIRING_RETRY_CAP,
    })
}

/// Uniform `m`-subset of the `n(n-1)/2` vertex pairs, listed in
/// lexicographic order.
fn gnm(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(Error::Infeasible(format!(
            "{m} edges exceed the {pairs} pairs on {n} vertices"
        )));
    }
    let mut picked = index::sample(rng, pairs, m).into_vec();
    picked.sort_unstable();
    let edges = picked.into_iter().map(|k| unrank_pair(n, k)).collect();
    Ok(Graph::from_simple_edges(n, edges))
}

/// Inverse of the row-major enumeration of pairs `u < v`.
fn unrank_pair(n: usize, mut k: usize) -> (usize, usize) {
    let mut u = 0;
    loop {
        let row = n - u - 1;
        if k < row {
            return (u, u + 1 + k);
        }
        k -= row;
        u += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{girth, Girth};

    #[test]
    fn parse_and_display() {
        for s in ["cycle:5", "path:3", "complete:4", "petersen", "random_regular:50:3", "gnm:10:12"] {
            assert_eq!(s.parse::<GraphSpec>().unwrap().to_string(), s);
        }
        assert!("cycle".parse::<GraphSpec>().is_err());
        assert!("cycle:x".parse::<GraphSpec>().is_err());
        assert!("wheel:5".parse::<GraphSpec>().is_err());
        assert!("gnm:5".parse::<GraphSpec>().is_err());
    }

    #[test]
    fn deterministic_families() {
        let c5 = generate(&GraphSpec::Cycle(5), 0).unwrap();
        assert_eq!(girth(&c5), Girth::Finite(5));
        assert_eq!(c5.regular_degree(), Some(2));
        let k4 = generate(&GraphSpec::Complete(4), 0).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert_eq!(k4.regular_degree(), Some(3));
        let p = generate(&GraphSpec::Petersen, 0).unwrap();
        p.audit().unwrap();
        assert_eq!(p.regular_degree(), Some(3));
        assert!(generate(&GraphSpec::Cycle(2), 0).is_err());
    }

    #[test]
    fn random_regular_is_regular_and_reproducible() {
        let spec = GraphSpec::RandomRegular { n: 50, d: 3 };
        let g = generate(&spec, 7).unwrap();
        g.audit().unwrap();
        assert_eq!(g.vertex_count(), 50);
        assert!((0..50).all(|v| g.degree(v) == 3));
        assert_eq!(g, generate(&spec, 7).unwrap());
        assert_ne!(g, generate(&spec, 8).unwrap());
    }

    #[test]
    fn infeasible_parameters() {
        assert!(matches!(
            generate(&GraphSpec::RandomRegular { n: 5, d: 3 }, 0),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            generate(&GraphSpec::Gnm { n: 4, m: 7 }, 0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn gnm_hits_every_pair_when_full() {
        let g = generate(&GraphSpec::Gnm { n: 6, m: 15 }, 3).unwrap();
        assert_eq!(g, generate(&GraphSpec::Complete(6), 0).unwrap());
        let g = generate(&GraphSpec::Gnm { n: 300, m: 450 }, 3).unwrap();
        g.audit().unwrap();
        assert_eq!(g.edge_count(), 450);
    }

    #[test]
    fn unrank_covers_all_pairs() {
        let n = 7;
        let all: Vec<_> = (0..21).map(|k| unrank_pair(n, k)).collect();
        let expected: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        assert_eq!(all, expected);
    }
}
