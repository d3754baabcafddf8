//! The self-check suite behind `nbperc verify`.
//!
//! Per-graph checks run over a configurable corpus and skip, with a reason,
//! when a graph fails their preconditions. Suite-level checks run on fixed
//! hosts. Every outcome is a pure function of the configuration, so the JSON
//! summary is reproducible.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::corpus::{self, NamedGraph};
use crate::error::{Error, Result};
use crate::graph::{
    generate, giant_two_core, girth, pack_short_circuits, peel_to_two_core, Girth, Graph, GraphSpec,
};
use crate::mc::substream_seed;
use crate::oracle::{exact_cyclicity_poly, exact_delta, exact_two_round_cycle_prob};
use crate::percolation::{mc_cycle_prob, sprinkle_split, theorem4_bound_check, threshold_sweep, transition_width, Grid};
use crate::spectral::{degree_lower_bounds, ArcSystem, PerronPair};
use crate::tree::{
    estimate_root_path_prob, exact_root_path_prob, second_moment_audit, TruncatedCoveringTree, UnitFlow,
    DEFAULT_NODE_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageEntry {
    pub id: &'static str,
    pub module: &'static str,
    pub property: &'static str,
}

/// Check ids and the property each one exercises. Per-graph checks append
/// `[graph name]` to their id.
pub const COVERAGE: &[(&str, &str, &str)] = &[
    ("graph.girth_vs_enumeration", "graph_core", "girth is the smallest cyclic subset size"),
    ("graph.two_core", "graph_core", "2-core has min degree 2, is idempotent and keeps the girth"),
    ("graph.packing", "graph_core", "residual after packing has girth >= s"),
    ("spectral.regular", "spectral_nb", "lambda* = d - 1 on d-regular hosts"),
    ("spectral.degree_bounds", "spectral_nb", "lambda* >= mu - 1 and the refined bound"),
    ("spectral.eigenpair", "spectral_nb", "Bw = lambda w, w > 0, max w = 1"),
    ("tree.levels", "covering_tree", "level sizes equal non-backtracking walk counts"),
    ("tree.root_path_bound", "covering_tree", "P(root reaches depth n) >= p - 1/lambda"),
    ("perc.cycle_lower_bound", "percolation", "f(1/lambda + eps) >= eps^2 / 4"),
    ("oracle.polynomial", "exact_oracle", "cyclicity counts are consistent"),
    ("oracle.mc_equivalence", "exact_oracle", "Monte Carlo f agrees with exact f"),
    ("oracle.delta_girth", "exact_oracle", "Delta of the cyclic family equals the girth"),
    ("oracle.sprinkling", "exact_oracle", "two rounds at p1, p2 equal one round at p"),
    ("suite.regular_identity", "spectral_nb", "lambda* = d - 1 for K4, Petersen, C6, C12"),
    ("suite.degree_bounds_corpus", "spectral_nb", "degree bounds on 50 random 2-cores"),
    ("suite.root_path_exact", "covering_tree", "root-path bound and Monte Carlo agreement"),
    ("suite.q_moments", "covering_tree", "E(Q) = 1 and E(Q^2) <= 1/(p - 1/lambda)"),
    ("suite.cycle_lower_bound", "percolation", "cycle probability above eps^2 / 4"),
    ("suite.oracle_equivalence", "exact_oracle", "Monte Carlo vs exact on the small corpus"),
    ("suite.delta_girth", "exact_oracle", "Delta = girth on the small corpus"),
    ("suite.width_trend", "percolation", "transition width shrinks with girth"),
    ("suite.threshold_trend", "percolation", "f jumps across 1/(mu - 1) on a large 2-core"),
    ("suite.coupled_monotone", "percolation", "coupled sweeps are monotone with exact endpoints"),
];

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Trials for the Monte Carlo checks that do not fix their own count.
    pub trials: u64,
    /// Allowed `|λ* − (d − 1)|` on regular hosts. A negative value makes
    /// those checks fail on purpose.
    pub lambda_tolerance: f64,
    pub corpus: Vec<NamedGraph>,
    /// Run the suite-level checks too, not only the per-graph ones.
    pub suite: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 100_000,
            lambda_tolerance: 1e-8,
            corpus: corpus::small(),
            suite: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub trials: u64,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<CheckOutcome>,
    pub coverage: Vec<CoverageEntry>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

struct Runner<'a> {
    checks: Vec<CheckOutcome>,
    report: &'a mut dyn FnMut(&CheckOutcome, Duration),
}

impl Runner<'_> {
    fn run(&mut self, id: String, f: impl FnOnce() -> Result<Verdict>) {
        let start = Instant::now();
        let (status, detail) = match f() {
            Ok(Verdict::Pass(d)) => (Status::Pass, d),
            Ok(Verdict::Fail(d)) => (Status::Fail, d),
            Ok(Verdict::Skip(d)) => (Status::Skip, d),
            Err(e) => (Status::Fail, format!("error: {e}")),
        };
        let outcome = CheckOutcome { id, status, detail };
        (self.report)(&outcome, start.elapsed());
        self.checks.push(outcome);
    }
}

/// Runs the suite, calling `report` after each check with its wall time.
pub fn run(config: &VerifyConfig, report: &mut dyn FnMut(&CheckOutcome, Duration)) -> VerifySummary {
    let mut runner = Runner {
        checks: Vec::new(),
        report,
    };
    for named in &config.corpus {
        per_graph(&mut runner, config, named);
    }
    if config.suite {
        suite(&mut runner, config);
    }
    let count = |s: Status| runner.checks.iter().filter(|c| c.status == s).count();
    VerifySummary {
        seed: config.seed,
        trials: config.trials,
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skip),
        coverage: COVERAGE
            .iter()
            .map(|&(id, module, property)| CoverageEntry { id, module, property })
            .collect(),
        checks: runner.checks,
    }
}

fn spectral_pair(g: &Graph) -> std::result::Result<PerronPair, String> {
    ArcSystem::new(g)
        .and_then(|a| a.perron_default())
        .map_err(|e| format!("spectral preconditions: {e}"))
}

fn regular_identity(g: &Graph, tolerance: f64) -> Result<Verdict> {
    let Some(d) = g.regular_degree() else {
        return Ok(Verdict::Skip("not regular".into()));
    };
    let pair = match spectral_pair(g) {
        Ok(p) => p,
        Err(why) => return Ok(Verdict::Skip(why)),
    };
    let err = (pair.lambda_star - (d as f64 - 1.0)).abs();
    Ok(verdict(
        err <= tolerance,
        format!("lambda*={} d={d} |err|={err:e} tol={tolerance:e}", pair.lambda_star),
    ))
}

fn degree_bounds_verdict(g: &Graph) -> Result<Verdict> {
    let pair = match spectral_pair(g) {
        Ok(p) => p,
        Err(why) => return Ok(Verdict::Skip(why)),
    };
    let b = degree_lower_bounds(g)?;
    let ok = pair.lambda_star >= b.mu_minus_1 - 1e-9 && pair.lambda_star >= b.refined - 1e-9;
    Ok(verdict(
        ok,
        format!("lambda*={} mu-1={} refined={}", pair.lambda_star, b.mu_minus_1, b.refined),
    ))
}

/// Five evenly spaced points in `(1/λ, 1]`.
pub fn root_path_grid(lambda: f64) -> Vec<f64> {
    let inv = 1.0 / lambda;
    (1..=5).map(|i| inv + (1.0 - inv) * i as f64 / 5.0).collect()
}

fn per_graph(r: &mut Runner, config: &VerifyConfig, named: &NamedGraph) {
    let g = &named.graph;
    let tag = |id: &str| format!("{id}[{}]", named.name);
    let m = g.edge_count();

    r.run(tag("graph.girth_vs_enumeration"), || {
        if m > 16 {
            return Ok(Verdict::Skip(format!("{m} edges > 16")));
        }
        let poly = exact_cyclicity_poly(g)?;
        let smallest = poly.counts.iter().position(|&c| c > 0);
        let g_len = girth(g);
        Ok(verdict(
            smallest == g_len.finite(),
            format!("girth={g_len} smallest cyclic size={smallest:?}"),
        ))
    });

    r.run(tag("graph.two_core"), || {
        let core = peel_to_two_core(g);
        let again = peel_to_two_core(&core.graph);
        let ok = core.graph.min_degree().is_none_or(|d| d >= 2)
            && again.graph == core.graph
            && girth(&core.graph) == girth(g);
        Ok(verdict(
            ok,
            format!("core {} vertices, {} edges", core.graph.vertex_count(), core.graph.edge_count()),
        ))
    });

    r.run(tag("graph.packing"), || {
        let mut ok = true;
        for s in [4, 5, 6] {
            let pack = pack_short_circuits(g, s);
            ok &= girth(&pack.residual).at_least(s);
            ok &= pack.circuits.iter().all(|c| c.len() < s);
        }
        Ok(verdict(ok, "s in {4,5,6}".into()))
    });

    r.run(tag("spectral.regular"), || regular_identity(g, config.lambda_tolerance));
    r.run(tag("spectral.degree_bounds"), || degree_bounds_verdict(g));

    r.run(tag("spectral.eigenpair"), || {
        let arcs = match ArcSystem::new(g) {
            Ok(a) => a,
            Err(e) => return Ok(Verdict::Skip(format!("spectral preconditions: {e}"))),
        };
        let pair = arcs.perron_default()?;
        let bw = arcs.nb_matvec(&pair.w)?;
        let residual = bw
            .iter()
            .zip(&pair.w)
            .map(|(y, x)| (y - pair.lambda_star * x).abs())
            .fold(0.0, f64::max);
        let top = pair.w.iter().copied().fold(0.0, f64::max);
        let ok = residual <= 1e-9 * pair.lambda_star.max(1.0)
            && pair.w.iter().all(|&x| x > 0.0)
            && (top - 1.0).abs() <= 1e-12;
        Ok(verdict(ok, format!("residual={residual:e}")))
    });

    r.run(tag("tree.levels"), || {
        let arcs = match ArcSystem::new(g) {
            Ok(a) => a,
            Err(e) => return Ok(Verdict::Skip(format!("spectral preconditions: {e}"))),
        };
        let depth = 6;
        let tree = TruncatedCoveringTree::build(&arcs, 0, depth, DEFAULT_NODE_CAP)?;
        for k in 2..=depth {
            let walks: u128 = arcs.nb_walk_counts_from(0, k)?.iter().sum();
            if tree.level(k).len() as u128 != walks {
                return Ok(Verdict::Fail(format!("level {k} has {} nodes, {walks} walks", tree.level(k).len())));
            }
        }
        Ok(Verdict::Pass(format!("{} nodes", tree.node_count())))
    });

    r.run(tag("tree.root_path_bound"), || {
        let arcs = match ArcSystem::new(g) {
            Ok(a) => a,
            Err(e) => return Ok(Verdict::Skip(format!("spectral preconditions: {e}"))),
        };
        let pair = arcs.perron_default()?;
        if pair.lambda_star <= 1.0 + 1e-9 {
            return Ok(Verdict::Skip("lambda* = 1: no p in (1/lambda, 1) to test".into()));
        }
        let tree = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 8, DEFAULT_NODE_CAP)?;
        let mut worst = f64::INFINITY;
        for p in root_path_grid(pair.lambda_star) {
            for n in [4, 8] {
                worst = worst.min(exact_root_path_prob(&tree, p, n)? - (p - 1.0 / pair.lambda_star));
            }
        }
        Ok(verdict(worst >= -1e-12, format!("min(exact - bound)={worst}")))
    });

    r.run(tag("perc.cycle_lower_bound"), || {
        let pair = match spectral_pair(g) {
            Ok(p) => p,
            Err(why) => return Ok(Verdict::Skip(why)),
        };
        let eps = 0.1;
        if 1.0 / pair.lambda_star + eps > 1.0 {
            return Ok(Verdict::Skip(format!("1/lambda* + {eps} > 1")));
        }
        let c = theorem4_bound_check(g, eps, config.trials, config.seed)?;
        Ok(verdict(
            c.passed(),
            format!("p={} f={} bound={}", c.p, c.f_hat.estimate, c.bound),
        ))
    });

    r.run(tag("oracle.polynomial"), || {
        if m > 16 {
            return Ok(Verdict::Skip(format!("{m} edges > 16")));
        }
        let poly = exact_cyclicity_poly(g)?;
        let cyclic = girth(g) != Girth::Infinite;
        let ends = poly.eval(0.0) == 0.0 && poly.eval(1.0) == f64::from(u8::from(cyclic));
        Ok(verdict(poly.is_consistent() && ends, format!("counts={:?}", poly.counts)))
    });

    r.run(tag("oracle.mc_equivalence"), || {
        if m > 16 {
            return Ok(Verdict::Skip(format!("{m} edges > 16")));
        }
        let poly = exact_cyclicity_poly(g)?;
        let mut worst = 0.0f64;
        for (i, p) in [0.2, 0.5, 0.8].into_iter().enumerate() {
            let est = mc_cycle_prob(g, p, config.trials, substream_seed(config.seed, i as u64))?;
            if !est.agrees_with(poly.eval(p), 3.0) {
                return Ok(Verdict::Fail(format!("p={p}: mc={} exact={}", est.estimate, poly.eval(p))));
            }
            worst = worst.max((est.estimate - poly.eval(p)).abs());
        }
        Ok(Verdict::Pass(format!("max |mc - exact|={worst:e}")))
    });

    r.run(tag("oracle.delta_girth"), || {
        if m > 12 {
            return Ok(Verdict::Skip(format!("{m} edges > 12")));
        }
        match exact_delta(g) {
            Err(Error::Acyclic) => Ok(Verdict::Skip("forest: no cyclic edge sets".into())),
            Err(e) => Err(e),
            Ok(delta) => Ok(verdict(
                girth(g) == Girth::Finite(delta),
                format!("delta={delta} girth={}", girth(g)),
            )),
        }
    });

    r.run(tag("oracle.sprinkling"), || {
        if m > 10 {
            return Ok(Verdict::Skip(format!("{m} edges > 10")));
        }
        let poly = exact_cyclicity_poly(g)?;
        let mut worst = 0.0f64;
        for p in [0.3, 0.6] {
            for p1 in [0.1, 0.5].into_iter().filter(|&p1| p1 <= p) {
                let p2 = sprinkle_split(p, p1)?;
                worst = worst.max((exact_two_round_cycle_prob(g, p1, p2)? - poly.eval(p)).abs());
            }
        }
        Ok(verdict(worst <= 1e-12, format!("max diff={worst:e}")))
    });
}

fn suite(r: &mut Runner, config: &VerifyConfig) {
    let fixed = |spec: GraphSpec| generate(&spec, 0).expect("fixed spec");

    r.run("suite.regular_identity".into(), || {
        for spec in [GraphSpec::Complete(4), GraphSpec::Petersen, GraphSpec::Cycle(6), GraphSpec::Cycle(12)] {
            if let Verdict::Fail(d) | Verdict::Skip(d) = regular_identity(&fixed(spec), config.lambda_tolerance)? {
                return Ok(Verdict::Fail(format!("{spec}: {d}")));
            }
        }
        Ok(Verdict::Pass("K4, Petersen, C6, C12".into()))
    });

    r.run("suite.degree_bounds_corpus".into(), || {
        let cores = corpus::two_core_corpus(50, config.seed);
        let mut nonintegral = 0;
        for named in &cores {
            let mu = named.graph.average_degree()?;
            nonintegral += usize::from(!mu.is_integer());
            if let Verdict::Fail(d) | Verdict::Skip(d) = degree_bounds_verdict(&named.graph)? {
                return Ok(Verdict::Fail(format!("{}: {d}", named.name)));
            }
        }
        Ok(Verdict::Pass(format!("{} graphs, {nonintegral} with nonintegral mu", cores.len())))
    });

    r.run("suite.root_path_exact".into(), || {
        let hosts = [
            ("petersen", fixed(GraphSpec::Petersen)),
            ("k4", fixed(GraphSpec::Complete(4))),
            ("core(gnm:100:180)", corpus::gnm_core(100, 180, config.seed)),
        ];
        let mut cases = 0;
        for (name, g) in &hosts {
            let arcs = ArcSystem::new(g)?;
            let pair = arcs.perron_default()?;
            let tree = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 12, DEFAULT_NODE_CAP)?;
            for p in root_path_grid(pair.lambda_star) {
                for n in [4, 8, 12] {
                    let exact = exact_root_path_prob(&tree, p, n)?;
                    let bound = p - 1.0 / pair.lambda_star;
                    if exact < bound - 1e-12 {
                        return Ok(Verdict::Fail(format!("{name} p={p} n={n}: {exact} < {bound}")));
                    }
                    let mc = estimate_root_path_prob(&tree, p, n, config.trials, config.seed)?;
                    if !mc.agrees_with(exact, 3.0) {
                        return Ok(Verdict::Fail(format!("{name} p={p} n={n}: mc={} exact={exact}", mc.estimate)));
                    }
                    cases += 1;
                }
            }
        }
        Ok(Verdict::Pass(format!("{cases} cases")))
    });

    r.run("suite.q_moments".into(), || {
        let g = fixed(GraphSpec::Petersen);
        let arcs = ArcSystem::new(&g)?;
        let pair = arcs.perron_default()?;
        let tree = TruncatedCoveringTree::build(&arcs, pair.select_root_arc(), 8, DEFAULT_NODE_CAP)?;
        let flow = UnitFlow::new(&tree, &pair);
        let a = second_moment_audit(&tree, &flow, 0.7, 8, config.trials, config.seed)?;
        Ok(verdict(
            a.mean_ok() && a.second_moment_ok(),
            format!(
                "mean Q={}±{} mean Q^2={}±{} bound={:?}",
                a.mean_q.mean, a.mean_q.std_error, a.mean_q2.mean, a.mean_q2.std_error, a.bound
            ),
        ))
    });

    r.run("suite.cycle_lower_bound".into(), || {
        let petersen = theorem4_bound_check(&fixed(GraphSpec::Petersen), 0.1, config.trials, config.seed)?;
        if !petersen.passed() {
            return Ok(Verdict::Fail(format!("petersen: f={}", petersen.f_hat.estimate)));
        }
        let cores = corpus::two_core_corpus(10, config.seed);
        for named in &cores {
            let c = theorem4_bound_check(&named.graph, 0.05, config.trials, config.seed)?;
            if !c.passed() {
                return Ok(Verdict::Fail(format!("{}: f={} bound={}", named.name, c.f_hat.estimate, c.bound)));
            }
        }
        Ok(Verdict::Pass(format!("petersen f={} and {} cores", petersen.f_hat.estimate, cores.len())))
    });

    r.run("suite.oracle_equivalence".into(), || {
        let mut cases = 0;
        for named in corpus::small() {
            let poly = exact_cyclicity_poly(&named.graph)?;
            for (i, p) in [0.2, 0.5, 0.8].into_iter().enumerate() {
                let est = mc_cycle_prob(&named.graph, p, config.trials, substream_seed(config.seed, i as u64))?;
                if !est.agrees_with(poly.eval(p), 3.0) {
                    return Ok(Verdict::Fail(format!("{} p={p}", named.name)));
                }
                cases += 1;
            }
        }
        Ok(Verdict::Pass(format!("{cases} cases")))
    });

    r.run("suite.delta_girth".into(), || {
        let mut cases = 0;
        for named in corpus::small().into_iter().filter(|g| g.graph.edge_count() <= 12) {
            let delta = exact_delta(&named.graph)?;
            if girth(&named.graph) != Girth::Finite(delta) {
                return Ok(Verdict::Fail(format!("{}: delta={delta}", named.name)));
            }
            cases += 1;
        }
        Ok(Verdict::Pass(format!("{cases} graphs")))
    });

    r.run("suite.width_trend".into(), || {
        let widths: Vec<f64> = [3, 6, 12, 24]
            .iter()
            .map(|&n| 0.9f64.powf(1.0 / n as f64) - 0.1f64.powf(1.0 / n as f64))
            .collect();
        if !widths.windows(2).all(|w| w[1] < w[0]) {
            return Ok(Verdict::Fail(format!("closed-form widths {widths:?}")));
        }
        let g = generate(&GraphSpec::RandomRegular { n: 500, d: 3 }, config.seed)?;
        let curve = threshold_sweep(&g, &Grid::default(), 10_000, config.seed, true)?;
        let w = transition_width(&curve, 0.1)?;
        Ok(verdict(w <= 0.35, format!("cycles {widths:?}; 3-regular n=500 width={w}")))
    });

    r.run("suite.threshold_trend".into(), || {
        let core = corpus::gnm_core(3000, 4500, config.seed);
        let mu = crate::spectral::ratio_to_f64(core.average_degree()?);
        let centre = 1.0 / (mu - 1.0);
        let (lo, hi) = ((centre - 0.15).max(0.0), (centre + 0.15).min(1.0));
        let f_lo = mc_cycle_prob(&core, lo, 10_000, config.seed)?;
        let f_hi = mc_cycle_prob(&core, hi, 10_000, config.seed)?;
        let slack = 3.0 * (f_lo.half_width() + f_hi.half_width());
        Ok(verdict(
            f_hi.estimate - f_lo.estimate + slack >= 0.5,
            format!("mu={mu} f({lo})={} f({hi})={}", f_lo.estimate, f_hi.estimate),
        ))
    });

    r.run("suite.coupled_monotone".into(), || {
        let g = giant_two_core(&generate(&GraphSpec::Gnm { n: 200, m: 300 }, config.seed)?).graph;
        let curve = threshold_sweep(&g, &Grid::default(), 2_000, config.seed, true)?;
        let values = curve.values();
        let monotone = values.windows(2).all(|w| w[0].1 <= w[1].1);
        let ends = values.first().map(|v| v.1) == Some(0.0) && values.last().map(|v| v.1) == Some(1.0);
        Ok(verdict(monotone && ends, format!("{} points", values.len())))
    });
}
