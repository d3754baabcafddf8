//! Serializable summaries and the CSV layouts written by the command line.
//!
//! Everything here is a pure function of its inputs: no timings, no
//! thread-dependent ordering, and floats printed with Rust's shortest
//! round-trip formatting, so reruns produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{giant_two_core, girth, peel_to_two_core, Girth, Graph};
use crate::mc::McEstimate;
use crate::oracle::{exact_cyclicity_poly_with, exact_delta_with};
use crate::percolation::ThresholdCurve;
use crate::spectral::{degree_lower_bounds, ratio_to_f64, ArcSystem};
use crate::tree::{
    estimate_root_path_prob, exact_root_path_prob, second_moment_audit, SecondMomentAudit, TruncatedCoveringTree,
    UnitFlow,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub lambda_star: f64,
    pub predicted_threshold_inv_lambda: f64,
    pub perron_residual: f64,
    pub perron_iterations: usize,
    pub root_arc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoCoreSummary {
    pub vertices: usize,
    pub edges: usize,
    /// Report on the largest component of the 2-core; absent when the core
    /// is empty.
    pub report: Option<Box<AnalysisReport>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub m: usize,
    /// Exact, as `numer/denom` or an integer.
    pub average_degree: Option<String>,
    pub average_degree_value: Option<f64>,
    pub min_degree: Option<usize>,
    pub max_degree: Option<usize>,
    pub girth: Girth,
    pub connected: bool,
    pub bound_mu_minus_1: Option<f64>,
    pub bound_refined: Option<f64>,
    pub predicted_threshold_inv_mu_minus_1: Option<f64>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_omitted: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_core: Option<TwoCoreSummary>,
}

impl AnalysisReport {
    pub fn lambda_star(&self) -> Option<f64> {
        self.spectral.as_ref().map(|s| s.lambda_star)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn analyze(g: &Graph) -> AnalysisReport {
    analyze_inner(g, true)
}

fn analyze_inner(g: &Graph, descend: bool) -> AnalysisReport {
    let mu = g.average_degree().ok();
    let bounds = degree_lower_bounds(g).ok();
    let mut report = AnalysisReport {
        n: g.vertex_count(),
        m: g.edge_count(),
        average_degree: mu.map(|r| r.to_string()),
        average_degree_value: mu.map(ratio_to_f64),
        min_degree: g.min_degree(),
        max_degree: g.max_degree(),
        girth: girth(g),
        connected: g.is_connected(),
        bound_mu_minus_1: bounds.map(|b| b.mu_minus_1),
        bound_refined: bounds.map(|b| b.refined),
        predicted_threshold_inv_mu_minus_1: bounds.filter(|b| b.mu_minus_1 > 0.0).map(|b| 1.0 / b.mu_minus_1),
        spectral: None,
        spectral_omitted: None,
        two_core: None,
    };
    match ArcSystem::new(g).and_then(|a| a.perron_default()) {
        Ok(pair) => {
            report.spectral = Some(SpectralSummary {
                lambda_star: pair.lambda_star,
                predicted_threshold_inv_lambda: 1.0 / pair.lambda_star,
                perron_residual: pair.residual,
                perron_iterations: pair.iterations_used,
                root_arc: pair.select_root_arc(),
            });
        }
        Err(e) => {
            report.spectral_omitted = Some(e.to_string());
            if descend {
                let core = peel_to_two_core(g);
                let giant = giant_two_core(g);
                report.two_core = Some(TwoCoreSummary {
                    vertices: core.graph.vertex_count(),
                    edges: core.graph.edge_count(),
                    report: (giant.graph.vertex_count() > 0).then(|| Box::new(analyze_inner(&giant.graph, false))),
                });
            }
        }
    }
    report
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// `#`-prefixed preamble shared by the CSV outputs.
fn preamble(out: &mut String, report: &AnalysisReport) {
    let _ = writeln!(out, "# n={} m={}", report.n, report.m);
    let _ = writeln!(
        out,
        "# average_degree={} girth={}",
        report.average_degree.as_deref().unwrap_or("NA"),
        report.girth
    );
    let _ = writeln!(
        out,
        "# lambda_star={} inv_lambda_star={} inv_mu_minus_1={}",
        opt(report.lambda_star()),
        opt(report.spectral.as_ref().map(|s| s.predicted_threshold_inv_lambda)),
        opt(report.predicted_threshold_inv_mu_minus_1)
    );
    let _ = writeln!(
        out,
        "# bound_mu_minus_1={} bound_refined={}",
        opt(report.bound_mu_minus_1),
        opt(report.bound_refined)
    );
    let json = serde_json::to_string(report).expect("report serializes");
    let _ = writeln!(out, "# report={json}");
}

pub const SWEEP_HEADER: &str = "p,estimate,ci_low,ci_high,trials,seed,coupled";

pub fn sweep_csv(curve: &ThresholdCurve, report: &AnalysisReport) -> String {
    let mut out = String::new();
    preamble(&mut out, report);
    let spacing = curve
        .points
        .windows(2)
        .map(|w| w[1].p - w[0].p)
        .fold(0.0, f64::max);
    let _ = writeln!(out, "# max_grid_spacing={spacing}");
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for pt in &curve.points {
        let e = &pt.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            pt.p,
            e.estimate,
            e.ci_low,
            e.ci_high,
            e.trials,
            e.master_seed,
            u8::from(curve.coupled)
        );
    }
    out
}

/// One `(p, n)` cell of a covering-tree experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeRow {
    pub p: f64,
    pub n: usize,
    pub lambda: f64,
    pub bound_p_minus_inv_lambda: f64,
    pub exact_prob: f64,
    pub mc: McEstimate,
    pub audit: SecondMomentAudit,
}

impl TreeRow {
    pub fn bound_holds(&self) -> bool {
        self.exact_prob >= self.bound_p_minus_inv_lambda - 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeExperiment {
    pub root_arc: usize,
    pub lambda: f64,
    pub node_count: usize,
    pub rows: Vec<TreeRow>,
}

/// Builds one tree at the largest requested depth and evaluates every
/// `(p, n)` pair on it, all under the same master seed.
pub fn tree_experiment(
    g: &Graph,
    depths: &[usize],
    ps: &[f64],
    trials: u64,
    master_seed: u64,
    node_cap: usize,
) -> Result<TreeExperiment> {
    let depth = *depths
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("no depths requested".into()))?;
    if depths.contains(&0) {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let arcs = ArcSystem::new(g)?;
    let perron = arcs.perron_default()?;
    let root = perron.select_root_arc();
    let tree = TruncatedCoveringTree::build(&arcs, root, depth, node_cap)?;
    let flow = UnitFlow::new(&tree, &perron);
    let lambda = perron.lambda_star;
    let mut rows = Vec::with_capacity(depths.len() * ps.len());
    for &p in ps {
        for &n in depths {
            rows.push(TreeRow {
                p,
                n,
                lambda,
                bound_p_minus_inv_lambda: p - 1.0 / lambda,
                exact_prob: exact_root_path_prob(&tree, p, n)?,
                mc: estimate_root_path_prob(&tree, p, n, trials, master_seed)?,
                audit: second_moment_audit(&tree, &flow, p, n, trials, master_seed)?,
            });
        }
    }
    Ok(TreeExperiment {
        root_arc: root,
        lambda,
        node_count: tree.node_count(),
        rows,
    })
}

pub const TREE_HEADER: &str = "p,n,lambda,bound_p_minus_inv_lambda,exact_prob,mc_estimate,ci_low,ci_high,trials,seed,\
mean_q,se_q,mean_q2,se_q2,q2_bound,q_positive_fraction,q_audit_pass";

pub fn tree_csv(experiment: &TreeExperiment, report: &AnalysisReport) -> String {
    let mut out = String::new();
    preamble(&mut out, report);
    let _ = writeln!(
        out,
        "# root_arc={} tree_nodes={}",
        experiment.root_arc, experiment.node_count
    );
    out.push_str(TREE_HEADER);
    out.push('\n');
    for r in &experiment.rows {
        let a = &r.audit;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.p,
            r.n,
            r.lambda,
            r.bound_p_minus_inv_lambda,
            r.exact_prob,
            r.mc.estimate,
            r.mc.ci_low,
            r.mc.ci_high,
            r.mc.trials,
            r.mc.master_seed,
            a.mean_q.mean,
            a.mean_q.std_error,
            a.mean_q2.mean,
            a.mean_q2.std_error,
            opt(a.bound),
            a.positive_fraction,
            u8::from(a.passed())
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub m: usize,
    pub counts: Vec<u64>,
    /// Absent for forests and above the enumeration guard.
    pub delta: Option<usize>,
    pub girth: Girth,
}

/// `force` lifts both enumeration guards.
pub fn oracle_report(g: &Graph, force: bool) -> Result<OracleReport> {
    let poly = exact_cyclicity_poly_with(g, force)?;
    let delta = match exact_delta_with(g, force) {
        Ok(d) => Some(d),
        Err(Error::Acyclic | Error::GuardExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(OracleReport {
        m: poly.m,
        counts: poly.counts,
        delta,
        girth: girth(g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphSpec};
    use crate::percolation::{threshold_sweep, Grid};

    fn gen(spec: GraphSpec) -> Graph {
        generate(&spec, 0).unwrap()
    }

    #[test]
    fn petersen_report() {
        let r = analyze(&gen(GraphSpec::Petersen));
        assert!((r.lambda_star().unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(r.girth, Girth::Finite(5));
        assert_eq!(r.average_degree.as_deref(), Some("3"));
        assert!((r.predicted_threshold_inv_mu_minus_1.unwrap() - 0.5).abs() < 1e-15);
        let s = r.spectral.as_ref().unwrap();
        assert!((s.predicted_threshold_inv_lambda - 0.5).abs() < 1e-9);
        assert!(r.spectral_omitted.is_none() && r.two_core.is_none());
    }

    #[test]
    fn cycle_report() {
        let r = analyze(&gen(GraphSpec::Cycle(8)));
        assert!((r.lambda_star().unwrap() - 1.0).abs() < 1e-12);
        assert!((r.spectral.unwrap().predicted_threshold_inv_lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_report_omits_spectral() {
        let r = analyze(&gen(GraphSpec::Path(5)));
        assert!(r.spectral.is_none());
        assert!(r.spectral_omitted.unwrap().contains("degree"));
        let core = r.two_core.unwrap();
        assert_eq!((core.vertices, core.edges), (0, 0));
        assert!(core.report.is_none());
        let json = serde_json::to_value(analyze(&gen(GraphSpec::Path(5)))).unwrap();
        assert!(json.get("lambda_star").is_none());
        assert_eq!(json["girth"], serde_json::Value::Null);
    }

    #[test]
    fn pendant_graph_reports_core() {
        let g = Graph::new(5, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]).unwrap();
        let r = analyze(&g);
        let core = r.two_core.unwrap();
        assert_eq!((core.vertices, core.edges), (3, 3));
        assert!((core.report.unwrap().lambda_star().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_csv_layout() {
        let g = gen(GraphSpec::Cycle(6));
        let grid: Grid = "0:1:0.5".parse().unwrap();
        let curve = threshold_sweep(&g, &grid, 100, 1, true).unwrap();
        let csv = sweep_csv(&curve, &analyze(&g));
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,0,0,0,100,1,1");
        assert_eq!(lines[3], "1,1,1,1,100,1,1");
        assert!(csv.starts_with("# n=6 m=6\n"));
    }

    #[test]
    fn tree_rows() {
        let g = gen(GraphSpec::Petersen);
        let exp = tree_experiment(&g, &[8], &[0.7, 1.0], 2000, 3, 1 << 20).unwrap();
        assert_eq!(exp.rows.len(), 2);
        let r = &exp.rows[0];
        assert!((r.bound_p_minus_inv_lambda - 0.2).abs() < 1e-9);
        assert!(r.bound_holds());
        assert_eq!(exp.rows[1].exact_prob, 1.0);
        let c6 = tree_experiment(&gen(GraphSpec::Cycle(6)), &[4], &[0.5], 100, 3, 1000).unwrap();
        assert!((c6.rows[0].exact_prob - 0.0625).abs() < 1e-15);
        let csv = tree_csv(&exp, &analyze(&g));
        let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], TREE_HEADER);
        assert_eq!(body[1].split(',').count(), TREE_HEADER.split(',').count());
        assert!(matches!(
            tree_experiment(&g, &[30], &[0.7], 10, 0, 1000),
            Err(Error::NodeCap { .. })
        ));
    }

    #[test]
    fn oracle_json_fields() {
        let r = oracle_report(&gen(GraphSpec::Complete(4)), false).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"m":6,"counts":[0,0,0,4,15,6,1],"delta":3,"girth":3}"#);
        let forest = oracle_report(&gen(GraphSpec::Path(4)), false).unwrap();
        assert_eq!(forest.delta, None);
        assert_eq!(forest.girth, Girth::Infinite);
    }
}
