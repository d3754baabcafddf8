use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nbperc_core::corpus::{self, NamedGraph};
use nbperc_core::graph::{generate, giant_two_core, load_edge_list};
use nbperc_core::percolation::{threshold_sweep, Grid, DEFAULT_TRIALS};
use nbperc_core::report::{analyze, oracle_report, sweep_csv, tree_csv, tree_experiment};
use nbperc_core::tree::DEFAULT_NODE_CAP;
use nbperc_core::verify::{self, Status, VerifyConfig};
use nbperc_core::{Error, Graph, GraphSpec};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "nbperc", version, about = "Non-backtracking spectra and cycle percolation thresholds")]
struct Cli {
    /// Worker threads for Monte Carlo and enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural and spectral summary of a graph, as JSON.
    Analyze {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cycle probability over a grid of p, as CSV.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// `lo:hi:step`, both ends included (default: 101 points on [0, 1]).
        #[arg(long)]
        grid: Option<Grid>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Independent samples per grid point instead of one coupled sample
        /// per trial.
        #[arg(long)]
        independent: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Percolation on the covering tree rooted at the heaviest arc, as CSV.
    Tree {
        #[command(flatten)]
        source: Source,
        /// Depths n, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "8")]
        depth: Vec<usize>,
        /// Edge probabilities, comma separated.
        #[arg(long = "p", value_delimiter = ',', required = true)]
        ps: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        node_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the self-check suite; JSON summary on stdout, one line per check
    /// on stderr.
    Verify {
        /// Extra corpus entries: generator specs or edge-list paths. Replaces
        /// the default small corpus unless `default` is listed too.
        #[arg(long, value_delimiter = ',')]
        corpus: Vec<String>,
        #[arg(long, env = "NBPERC_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Only the per-graph checks.
        #[arg(long)]
        per_graph_only: bool,
        /// Override the regular-graph eigenvalue tolerance (negative values
        /// exercise the failure path).
        #[arg(long, hide = true, allow_negative_numbers = true)]
        tamper_lambda_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated graph as an edge list.
    Gen {
        spec: GraphSpec,
        #[arg(long, env = "NBPERC_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact cyclicity counts and Δ by enumeration, as JSON.
    Oracle {
        #[command(flatten)]
        source: Source,
        /// Enumerate past the default edge guards.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Origin {
    /// Edge-list file (`-` for stdin).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator spec such as `petersen`, `cycle:6`, `random_regular:500:3`.
    #[arg(long)]
    gen: Option<GraphSpec>,
}

#[derive(Args)]
struct Source {
    #[command(flatten)]
    origin: Origin,
    #[arg(long, env = "NBPERC_SEED", default_value_t = 1)]
    seed: u64,
    /// Replace the graph by the largest component of its 2-core.
    #[arg(long)]
    core: bool,
}

impl Source {
    fn load(&self) -> Result<Graph, CliError> {
        let g = match (&self.origin.input, &self.origin.gen) {
            (Some(path), _) => load_edge_list(&read_input(path)?)?,
            (None, Some(spec)) => generate(spec, self.seed)?,
            (None, None) => unreachable!("clap requires one source"),
        };
        Ok(if self.core { giant_two_core(&g).graph } else { g })
    }
}

enum CliError {
    Core(Error),
    Io(String),
    ChecksFailed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn corpus_entry(item: &str, seed: u64) -> Result<Vec<NamedGraph>, CliError> {
    if item == "default" {
        return Ok(corpus::small());
    }
    let graph = match item.parse::<GraphSpec>() {
        Ok(spec) => generate(&spec, seed)?,
        Err(_) => load_edge_list(&read_input(&PathBuf::from(item))?)?,
    };
    Ok(vec![NamedGraph {
        name: item.to_string(),
        graph,
    }])
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { source, out } => {
            let report = analyze(&source.load()?);
            emit(&out, &(report.to_json() + "\n"))
        }
        Command::Sweep {
            source,
            grid,
            trials,
            independent,
            out,
        } => {
            let g = source.load()?;
            let grid = grid.unwrap_or_default();
            let curve = threshold_sweep(&g, &grid, trials, source.seed, !independent)?;
            emit(&out, &sweep_csv(&curve, &analyze(&g)))
        }
        Command::Tree {
            source,
            depth,
            ps,
            trials,
            node_cap,
            out,
        } => {
            let g = source.load()?;
            let experiment = tree_experiment(&g, &depth, &ps, trials, source.seed, node_cap)?;
            emit(&out, &tree_csv(&experiment, &analyze(&g)))
        }
        Command::Verify {
            corpus,
            seed,
            trials,
            per_graph_only,
            tamper_lambda_tol,
            out,
        } => {
            let mut config = VerifyConfig {
                seed,
                trials,
                suite: !per_graph_only,
                ..VerifyConfig::default()
            };
            if !corpus.is_empty() {
                config.corpus = corpus
                    .iter()
                    .map(|item| corpus_entry(item, seed))
                    .collect::<Result<Vec<_>, _>>()?
                    .concat();
            }
            if let Some(tol) = tamper_lambda_tol {
                config.lambda_tolerance = tol;
            }
            let summary = verify::run(&config, &mut |c, elapsed| {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skip => "SKIP",
                };
                eprintln!("{tag} {} ({:.2}s) {}", c.id, elapsed.as_secs_f64(), c.detail);
            });
            eprintln!(
                "{} passed, {} failed, {} skipped",
                summary.passed, summary.failed, summary.skipped
            );
            let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
            emit(&out, &(json + "\n"))?;
            if summary.all_passed() {
                Ok(())
            } else {
                Err(CliError::ChecksFailed)
            }
        }
        Command::Gen { spec, seed, out } => emit(&out, &generate(&spec, seed)?.to_edge_list()),
        Command::Oracle { source, force, out } => {
            let report = oracle_report(&source.load()?, force)?;
            let json = serde_json::to_string(&report).expect("oracle report serializes");
            emit(&out, &(json + "\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::ChecksFailed) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::NodeCap { .. } | Error::GuardExceeded { .. } => EXIT_RESOURCE,
                Error::NoConvergence { .. } | Error::Overflow { .. } => EXIT_CHECK_FAILED,
                _ => EXIT_USAGE,
            };
            ExitCode::from(code)
        }
    }
}
