use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use h2_consensus::cli::{
    self, CliError, CliResult, DesignProblem, ModeSelection, Outcome, SimulateOptions,
};
use h2_consensus::design::{P1Config, P2Config};
use h2_consensus::graph::Edge;
use h2_consensus::sim::{Integrator, SimConfig};
use h2_consensus::verify::RandomSuite;

#[derive(Parser)]
#[command(
    name = "h2net",
    version = concat!(env!("CARGO_PKG_VERSION"), " (report format 1)"),
    about = "H2 analysis and time-scale design for multi-time-scale consensus networks"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sigma,
    SigmaHat,
}

impl From<Mode> for ModeSelection {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sigma => ModeSelection::Sigma,
            Mode::SigmaHat => ModeSelection::SigmaHat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    P1,
    P2,
}

#[derive(Subcommand)]
enum Command {
    /// H2 norms, separated terms, cycle contributions and K ratio.
    Analyze {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "sigma")]
        mode: Mode,
        /// Spanning tree override, e.g. "1-2,2-3".
        #[arg(long)]
        tree: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalue brackets on the squared H2 norm.
    Bounds {
        spec: PathBuf,
        #[arg(long)]
        tree: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-scale design (p1: budgeted, p2: regularized).
    Design {
        spec: PathBuf,
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        eps_min: f64,
        #[arg(long)]
        eps_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the squared H2 norm.
    Simulate {
        spec: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 200.0)]
        horizon: f64,
        #[arg(long, default_value_t = 20.0)]
        burn_in: f64,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "sigma")]
        mode: Mode,
        /// Use the exact (matrix exponential) discretization.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        node_level: bool,
        #[arg(long)]
        dump_csv: Option<PathBuf>,
        /// Trajectory sampling stride in steps (with --dump-csv).
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant battery on a spec file or a seeded random suite.
    Verify {
        spec: Option<PathBuf>,
        /// Random suite: node count, graph count, seed.
        #[arg(long, num_args = 3, value_names = ["N", "COUNT", "SEED"])]
        random: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0.15)]
        edge_prob: f64,
        /// Random trees instead of random graphs.
        #[arg(long)]
        trees: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_tree(text: &str) -> CliResult<Vec<Edge>> {
    text.split(',')
        .map(|pair| {
            let (a, b) = pair
                .trim()
                .split_once('-')
                .ok_or_else(|| CliError::validation(format!("bad tree edge '{pair}'")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::validation(format!("bad node id '{s}'")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

fn emit(outcome: &Outcome, out: Option<&PathBuf>) -> CliResult<()> {
    let text = outcome.to_json();
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::validation(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn run(args: Args) -> CliResult<i32> {
    match args.command {
        Command::Analyze { spec, mode, tree, out } => {
            let spec = cli::load_spec(&spec)?;
            let tree = tree.as_deref().map(parse_tree).transpose()?;
            let outcome = cli::cmd_analyze(&spec, mode.into(), tree.as_deref())?;
            emit(&outcome, out.as_ref())?;
            Ok(outcome.exit_code)
        }
        Command::Bounds { spec, tree, out } => {
            let spec = cli::load_spec(&spec)?;
            let tree = tree.as_deref().map(parse_tree).transpose()?;
            let outcome = cli::cmd_bounds(&spec, tree.as_deref())?;
            emit(&outcome, out.as_ref())?;
            Ok(outcome.exit_code)
        }
        Command::Design { spec, problem, mu, h, r, eps_min, eps_max, out } => {
            let spec = cli::load_spec(&spec)?;
            let missing = |name: &str| CliError::validation(format!("--{name} is required for this problem"));
            let problem = match problem {
                Problem::P1 => DesignProblem::P1(P1Config {
                    eps_min,
                    eps_max,
                    mu: mu.ok_or_else(|| missing("mu"))?,
                }),
                Problem::P2 => DesignProblem::P2(P2Config {
                    h: h.ok_or_else(|| missing("h"))?,
                    r: r.unwrap_or(1.0),
                    eps_min,
                    eps_max,
                }),
            };
            let outcome = cli::cmd_design(&spec, problem)?;
            emit(&outcome, out.as_ref())?;
            Ok(outcome.exit_code)
        }
        Command::Simulate {
            spec,
            dt,
            horizon,
            burn_in,
            trials,
            seed,
            mode,
            exact,
            node_level,
            dump_csv,
            stride,
            out,
        } => {
            let spec = cli::load_spec(&spec)?;
            let opts = SimulateOptions {
                config: SimConfig {
                    dt,
                    horizon,
                    burn_in,
                    trials,
                    seed,
                    integrator: if exact { Integrator::Exact } else { Integrator::EulerMaruyama },
                    trajectory_stride: stride,
                },
                node_level,
                mode: mode.into(),
                dump_csv,
            };
            let outcome = cli::cmd_simulate(&spec, &opts)?;
            emit(&outcome, out.as_ref())?;
            Ok(outcome.exit_code)
        }
        Command::Verify { spec, random, edge_prob, trees, out } => {
            let outcome = match (spec, random) {
                (Some(path), None) => cli::cmd_verify_spec(&cli::load_spec(&path)?)?,
                (None, Some(v)) => cli::cmd_verify_random(&RandomSuite {
                    nodes: v[0] as usize,
                    count: v[1] as usize,
                    seed: v[2],
                    edge_probability: edge_prob,
                    trees_only: trees,
                })?,
                (None, None) => cli::cmd_verify_random(&RandomSuite {
                    edge_probability: edge_prob,
                    trees_only: trees,
                    ..RandomSuite::default()
                })?,
                (Some(_), Some(_)) => {
                    return Err(CliError::validation("give either a spec file or --random, not both"))
                }
            };
            for line in cli::verify_lines(&outcome) {
                eprintln!("{line}");
            }
            emit(&outcome, out.as_ref())?;
            Ok(outcome.exit_code)
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
