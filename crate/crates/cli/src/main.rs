mod assemble;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opinion_lab::dynamics::{AdversaryMode, Rule};
use opinion_lab::harness::GraphKind;

#[derive(Parser, Debug)]
#[command(name = "opinion-lab", version, about = "Biased voter and 2-choices consensus on regular graphs")]
struct Cli {
    /// Extra diagnostics on stderr (repeat for more)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph, write its edge list and a spectral report
    Graph(GraphCmd),
    /// Run a batch of independent trials
    Simulate(SimulateCmd),
    /// Run one batch per initial fraction on a single graph
    Sweep(SweepCmd),
    /// Run a fresh graph and batch per size
    Scaling(ScalingCmd),
    /// Check one-step drift against its exact value and lower bounds
    DriftCheck(DriftCmd),
    /// Exact absorption probabilities and times for small graphs
    Oracle(OracleCmd),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }
    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Directory for output files (created if missing)
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Worker threads for trials (default: all cores)
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GraphArgs {
    /// random-regular, complete, cycle, petersen or file
    #[arg(long = "kind")]
    pub kind: Option<GraphKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Generator seed (default: derived from --seed)
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// Edge-list file (implies --kind file)
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BiasArgs {
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub q1: Option<f64>,
}

/// Config file plus flat overrides; flags win over file values.
#[derive(Args, Debug, Clone, Default)]
pub struct ExperimentArgs {
    /// JSON config, or any JSON output of this tool
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed of every random stream
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub rule: Option<Rule>,
    #[command(flatten)]
    pub bias: BiasArgs,
    /// Initial number of opinion-1 agents
    #[arg(long, conflicts_with_all = ["fraction", "clog"])]
    pub a0: Option<usize>,
    /// Initial share of opinion-1 agents, rounded
    #[arg(long, conflicts_with = "clog")]
    pub fraction: Option<f64>,
    /// Initial count ceil(k ln n)
    #[arg(long)]
    pub clog: Option<f64>,
    /// uniform or prefix
    #[arg(long)]
    pub placement: Option<String>,
    #[arg(long)]
    pub adversary: Option<AdversaryMode>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Record A_t per trial
    #[arg(long)]
    pub trajectory: bool,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Spectral margin c of the 2-choices prediction
    #[arg(long)]
    pub c: Option<f64>,
    /// Phase constant gamma of the 2-choices prediction
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GraphCmd {
    #[arg(long = "kind", default_value = "random-regular")]
    pub kind: GraphKind,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Generator seed (required for random-regular)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Edge-list file to analyse (implies --kind file)
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
    /// Power-iteration cap (default: max(1000, 10 n ln n), retried once at 100x)
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SimulateCmd {
    #[command(flatten)]
    pub exp: ExperimentArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepCmd {
    #[command(flatten)]
    pub exp: ExperimentArgs,
    /// Comma-separated initial fractions
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ScalingCmd {
    #[command(flatten)]
    pub exp: ExperimentArgs,
    /// Comma-separated graph sizes
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DriftCmd {
    /// JSON drift-check config, or a drift-check JSON output
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub bias: BiasArgs,
    /// Comma-separated rules (default: both)
    #[arg(long, value_delimiter = ',')]
    pub rules: Option<Vec<Rule>>,
    /// Number of random test states
    #[arg(long)]
    pub states: Option<usize>,
    /// Replayed rounds per state
    #[arg(long)]
    pub replays: Option<usize>,
    /// Allowed |z| of an empirical mean
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Spectral margin of the refined 2-choices bound
    #[arg(long)]
    pub c: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct OracleCmd {
    /// Shorthand such as complete4, cycle7 or petersen
    #[arg(long)]
    pub graph: Option<String>,
    #[command(flatten)]
    pub graph_args: GraphArgs,
    #[arg(long)]
    pub rule: Option<Rule>,
    #[command(flatten)]
    pub bias: BiasArgs,
    /// Also simulate every start count and report z-scores
    #[arg(long)]
    pub compare_mc: bool,
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    /// Seed for --compare-mc and random graphs
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Graph(c) => commands::graph(c, cli.verbose),
        Command::Simulate(c) => commands::simulate(c, cli.verbose),
        Command::Sweep(c) => commands::sweep(c, cli.verbose),
        Command::Scaling(c) => commands::scaling(c, cli.verbose),
        Command::DriftCheck(c) => commands::drift_check(c, cli.verbose),
        Command::Oracle(c) => commands::oracle(c, cli.verbose),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
