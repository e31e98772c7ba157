mod commands;
mod report;
mod socket;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "subgraph", version, about = "Sub-graph centric graph analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition an edge list and write it to a slice store.
    Ingest(IngestArgs),
    /// Run an algorithm over a store and print a JSON run report.
    Run(RunArgs),
    /// Compute reference results on a single machine.
    Oracle(OracleArgs),
    /// Dump store metadata.
    Inspect(InspectArgs),
    /// Write a random edge list.
    Generate(GenerateArgs),
    /// Socket worker process started by `run --transport socket`.
    #[command(hide = true)]
    Worker(WorkerArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Edge list: `src dst [weight]` per line, `#` comments.
    pub edges: PathBuf,
    /// Store directory to create.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long = "partitions", short = 'k', default_value_t = 1)]
    pub k: usize,
    /// `hash`, `balanced`, `balanced:<slack>` or `file:<path>`.
    #[arg(long, default_value = "balanced")]
    pub strategy: String,
    #[arg(long)]
    pub directed: bool,
    /// Tab-separated vertex attribute table.
    #[arg(long)]
    pub vertex_attrs: Option<PathBuf>,
    /// Graph name; defaults to the edge file stem.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Subgraph,
    VertexEmulation,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Subgraph => "subgraph",
            Mode::VertexEmulation => "vertex-emulation",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transport {
    Memory,
    Socket,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    Deterministic,
    Arrival,
}

/// Algorithm parameters shared by `run` and `oracle`.
#[derive(Args, Clone)]
pub struct AlgoArgs {
    /// max-vertex, connected-components, sssp, pagerank or blockrank.
    #[arg(long, short)]
    pub algorithm: String,
    #[arg(long)]
    pub source: Option<u64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub weighted: bool,
    /// BlockRank convergence threshold.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Run PageRank until no rank moves by this much.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Let dangling rank mass leak instead of redistributing it.
    #[arg(long)]
    pub no_redistribute: bool,
    /// SSSP: send each remote relaxation only once its distance is final.
    #[arg(long)]
    pub frontier_gated: bool,
}

#[derive(Args)]
pub struct RunArgs {
    /// Store directory written by `ingest`.
    pub store: PathBuf,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[arg(long, value_enum, default_value_t = Mode::Subgraph)]
    pub mode: Mode,
    #[arg(long, value_enum)]
    pub transport: Option<Transport>,
    /// Engine configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Repeat the run and report mean, min and max times.
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Recorded in the report; the engine itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub order: Option<Order>,
    /// Compute threads per worker.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Print a table instead of the JSON report.
    #[arg(long)]
    pub summary: bool,
    /// Write `vertex<TAB>value` lines here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args)]
pub struct OracleArgs {
    /// Store directory or edge-list file.
    pub input: PathBuf,
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Treat an edge-list input as directed.
    #[arg(long)]
    pub directed: bool,
    /// Print only the digest of the result lines.
    #[arg(long)]
    pub digest: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct InspectArgs {
    pub store: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphModel {
    ErdosRenyi,
    PreferentialAttachment,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, short)]
    pub vertices: usize,
    #[arg(long, value_enum, default_value_t = GraphModel::ErdosRenyi)]
    pub model: GraphModel,
    /// Edge count (Erdős–Rényi) or edges per new vertex (preferential attachment).
    #[arg(long, short)]
    pub edges: usize,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub weighted: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct WorkerArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub partition: u32,
    /// Engine configuration JSON.
    #[arg(long)]
    pub engine: PathBuf,
    /// Algorithm configuration JSON.
    #[arg(long)]
    pub algorithm: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Where to write the worker outcome JSON.
    #[arg(long)]
    pub result: PathBuf,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GOFFISH_LOG", "warn")).init();
    match Cli::parse().command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Run(a) => commands::run(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Inspect(a) => commands::inspect(&a),
        Command::Generate(a) => commands::generate(&a),
        Command::Worker(a) => socket::worker(&a),
    }
}
