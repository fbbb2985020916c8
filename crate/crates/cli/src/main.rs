use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(
    name = "synchroflow",
    version,
    about = "Synchronized material-flow ledgers for robotic cells"
)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Aggregator config for serve/export/replay, scenario file for simulate.
    #[arg(long, global = true, env = "SYNCHROFLOW_CONFIG")]
    config: Option<PathBuf>,
    /// Network RNG seed (simulate).
    #[arg(long, global = true, env = "SYNCHROFLOW_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true, env = "SYNCHROFLOW_WINDOW_MS", value_parser = clap::value_parser!(u64).range(1..))]
    window_ms: Option<u64>,
    #[arg(long, global = true, env = "SYNCHROFLOW_SKEW_MS")]
    skew_ms: Option<u64>,
    /// NDJSON ingest address, host:port.
    #[arg(long, global = true, env = "SYNCHROFLOW_LISTEN")]
    listen: Option<SocketAddr>,
    /// HTTP query address, host:port.
    #[arg(long, global = true, env = "SYNCHROFLOW_HTTP")]
    http: Option<SocketAddr>,
    #[arg(long, global = true, env = "SYNCHROFLOW_JOURNAL")]
    journal: Option<PathBuf>,
    /// Machine-readable stdout; diagnostics stay on stderr.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the aggregator until SIGINT/SIGTERM.
    Serve,
    /// Run a cell scenario and write sent.ndjson and delivered.ndjson.
    Simulate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Contact plans, overlay and extraction events from a VOC annotation.
    Grasp(GraspArgs),
    /// Replay a journal offline and write one query document.
    Export(ExportArgs),
    /// Replay a journal and print the canonical snapshot.
    Replay {
        /// Journal file; defaults to --journal.
        path: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct GraspArgs {
    voc: PathBuf,
    /// Bill of materials JSON; the built-in indicative BOM if omitted.
    #[arg(long)]
    bom: Option<PathBuf>,
    #[arg(long)]
    plans: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long, default_value = "ro3")]
    node: String,
    #[arg(long, default_value = "use")]
    from: String,
    #[arg(long, default_value = "disassembly")]
    to: String,
    #[arg(long, default_value_t = 0)]
    seq_start: u64,
    #[arg(long, default_value_t = 0)]
    ts_ms: u64,
    #[arg(long, default_value_t = synchroflow::perception::DEFAULT_MIN_CONFIDENCE)]
    min_confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportKind {
    Sankey,
    Bars,
    Balance,
    Snapshot,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Journal file; defaults to --journal.
    path: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: ExportKind,
    #[arg(long)]
    lo: Option<u64>,
    #[arg(long)]
    hi: Option<u64>,
    /// Comma-separated process ids (bars).
    #[arg(long)]
    area: Option<String>,
    /// Material id (bars).
    #[arg(long)]
    material: Option<String>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Serve => commands::serve(&cli.global),
        Command::Simulate { out } => commands::simulate(&cli.global, out),
        Command::Grasp(args) => commands::grasp(&cli.global, args),
        Command::Export(args) => commands::export(&cli.global, args),
        Command::Replay { path } => commands::replay(&cli.global, path.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("synchroflow: {e}");
            e.exit_code()
        }
    }
}
