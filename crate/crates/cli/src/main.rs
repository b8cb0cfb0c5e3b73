//! Command line front end: prep raw data, build the space-time graph,
//! then rank, profile and inspect it. Every failure maps to one of three
//! stable exit codes (2 usage, 3 data, 4 build).

mod chart;
mod commands;
mod error;
mod lock;

use clap::{Parser, Subcommand};
use commands::Ctx;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "stvg",
    version,
    about = "Space-time crash graph toolkit: ingest road and crash data, build the graph, rank hotspots"
)]
struct Cli {
    /// Run configuration file with key=value lines; defaults apply if absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts and reports.
    #[arg(long, global = true, default_value = "stvg-out")]
    out: PathBuf,
    /// Seed for synthetic data generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merge roads, extract intersections, snap and sequence crashes.
    Prep(commands::prep::PrepArgs),
    /// Assemble the graph snapshot from prep artifacts.
    Build(commands::build::BuildArgs),
    /// Rank streets or intersections by centrality over a window.
    Rank(commands::rank::RankArgs),
    /// Crash count profiles per calendar bucket, as CSV and SVG.
    Profile(commands::profile::ProfileArgs),
    /// Overall versus fatal-only degree for every node of a class.
    Fatality(commands::fatality::FatalityArgs),
    /// Generate a synthetic road grid with a matching crash table.
    Synth(commands::synth::SynthArgs),
    /// Print structural counts of a snapshot as JSON.
    Dump(commands::dump::DumpArgs),
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let ctx = Ctx::new(cli.config.as_deref(), cli.out.clone(), cli.seed)?;
    match &cli.command {
        Command::Prep(args) => commands::prep::run(&ctx, args),
        Command::Build(args) => commands::build::run(&ctx, args),
        Command::Rank(args) => commands::rank::run(&ctx, args),
        Command::Profile(args) => commands::profile::run(&ctx, args),
        Command::Fatality(args) => commands::fatality::run(&ctx, args),
        Command::Synth(args) => commands::synth::run(&ctx, args),
        Command::Dump(args) => commands::dump::run(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
