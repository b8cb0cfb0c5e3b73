//! `fatality`: overall degree next to fatal-only degree per node.

use super::{csv_with_digest, load_snapshot, parse_window, write_output, ClassArg, Ctx};
use crate::error::CliError;
use crate::lock;
use clap::Args;
use std::path::PathBuf;
use stvg_core::metrics::{self, TargetClass};

#[derive(Args, Debug)]
pub struct FatalityArgs {
    /// Snapshot file; defaults to <out>/graph.stvg.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Node class to report.
    #[arg(long, value_enum)]
    pub class: ClassArg,
    /// Time window; defaults to the full graph span.
    #[arg(long)]
    pub window: Option<String>,
}

pub fn run(ctx: &Ctx, args: &FatalityArgs) -> Result<(), CliError> {
    let _lock = lock::acquire(&ctx.out)?;
    let graph = load_snapshot(&ctx.snapshot_path(&args.snapshot))?;
    let window = parse_window(args.window.as_deref(), &graph)?;
    let class: TargetClass = args.class.into();

    let profile = metrics::fatality_profile(&graph, window, class, &ctx.cfg.bands);

    let mut rows: Vec<Vec<String>> = vec![vec![
        "name".to_string(),
        "id".to_string(),
        "overall".to_string(),
        "fatality".to_string(),
    ]];
    for row in &profile {
        rows.push(vec![
            row.name.clone(),
            row.int_id.map(|v| v.to_string()).unwrap_or_default(),
            row.overall.to_string(),
            row.fatality.to_string(),
        ]);
    }
    write_output(&ctx.out.join("fatality.csv"), &csv_with_digest(&ctx.cfg, &rows))?;

    let fatal_total: f64 = profile.iter().map(|r| r.fatality).sum();
    println!(
        "fatality: {} {} rows for window {} (fatal-degree mass {fatal_total})",
        profile.len(),
        class.as_str(),
        window
    );
    if let Some(top) = profile.first() {
        println!(
            "fatality:   highest overall: {} ({} overall, {} fatal)",
            top.name, top.overall, top.fatality
        );
    }
    Ok(())
}
