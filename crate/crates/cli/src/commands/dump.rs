//! `dump`: structural counts of a snapshot as JSON on stdout, for CI
//! assertions and quick inspection. Read-only, so it takes no lock.

use super::{load_snapshot, Ctx};
use crate::error::CliError;
use clap::Args;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct DumpArgs {
    /// Snapshot file; defaults to <out>/graph.stvg.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, args: &DumpArgs) -> Result<(), CliError> {
    let graph = load_snapshot(&ctx.snapshot_path(&args.snapshot))?;

    let mut node_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in graph.nodes() {
        *node_counts.entry(rec.label.as_str()).or_default() += 1;
    }
    let mut edge_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in graph.edges() {
        *edge_counts.entry(e.kind.as_str()).or_default() += 1;
    }
    let tree = graph.tree();
    let (start, end) = tree.span;

    let doc = serde_json::json!({
        "config_digest": graph.meta().config_digest,
        "input_digest": graph.meta().input_digest,
        "nodes": node_counts,
        "node_total": graph.node_count(),
        "edges": edge_counts,
        "edge_total": graph.edge_count(),
        "crashes": graph.crash_rows().len(),
        "time_tree": {
            "span": format!("{}..{}", start.format("%Y-%m-%dT%H"), end.format("%Y-%m-%dT%H")),
            "years": tree.years.len(),
            "months": tree.months.len(),
            "days": tree.days.len(),
            "hours": tree.hours.len(),
        },
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("dump serializes"));
    Ok(())
}
