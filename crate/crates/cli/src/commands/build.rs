//! `build`: prep artifacts to a verified graph snapshot.

use super::{write_output, Ctx};
use crate::error::{write_failed, CliError};
use crate::lock;
use clap::Args;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;
use stvg_core::graph::snapshot;
use stvg_core::{io, pipeline};

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Directory holding the prep artifacts; defaults to the output dir.
    #[arg(long)]
    pub prep_dir: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, args: &BuildArgs) -> Result<(), CliError> {
    let _lock = lock::acquire(&ctx.out)?;
    let prep_dir = args.prep_dir.clone().unwrap_or_else(|| ctx.out.clone());

    let streets_path = prep_dir.join("streets.json");
    let intersections_path = prep_dir.join("intersections.json");
    let enriched_path = prep_dir.join("enriched.csv");

    let streets = io::read_streets_json(&streets_path, &ctx.cfg)?;
    let intersections = io::read_intersections_json(&intersections_path, &ctx.cfg)?;
    let enriched = io::read_enriched_csv(&enriched_path, &ctx.cfg)?;

    // One digest over the three artifact digests, order fixed, so any input
    // change shows up in the graph metadata.
    let mut hasher = Sha256::new();
    for path in [&streets_path, &intersections_path, &enriched_path] {
        hasher.update(io::file_digest(path)?.as_bytes());
    }
    let input_digest = hex::encode(hasher.finalize());

    let graph = pipeline::build(&streets, &intersections, &enriched, &ctx.cfg, input_digest)?;

    let snapshot_path = ctx.out.join("graph.stvg");
    let file = std::fs::File::create(&snapshot_path)
        .map_err(|e| write_failed(format!("cannot write {}: {e}", snapshot_path.display())))?;
    snapshot::save(&graph, std::io::BufWriter::new(file)).map_err(write_failed)?;

    let mut node_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in graph.nodes() {
        *node_counts.entry(rec.label.as_str()).or_default() += 1;
    }
    let mut edge_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in graph.edges() {
        *edge_counts.entry(e.kind.as_str()).or_default() += 1;
    }

    let report = serde_json::json!({
        "config_digest": graph.meta().config_digest,
        "input_digest": graph.meta().input_digest,
        "nodes": node_counts,
        "edges": edge_counts,
        "node_total": graph.node_count(),
        "edge_total": graph.edge_count(),
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_output(&ctx.out.join("build_report.json"), &text)?;

    println!(
        "build: {} nodes, {} edges written to {}",
        graph.node_count(),
        graph.edge_count(),
        snapshot_path.display()
    );
    for (label, n) in &node_counts {
        println!("build:   {label} x {n}");
    }
    for (kind, n) in &edge_counts {
        println!("build:   {kind} x {n}");
    }
    Ok(())
}
