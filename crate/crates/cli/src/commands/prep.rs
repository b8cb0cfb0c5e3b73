//! `prep`: raw road and crash files to enriched artifacts.

use super::Ctx;
use crate::error::{write_failed, CliError};
use crate::lock;
use clap::Args;
use std::path::PathBuf;
use stvg_core::{io, pipeline};

#[derive(Args, Debug)]
pub struct PrepArgs {
    /// Road network, .geojson/.json FeatureCollection or .csv with WKT.
    #[arg(long)]
    pub roads: PathBuf,
    /// Crash table, .csv in the ingestion schema.
    #[arg(long)]
    pub crashes: PathBuf,
}

pub fn run(ctx: &Ctx, args: &PrepArgs) -> Result<(), CliError> {
    let _lock = lock::acquire(&ctx.out)?;

    let segments = io::read_roads(&args.roads)?;
    let crashes = io::read_crashes(&args.crashes, &ctx.cfg)?;
    let roads_digest = io::file_digest(&args.roads)?;
    let crashes_digest = io::file_digest(&args.crashes)?;
    let segment_count = segments.len();
    let crash_count = crashes.len();

    let prep = pipeline::prepare(segments, crashes, &ctx.cfg)?;

    io::write_enriched_csv(&ctx.out.join("enriched.csv"), &prep.enriched, &ctx.cfg)
        .map_err(write_failed)?;
    io::write_streets_json(&ctx.out.join("streets.json"), &prep.streets, &ctx.cfg)
        .map_err(write_failed)?;
    io::write_intersections_json(
        &ctx.out.join("intersections.json"),
        &prep.intersections,
        &ctx.cfg,
    )
    .map_err(write_failed)?;

    let report = io::PrepReport {
        config_digest: ctx.cfg.digest(),
        roads_digest,
        crashes_digest,
        segments: segment_count,
        streets: prep.streets.len(),
        intersections: prep.intersections.len(),
        lixels: prep.lixel_count,
        neighborhoods: prep.neighborhood_count,
        crashes_read: crash_count,
        enriched: prep.enriched.len(),
        orphans: prep.orphans.iter().map(|c| c.crash_id.clone()).collect(),
    };
    io::write_prep_report(&ctx.out.join("prep_report.json"), &report).map_err(write_failed)?;

    println!(
        "prep: {segment_count} segments merged into {} streets, {} intersections, {} lixels, {} neighborhoods",
        report.streets, report.intersections, report.lixels, report.neighborhoods
    );
    println!(
        "prep: {crash_count} crashes read, {} enriched, {} orphaned",
        report.enriched,
        report.orphans.len()
    );
    println!("prep: artifacts written to {}", ctx.out.display());
    Ok(())
}
