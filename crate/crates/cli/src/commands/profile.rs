//! `profile`: crash counts per calendar bucket for selected targets.

use super::{csv_with_digest, load_snapshot, write_output, Ctx, FilterArgs, GranularityArg};
use crate::chart::{line_chart, Series};
use crate::error::CliError;
use crate::lock;
use clap::Args;
use std::path::PathBuf;
use stvg_core::metrics;

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// Snapshot file; defaults to <out>/graph.stvg.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Bucket granularity: hour of day, day of week, month or year.
    #[arg(long, value_enum, default_value = "hour")]
    pub granularity: GranularityArg,
    /// Street name or numeric intersection id; repeatable.
    #[arg(long = "target", required = true)]
    pub targets: Vec<String>,
    #[command(flatten)]
    pub filter: FilterArgs,
}

pub fn run(ctx: &Ctx, args: &ProfileArgs) -> Result<(), CliError> {
    let _lock = lock::acquire(&ctx.out)?;
    let graph = load_snapshot(&ctx.snapshot_path(&args.snapshot))?;
    let filter = args.filter.to_filter(&ctx.cfg)?;

    let series = metrics::temporal_profile(
        &graph,
        args.granularity.into(),
        &args.targets,
        &filter,
        &ctx.cfg.bands,
    )?;

    let mut rows: Vec<Vec<String>> = vec![vec![
        "bucket".to_string(),
        "target".to_string(),
        "score".to_string(),
    ]];
    for (i, bucket) in series.buckets.iter().enumerate() {
        for row in &series.rows {
            rows.push(vec![bucket.clone(), row.label.clone(), row.counts[i].to_string()]);
        }
    }
    write_output(&ctx.out.join("profile.csv"), &csv_with_digest(&ctx.cfg, &rows))?;

    let chart_series: Vec<Series<'_>> = series
        .rows
        .iter()
        .map(|row| Series { name: &row.label, values: &row.counts })
        .collect();
    let title = format!(
        "crashes by {} (filter {})",
        match args.granularity {
            GranularityArg::Hour => "hour of day",
            GranularityArg::Day => "day of week",
            GranularityArg::Month => "month",
            GranularityArg::Year => "year",
        },
        series.filter
    );
    let svg = line_chart(&title, &series.buckets, &chart_series, &ctx.cfg.digest());
    write_output(&ctx.out.join("profile.svg"), &svg)?;

    println!(
        "profile: {} buckets by {} for {} targets (filter {})",
        series.buckets.len(),
        args.granularity.as_str(),
        series.rows.len(),
        series.filter
    );
    for row in &series.rows {
        let total: f64 = row.counts.iter().sum();
        println!("profile:   {} total {total}", row.label);
    }
    Ok(())
}
