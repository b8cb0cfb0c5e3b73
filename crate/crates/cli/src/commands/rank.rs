//! `rank`: top streets or intersections by centrality over a window.

use super::{
    csv_with_digest, load_snapshot, parse_window, write_output, ClassArg, Ctx, FilterArgs,
    MetricArg,
};
use crate::error::CliError;
use crate::lock;
use clap::Args;
use std::path::PathBuf;
use stvg_core::metrics::{self, TargetClass};
use stvg_core::projection;

#[derive(Args, Debug)]
pub struct RankArgs {
    /// Snapshot file; defaults to <out>/graph.stvg.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Node class to rank.
    #[arg(long, value_enum)]
    pub class: ClassArg,
    /// Centrality metric.
    #[arg(long, value_enum, default_value = "degree")]
    pub metric: MetricArg,
    /// Time window: 2013, 2010:2015, 2014-03 or
    /// 2014-03-01T00..2014-03-07T23. Defaults to the full graph span.
    #[arg(long)]
    pub window: Option<String>,
    /// Number of rows to report.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[command(flatten)]
    pub filter: FilterArgs,
}

pub fn run(ctx: &Ctx, args: &RankArgs) -> Result<(), CliError> {
    let _lock = lock::acquire(&ctx.out)?;
    let graph = load_snapshot(&ctx.snapshot_path(&args.snapshot))?;
    let window = parse_window(args.window.as_deref(), &graph)?;
    let filter = args.filter.to_filter(&ctx.cfg)?;
    let class: TargetClass = args.class.into();

    let fp = projection::project(&graph, window, filter, &ctx.cfg.bands);
    let scores = match args.metric {
        MetricArg::Degree => metrics::degree_centrality(&fp, class),
        MetricArg::Pagerank => {
            ctx.cfg.pagerank.validate().map_err(CliError::Usage)?;
            metrics::pagerank(&fp, &ctx.cfg.pagerank, class)
        }
    };
    let table = metrics::top_k(&graph, &scores, args.k);

    let mut rows: Vec<Vec<String>> = vec![vec![
        "rank".to_string(),
        "name".to_string(),
        "id".to_string(),
        "score".to_string(),
    ]];
    for row in &table.rows {
        rows.push(vec![
            row.rank.to_string(),
            row.name.clone(),
            row.int_id.map(|v| v.to_string()).unwrap_or_default(),
            row.score.to_string(),
        ]);
    }
    write_output(&ctx.out.join("rank.csv"), &csv_with_digest(&ctx.cfg, &rows))?;

    let report = serde_json::json!({
        "config_digest": ctx.cfg.digest(),
        "metric": match args.metric {
            MetricArg::Degree => "degree",
            MetricArg::Pagerank => "pagerank",
        },
        "class": class.as_str(),
        "window": window.to_string(),
        "filter": table.filter.to_string(),
        "k": args.k,
        "crashes": fp.crash_nodes.len(),
        "pagerank": table.pagerank,
        "rows": table.rows,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_output(&ctx.out.join("rank.json"), &text)?;

    if let Some(diag) = &table.pagerank {
        if !diag.converged {
            eprintln!(
                "warning: pagerank stopped after {} iterations with delta {:.3e}; raise \
                 pagerank_max_iterations or loosen pagerank_tolerance to converge",
                diag.iterations, diag.final_delta
            );
        }
    }

    println!(
        "rank: {} {} rows for window {} (filter {}, {} crashes)",
        table.rows.len(),
        class.as_str(),
        window,
        table.filter,
        fp.crash_nodes.len()
    );
    for row in &table.rows {
        match row.int_id {
            Some(id) => println!("rank:   {:>3}. {} (id {id}) {}", row.rank, row.name, row.score),
            None => println!("rank:   {:>3}. {} {}", row.rank, row.name, row.score),
        }
    }
    Ok(())
}
