//! Centrality over footprints: degree counts, PageRank, rankings and the
//! temporal profiles derived from them.

use crate::graph::{EdgeKind, NodeId, NodeLabel, StvgGraph};
use crate::projection::{
    sweep, CrashFilter, SubgraphFootprint, SweepGranularity, TimeWindow,
};
use crate::road_prep::normalize_street_name;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Degree,
    Pagerank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetClass {
    Street,
    Intersection,
}

impl TargetClass {
    pub fn node_label(&self) -> NodeLabel {
        match self {
            TargetClass::Street => NodeLabel::Street,
            TargetClass::Intersection => NodeLabel::Intersection,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TargetClass::Street => "street",
            TargetClass::Intersection => "intersection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DanglingPolicy {
    Sink,
    Redistribute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// PR(i) = d/n + (1-d) * sum, the formula exactly as published.
    Paper,
    /// PR(i) = (1-d)/n + d * sum, the usual formulation.
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub damping: f64,
    pub max_iterations: u32,
    pub tolerance: f64,
    pub dangling: DanglingPolicy,
    pub convention: Convention,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.15,
            max_iterations: 100,
            tolerance: 1e-12,
            dangling: DanglingPolicy::Redistribute,
            convention: Convention::Paper,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(format!("damping must be in (0,1), got {}", self.damping));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            return Err("max_iterations must be at least 1".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PagerankDiagnostics {
    pub converged: bool,
    pub iterations: u32,
    pub final_delta: f64,
}

/// Scores for the retained nodes of one class. Class nodes absent from the
/// footprint implicitly score 0 via `score_of`.
#[derive(Debug, Clone)]
pub struct CentralityScores {
    pub metric: Metric,
    pub target_class: TargetClass,
    pub scores: BTreeMap<NodeId, f64>,
    pub window: TimeWindow,
    pub filter: CrashFilter,
    pub pagerank: Option<PagerankDiagnostics>,
}

impl CentralityScores {
    pub fn score_of(&self, node: NodeId) -> f64 {
        self.scores.get(&node).copied().unwrap_or(0.0)
    }
}

/// Count of retained edges incident to each retained node of the class,
/// in-edges plus out-edges, each edge once.
pub fn degree_centrality(fp: &SubgraphFootprint<'_>, target_class: TargetClass) -> CentralityScores {
    let label = target_class.node_label();
    let mut scores = BTreeMap::new();
    for &node in &fp.spatial_nodes {
        if fp.graph.node(node).expect("retained node").label != label {
            continue;
        }
        scores.insert(node, incident_retained(fp, node) as f64);
    }
    CentralityScores {
        metric: Metric::Degree,
        target_class,
        scores,
        window: fp.window,
        filter: fp.filter.clone(),
        pagerank: None,
    }
}

fn incident_retained(fp: &SubgraphFootprint<'_>, node: NodeId) -> usize {
    let outs = fp.graph.edges_out(node).iter().filter(|&&e| fp.contains_edge(e)).count();
    let ins = fp.graph.edges_in(node).iter().filter(|&&e| fp.contains_edge(e)).count();
    outs + ins
}

/// Power iteration over a dense id space. Exposed on its own so tests can
/// drive arbitrary digraphs without building a full graph around them.
pub fn pagerank_edges(
    n: usize,
    edges: &[(u32, u32)],
    cfg: &PageRankConfig,
) -> (Vec<f64>, PagerankDiagnostics) {
    assert!(n > 0, "pagerank over an empty node set");
    let nf = n as f64;
    let (base, follow) = match cfg.convention {
        Convention::Paper => (cfg.damping / nf, 1.0 - cfg.damping),
        Convention::Standard => ((1.0 - cfg.damping) / nf, cfg.damping),
    };

    let mut out_deg = vec![0u32; n];
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        out_deg[u as usize] += 1;
        incoming[v as usize].push(u);
    }
    // Fixed summation order regardless of edge list order.
    for list in &mut incoming {
        list.sort_unstable();
    }

    let mut pr = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let dangling_mass: f64 = (0..n).filter(|&i| out_deg[i] == 0).map(|i| pr[i]).sum();
        let dangling_share = match cfg.dangling {
            DanglingPolicy::Sink => 0.0,
            DanglingPolicy::Redistribute => follow * dangling_mass / nf,
        };
        for v in 0..n {
            let mut acc = 0.0;
            for &u in &incoming[v] {
                acc += pr[u as usize] / out_deg[u as usize] as f64;
            }
            next[v] = base + follow * acc + dangling_share;
        }
        delta = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pr, &mut next);
        if delta < cfg.tolerance {
            break;
        }
    }

    (
        pr,
        PagerankDiagnostics {
            converged: delta < cfg.tolerance,
            iterations,
            final_delta: delta,
        },
    )
}

/// PageRank over the whole footprint (crash and spatial nodes alike),
/// reported for the requested class. Non-convergence is flagged in the
/// diagnostics, never an error.
pub fn pagerank(
    fp: &SubgraphFootprint<'_>,
    cfg: &PageRankConfig,
    target_class: TargetClass,
) -> CentralityScores {
    let nodes = fp.retained_nodes();
    let mut dense_of: BTreeMap<NodeId, u32> = BTreeMap::new();
    for (i, &id) in nodes.iter().enumerate() {
        dense_of.insert(id, i as u32);
    }
    let edges: Vec<(u32, u32)> = fp
        .edge_ids
        .iter()
        .map(|&eid| {
            let e = fp.graph.edge(eid);
            (dense_of[&e.source], dense_of[&e.target])
        })
        .collect();

    let (scores_dense, diag) = if nodes.is_empty() {
        (Vec::new(), PagerankDiagnostics { converged: true, iterations: 0, final_delta: 0.0 })
    } else {
        pagerank_edges(nodes.len(), &edges, cfg)
    };

    let label = target_class.node_label();
    let mut scores = BTreeMap::new();
    for (i, &id) in nodes.iter().enumerate() {
        if fp.graph.node(id).expect("retained node").label == label {
            scores.insert(id, scores_dense[i]);
        }
    }
    CentralityScores {
        metric: Metric::Pagerank,
        target_class,
        scores,
        window: fp.window,
        filter: fp.filter.clone(),
        pagerank: Some(diag),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub rank: u32,
    pub name: String,
    /// Present for intersections only; numeric so ties sort 2 before 10.
    pub int_id: Option<u32>,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct RankedTable {
    pub metric: Metric,
    pub target_class: TargetClass,
    pub window: TimeWindow,
    pub filter: CrashFilter,
    pub k: usize,
    pub rows: Vec<RankedRow>,
    pub pagerank: Option<PagerankDiagnostics>,
}

/// Top `k` rows by descending score; ties fall back to label ascending (and
/// numeric id for duplicate intersection names) so equal inputs cannot
/// reorder between runs.
pub fn top_k(graph: &StvgGraph, scores: &CentralityScores, k: usize) -> RankedTable {
    let mut rows: Vec<RankedRow> = scores
        .scores
        .iter()
        .map(|(&node, &score)| {
            let rec = graph.node(node).expect("scored node");
            let (name, int_id) = match scores.target_class {
                TargetClass::Street => (
                    rec.properties["name"].as_str().unwrap_or_default().to_string(),
                    None,
                ),
                TargetClass::Intersection => (
                    rec.properties["name"].as_str().unwrap_or_default().to_string(),
                    rec.properties["int_id"].as_i64().map(|v| v as u32),
                ),
            };
            RankedRow { rank: 0, name, int_id, score }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| a.name.cmp(&b.name))
            .then_with(|| a.int_id.cmp(&b.int_id))
    });
    rows.truncate(k);
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = (i + 1) as u32;
    }
    RankedTable {
        metric: scores.metric,
        target_class: scores.target_class,
        window: scores.window,
        filter: scores.filter.clone(),
        k,
        rows,
        pagerank: scores.pagerank.clone(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("unknown target labels: {0:?}")]
    UnknownTargets(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub label: String,
    pub node: NodeId,
    pub counts: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ProfileSeries {
    pub granularity: SweepGranularity,
    pub filter: CrashFilter,
    pub buckets: Vec<String>,
    pub rows: Vec<ProfileRow>,
}

/// Resolves a user-supplied target label: digits name an intersection id,
/// anything else a street (normalized like road names are).
pub fn resolve_target(graph: &StvgGraph, label: &str) -> Option<(String, NodeId)> {
    if let Ok(int_id) = label.trim().parse::<u32>() {
        return graph.intersection_node(int_id).map(|n| (int_id.to_string(), n));
    }
    let name = normalize_street_name(label);
    graph.street_node(&name).map(|n| (name, n))
}

/// Crash incidence per sweep bucket for each target: the count of retained
/// LOCATED_AT edges pointing at the target, which makes the buckets of any
/// granularity sum to the target's total crash count under the filter.
pub fn temporal_profile(
    graph: &StvgGraph,
    granularity: SweepGranularity,
    targets: &[String],
    filter: &CrashFilter,
    bands: &crate::projection::Bands,
) -> Result<ProfileSeries, MetricsError> {
    let mut resolved: Vec<(String, NodeId)> = Vec::new();
    let mut unknown: Vec<String> = Vec::new();
    for t in targets {
        match resolve_target(graph, t) {
            Some(pair) => resolved.push(pair),
            None => unknown.push(t.clone()),
        }
    }
    if !unknown.is_empty() {
        return Err(MetricsError::UnknownTargets(unknown));
    }

    let swept = sweep(graph, granularity, filter, bands);
    let buckets: Vec<String> = swept.iter().map(|(label, _)| label.clone()).collect();
    let rows = resolved
        .into_iter()
        .map(|(label, node)| {
            let counts = swept
                .iter()
                .map(|(_, fp)| {
                    graph
                        .edges_in(node)
                        .iter()
                        .filter(|&&eid| {
                            graph.edge(eid).kind == EdgeKind::LocatedAt && fp.contains_edge(eid)
                        })
                        .count() as f64
                })
                .collect();
            ProfileRow { label, node, counts }
        })
        .collect();

    Ok(ProfileSeries {
        granularity,
        filter: filter.clone(),
        buckets,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FatalityRow {
    pub name: String,
    pub int_id: Option<u32>,
    pub overall: f64,
    pub fatality: f64,
}

/// Overall degree next to fatal-only degree for every class node retained
/// in the unfiltered window, ordered by overall degree descending.
pub fn fatality_profile(
    graph: &StvgGraph,
    window: TimeWindow,
    target_class: TargetClass,
    bands: &crate::projection::Bands,
) -> Vec<FatalityRow> {
    let overall_fp = crate::projection::project(graph, window, CrashFilter::default(), bands);
    let fatal_filter = CrashFilter { fatalities_only: true, ..CrashFilter::default() };
    let fatal_fp = crate::projection::project(graph, window, fatal_filter, bands);

    let overall = degree_centrality(&overall_fp, target_class);
    let fatal = degree_centrality(&fatal_fp, target_class);

    let mut rows: Vec<FatalityRow> = overall
        .scores
        .iter()
        .map(|(&node, &score)| {
            let rec = graph.node(node).expect("scored node");
            FatalityRow {
                name: rec.properties["name"].as_str().unwrap_or_default().to_string(),
                int_id: rec.properties.get("int_id").and_then(|v| v.as_i64()).map(|v| v as u32),
                overall: score,
                fatality: fatal.score_of(node),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.overall
            .partial_cmp(&a.overall)
            .unwrap()
            .then_with(|| a.name.cmp(&b.name))
            .then_with(|| a.int_id.cmp(&b.int_id))
    });
    rows
}
