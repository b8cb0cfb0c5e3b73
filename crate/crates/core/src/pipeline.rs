//! End-to-end orchestration: raw files to prep artifacts to graph.

use crate::config::RunConfig;
use crate::graph::{assemble_graph, BuildError, GraphMeta, StvgGraph};
use crate::road_prep::{
    build_neighborhoods, extract_intersections, geo_enrich, lixelize, merge_segments,
    sequence_crashes, EnrichedCrash, Intersection, Lixel, PrepError, RawCrash, RoadSegment, Street,
};

/// Everything the prep stage produces, ready for artifact emission or
/// direct graph assembly.
#[derive(Debug, Clone)]
pub struct PrepArtifacts {
    pub streets: Vec<Street>,
    pub intersections: Vec<Intersection>,
    pub lixel_count: usize,
    pub neighborhood_count: usize,
    /// Snapped crashes, already sequenced city-wide.
    pub enriched: Vec<EnrichedCrash>,
    pub orphans: Vec<RawCrash>,
}

/// Runs merge, intersection extraction, lixelling, neighborhood creation,
/// enrichment and sequencing in their fixed order.
pub fn prepare(
    segments: Vec<RoadSegment>,
    crashes: Vec<RawCrash>,
    cfg: &RunConfig,
) -> Result<PrepArtifacts, PrepError> {
    let streets = merge_segments(segments)?;
    let intersections = extract_intersections(&streets, cfg.dedup_epsilon);
    let lixels: Vec<Lixel> = streets
        .iter()
        .flat_map(|s| lixelize(s, cfg.lixel_length))
        .collect();
    let neighborhoods = build_neighborhoods(&lixels, &intersections, cfg.connectivity_radius);
    let outcome = geo_enrich(crashes, &neighborhoods);
    let enriched = sequence_crashes(outcome.enriched);
    Ok(PrepArtifacts {
        streets,
        intersections,
        lixel_count: lixels.len(),
        neighborhood_count: neighborhoods.len(),
        enriched,
        orphans: outcome.orphans,
    })
}

/// Assembles the full space-time graph from prep outputs. `input_digest`
/// identifies the source data and is stored in the graph metadata next to
/// the config digest.
pub fn build(
    streets: &[Street],
    intersections: &[Intersection],
    enriched: &[EnrichedCrash],
    cfg: &RunConfig,
    input_digest: String,
) -> Result<StvgGraph, BuildError> {
    let meta = GraphMeta { config_digest: cfg.digest(), input_digest };
    assemble_graph(streets, intersections, enriched, &cfg.weather_values, meta)
}
