//! Graph assembly: turns prepared road and crash data into one connected
//! record set with a fixed, reproducible construction order.
//!
//! Node ids are allocated tree first, then streets, intersections, factors
//! and crashes; edges follow in kind order. Running the assembler twice on
//! equal inputs yields byte-identical records.

use super::time_tree::{build_time_tree, TimeTreeError};
use super::{
    EdgeId, EdgeKind, EdgeRecord, GraphMeta, NodeId, NodeLabel, NodeRecord, PropValue, Properties,
    StvgGraph,
};
use crate::road_prep::{ids_preview, EnrichedCrash, Intersection, LabelKind, RawCrash, Street};
use crate::geom::Point;
use chrono::{NaiveDate, NaiveTime};
use std::collections::BTreeMap;

pub const FACTOR_ALCOHOL: &str = "Alcohol";
pub const FACTOR_DISTRACTION: &str = "Distraction";

/// Factor label for a weather value, e.g. `Weather=Rain`.
pub fn weather_factor(value: &str) -> String {
    format!("Weather={value}")
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("no crash records; nothing to build a graph from")]
    NoCrashes,
    #[error("crashes reference unknown network labels: {}", ids_preview(.0))]
    UnresolvedLabels(Vec<String>),
    #[error("crashes carry weather values outside the configured vocabulary: {}", ids_preview(.0))]
    UnknownWeather(Vec<String>),
    #[error("crashes are not sequenced 1..n without gaps")]
    BadSequencing,
    #[error(transparent)]
    TimeTree(#[from] TimeTreeError),
    #[error("assembled records failed validation: {0}")]
    Inconsistent(#[from] super::GraphError),
}

/// Builds the full graph. `crashes` must already be enriched and sequenced;
/// the time tree spans whole calendar years covering every crash timestamp.
pub fn assemble_graph(
    streets: &[Street],
    intersections: &[Intersection],
    crashes: &[EnrichedCrash],
    weather_values: &[String],
    meta: GraphMeta,
) -> Result<StvgGraph, BuildError> {
    if crashes.is_empty() {
        return Err(BuildError::NoCrashes);
    }

    let mut ordered: Vec<&EnrichedCrash> = crashes.iter().collect();
    ordered.sort_by_key(|c| c.sequence);
    for (i, c) in ordered.iter().enumerate() {
        if c.sequence != (i + 1) as u64 {
            return Err(BuildError::BadSequencing);
        }
    }

    let min_year = ordered.iter().map(|c| c.crash.year).min().unwrap();
    let max_year = ordered.iter().map(|c| c.crash.year).max().unwrap();
    let tree = build_time_tree(
        NaiveDate::from_ymd_opt(min_year, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
        NaiveDate::from_ymd_opt(max_year, 12, 31).unwrap().and_hms_opt(23, 0, 0).unwrap(),
    )?;

    let mut nodes = tree.nodes;
    let mut edges = tree.edges;

    let push_node = |nodes: &mut Vec<NodeRecord>, label: NodeLabel, properties: Properties| {
        let id = nodes.len() as NodeId;
        nodes.push(NodeRecord { node_id: id, label, properties });
        id
    };

    let mut street_nodes: BTreeMap<&str, NodeId> = BTreeMap::new();
    let mut sorted_streets: Vec<&Street> = streets.iter().collect();
    sorted_streets.sort_by(|a, b| a.name.cmp(&b.name));
    for street in sorted_streets {
        let mut p = Properties::new();
        p.insert("name".to_string(), PropValue::Str(street.name.clone()));
        p.insert("length_m".to_string(), PropValue::Float(street.total_length));
        p.insert("part_count".to_string(), PropValue::Int(street.parts.len() as i64));
        let id = push_node(&mut nodes, NodeLabel::Street, p);
        street_nodes.insert(street.name.as_str(), id);
    }

    let mut int_nodes: BTreeMap<u32, NodeId> = BTreeMap::new();
    let mut sorted_ints: Vec<&Intersection> = intersections.iter().collect();
    sorted_ints.sort_by_key(|i| i.int_id);
    for int in &sorted_ints {
        let mut p = Properties::new();
        p.insert("int_id".to_string(), PropValue::Int(int.int_id as i64));
        p.insert("name".to_string(), PropValue::Str(int.name.clone()));
        p.insert("x".to_string(), PropValue::Float(int.location.x));
        p.insert("y".to_string(), PropValue::Float(int.location.y));
        let id = push_node(&mut nodes, NodeLabel::Intersection, p);
        int_nodes.insert(int.int_id, id);
    }

    let mut factor_nodes: BTreeMap<String, NodeId> = BTreeMap::new();
    let mut factor_labels = vec![FACTOR_ALCOHOL.to_string(), FACTOR_DISTRACTION.to_string()];
    factor_labels.extend(weather_values.iter().map(|w| weather_factor(w)));
    for label in factor_labels {
        let mut p = Properties::new();
        p.insert("factor".to_string(), PropValue::Str(label.clone()));
        let id = push_node(&mut nodes, NodeLabel::Factor, p);
        factor_nodes.insert(label, id);
    }

    // Resolve per-crash targets before creating anything, so bad labels
    // surface together instead of after a half-built node list.
    let mut unresolved: Vec<String> = Vec::new();
    let mut bad_weather: Vec<String> = Vec::new();
    let mut spatial_of: Vec<NodeId> = Vec::with_capacity(ordered.len());
    let mut hour_of: Vec<NodeId> = Vec::with_capacity(ordered.len());
    for c in &ordered {
        let spatial = match c.label_kind {
            LabelKind::Street => street_nodes.get(c.spatial_label.as_str()).copied(),
            LabelKind::Intersection => c
                .spatial_label
                .parse::<u32>()
                .ok()
                .and_then(|id| int_nodes.get(&id).copied()),
        };
        match spatial {
            Some(id) => spatial_of.push(id),
            None => {
                unresolved.push(c.crash.crash_id.clone());
                spatial_of.push(0);
            }
        }
        // The tree spans every crash year in full, so this lookup only fails
        // on an invalid timestamp, which parsing already excluded.
        hour_of.push(tree.index.hour_node(c.crash.timestamp()).expect("hour in tree span"));
        if !factor_nodes.contains_key(&weather_factor(&c.crash.weather)) {
            bad_weather.push(c.crash.crash_id.clone());
        }
    }
    if !unresolved.is_empty() {
        return Err(BuildError::UnresolvedLabels(unresolved));
    }
    if !bad_weather.is_empty() {
        return Err(BuildError::UnknownWeather(bad_weather));
    }

    let mut crash_nodes: Vec<NodeId> = Vec::with_capacity(ordered.len());
    for c in &ordered {
        let id = push_node(&mut nodes, NodeLabel::Crash, crash_to_props(c));
        crash_nodes.push(id);
    }

    let push_edge = |edges: &mut Vec<EdgeRecord>,
                         kind: EdgeKind,
                         source: NodeId,
                         target: NodeId,
                         t_a: Option<NodeId>,
                         t_b: Option<NodeId>,
                         w_s: Option<f64>,
                         w_t: Option<f64>| {
        let id = edges.len() as EdgeId;
        edges.push(EdgeRecord { edge_id: id, kind, source, target, t_a, t_b, w_s, w_t });
    };

    for (i, _) in ordered.iter().enumerate() {
        push_edge(&mut edges, EdgeKind::LocatedAt, crash_nodes[i], spatial_of[i], None, None, None, None);
    }
    for (i, _) in ordered.iter().enumerate() {
        push_edge(&mut edges, EdgeKind::HappensAt, crash_nodes[i], hour_of[i], None, None, None, None);
    }
    // Event space: consecutive crashes city-wide, weighted by distance and
    // elapsed seconds, bracketed by their hour nodes.
    for w in 0..ordered.len().saturating_sub(1) {
        let (a, b) = (ordered[w], ordered[w + 1]);
        let dist = a.crash.location.dist(&b.crash.location);
        let secs = b
            .crash
            .timestamp()
            .signed_duration_since(a.crash.timestamp())
            .num_seconds() as f64;
        push_edge(
            &mut edges,
            EdgeKind::NextEvent,
            crash_nodes[w],
            crash_nodes[w + 1],
            Some(hour_of[w]),
            Some(hour_of[w + 1]),
            Some(dist),
            Some(secs),
        );
    }
    // Geography chain mirrors the event chain between the underlying
    // elements; hops within one element would be self loops and are skipped.
    for w in 0..ordered.len().saturating_sub(1) {
        if spatial_of[w] == spatial_of[w + 1] {
            continue;
        }
        push_edge(
            &mut edges,
            EdgeKind::NextGeo,
            spatial_of[w],
            spatial_of[w + 1],
            Some(hour_of[w]),
            Some(hour_of[w + 1]),
            None,
            None,
        );
    }
    for (i, c) in ordered.iter().enumerate() {
        if c.crash.alcohol_related {
            push_edge(&mut edges, EdgeKind::CausedBy, crash_nodes[i], factor_nodes[FACTOR_ALCOHOL], None, None, None, None);
        }
        if c.crash.distraction_related {
            push_edge(&mut edges, EdgeKind::CausedBy, crash_nodes[i], factor_nodes[FACTOR_DISTRACTION], None, None, None, None);
        }
        let wf = weather_factor(&c.crash.weather);
        push_edge(&mut edges, EdgeKind::CausedBy, crash_nodes[i], factor_nodes[&wf], None, None, None, None);
    }
    for int in &sorted_ints {
        for street_name in int.distinct_streets() {
            if let Some(&street_node) = street_nodes.get(street_name.as_str()) {
                push_edge(
                    &mut edges,
                    EdgeKind::Connects,
                    street_node,
                    int_nodes[&int.int_id],
                    None,
                    None,
                    Some(0.0),
                    None,
                );
            }
        }
    }

    Ok(StvgGraph::from_parts(nodes, edges, meta)?)
}

const PROP_DATE_FMT: &str = "%Y-%m-%d";
const PROP_TIME_FMT: &str = "%H:%M:%S";

fn crash_to_props(c: &EnrichedCrash) -> Properties {
    let mut p = Properties::new();
    let r = &c.crash;
    p.insert("crash_id".into(), PropValue::Str(r.crash_id.clone()));
    p.insert("date".into(), PropValue::Str(r.date.format(PROP_DATE_FMT).to_string()));
    p.insert("time".into(), PropValue::Str(r.time.format(PROP_TIME_FMT).to_string()));
    p.insert("age".into(), PropValue::Int(r.age as i64));
    p.insert("hour_of_day".into(), PropValue::Int(r.hour_of_day as i64));
    p.insert("day_of_week".into(), PropValue::Int(r.day_of_week as i64));
    p.insert("month_of_year".into(), PropValue::Int(r.month_of_year as i64));
    p.insert("year".into(), PropValue::Int(r.year as i64));
    p.insert("week_number".into(), PropValue::Int(r.week_number as i64));
    p.insert("fatalities".into(), PropValue::Int(r.fatalities as i64));
    p.insert("injuries".into(), PropValue::Int(r.injuries as i64));
    p.insert("alcohol_related".into(), PropValue::Bool(r.alcohol_related));
    p.insert("distraction_related".into(), PropValue::Bool(r.distraction_related));
    p.insert("weather".into(), PropValue::Str(r.weather.clone()));
    p.insert("x".into(), PropValue::Float(r.location.x));
    p.insert("y".into(), PropValue::Float(r.location.y));
    p.insert("spatial_label".into(), PropValue::Str(c.spatial_label.clone()));
    p.insert("label_kind".into(), PropValue::Str(c.label_kind.as_str().to_string()));
    p.insert("snap_distance".into(), PropValue::Float(c.snap_distance));
    p.insert("sequence".into(), PropValue::Int(c.sequence as i64));
    p
}

/// Inverse of `crash_to_props`; used when deriving typed rows from records.
pub(crate) fn crash_from_props(p: &Properties) -> Result<EnrichedCrash, String> {
    let get = |key: &str| p.get(key).ok_or_else(|| format!("missing property {key}"));
    let get_str = |key: &str| {
        get(key)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| format!("property {key} is not a string"))
    };
    let get_int = |key: &str| {
        get(key)?
            .as_i64()
            .ok_or_else(|| format!("property {key} is not an integer"))
    };
    let get_float = |key: &str| {
        get(key)?
            .as_f64()
            .ok_or_else(|| format!("property {key} is not a number"))
    };
    let get_bool = |key: &str| {
        get(key)?
            .as_bool()
            .ok_or_else(|| format!("property {key} is not a boolean"))
    };

    let date = NaiveDate::parse_from_str(&get_str("date")?, PROP_DATE_FMT)
        .map_err(|e| format!("bad date property: {e}"))?;
    let time = NaiveTime::parse_from_str(&get_str("time")?, PROP_TIME_FMT)
        .map_err(|e| format!("bad time property: {e}"))?;
    let label_kind = match get_str("label_kind")?.as_str() {
        "street" => LabelKind::Street,
        "intersection" => LabelKind::Intersection,
        other => return Err(format!("unknown label_kind {other:?}")),
    };

    Ok(EnrichedCrash {
        crash: RawCrash {
            crash_id: get_str("crash_id")?,
            date,
            time,
            age: get_int("age")? as u32,
            hour_of_day: get_int("hour_of_day")? as u32,
            day_of_week: get_int("day_of_week")? as u32,
            month_of_year: get_int("month_of_year")? as u32,
            year: get_int("year")? as i32,
            week_number: get_int("week_number")? as u32,
            fatalities: get_int("fatalities")? as u32,
            injuries: get_int("injuries")? as u32,
            alcohol_related: get_bool("alcohol_related")?,
            distraction_related: get_bool("distraction_related")?,
            weather: get_str("weather")?,
            location: Point::new(get_float("x")?, get_float("y")?),
        },
        spatial_label: get_str("spatial_label")?,
        label_kind,
        snap_distance: get_float("snap_distance")?,
        sequence: get_int("sequence")? as u64,
    })
}


#[cfg(test)]
mod tests {
    use super::tests_support::*;
    use super::*;

    #[test]
    fn single_crash_edge_counts() {
        let g = assemble_graph(
            &[mk_street("S")],
            &[],
            &[mk_crash("c1", 1, "2014-03-01 10:00:00", "S", "Rain")],
            &weather_vocab(),
            meta(),
        )
        .unwrap();
        let counts = g.edge_counts_by_kind();
        assert_eq!(counts["LOCATED_AT"], 1);
        assert_eq!(counts["HAPPENS_AT"], 1);
        // Weather always contributes one factor edge; no alcohol here.
        assert_eq!(counts["CAUSED_BY"], 1);
        assert!(!counts.contains_key("NEXT_EVENT"));
        assert_eq!(g.node_counts_by_label()["Factor"], 5);
    }

    #[test]
    fn event_chain_weights_are_elapsed_seconds() {
        let g = assemble_graph(
            &[mk_street("S"), mk_street("T")],
            &[],
            &[
                mk_crash("c1", 1, "2014-03-01 10:00:00", "S", "Clear"),
                mk_crash("c2", 2, "2014-03-01 10:30:00", "T", "Clear"),
                mk_crash("c3", 3, "2014-03-02 10:00:00", "S", "Clear"),
            ],
            &weather_vocab(),
            meta(),
        )
        .unwrap();
        let wts: Vec<f64> = g
            .edges()
            .iter()
            .filter(|e| e.kind == EdgeKind::NextEvent)
            .map(|e| e.w_t.unwrap())
            .collect();
        assert_eq!(wts, vec![1800.0, 84600.0]);
        for e in g.edges().iter().filter(|e| e.kind == EdgeKind::NextEvent) {
            assert!(e.t_a.is_some() && e.t_b.is_some());
        }
    }

    #[test]
    fn next_geo_skips_self_loops_and_carries_no_weights() {
        let g = assemble_graph(
            &[mk_street("S"), mk_street("T")],
            &[],
            &[
                mk_crash("c1", 1, "2014-03-01 10:00:00", "S", "Clear"),
                mk_crash("c2", 2, "2014-03-01 11:00:00", "S", "Clear"),
                mk_crash("c3", 3, "2014-03-01 12:00:00", "T", "Clear"),
            ],
            &weather_vocab(),
            meta(),
        )
        .unwrap();
        let geo: Vec<&EdgeRecord> = g
            .edges()
            .iter()
            .filter(|e| e.kind == EdgeKind::NextGeo)
            .collect();
        assert_eq!(geo.len(), 1);
        assert_eq!(geo[0].w_s, None);
        assert_eq!(geo[0].w_t, None);
        assert!(geo[0].t_a.is_some());
    }

    #[test]
    fn connects_deduplicates_member_streets() {
        let int = Intersection {
            int_id: 1,
            name: "S&T&S&T".to_string(),
            location: Point::new(50.0, 0.0),
            member_streets: vec!["S".into(), "T".into(), "S".into(), "T".into()],
        };
        let g = assemble_graph(
            &[mk_street("S"), mk_street("T")],
            &[int],
            &[mk_crash("c1", 1, "2014-03-01 10:00:00", "S", "Clear")],
            &weather_vocab(),
            meta(),
        )
        .unwrap();
        assert_eq!(g.edge_counts_by_kind()["CONNECTS"], 2);
        for e in g.edges().iter().filter(|e| e.kind == EdgeKind::Connects) {
            assert_eq!(g.node(e.source).unwrap().label, NodeLabel::Street);
            assert_eq!(g.node(e.target).unwrap().label, NodeLabel::Intersection);
        }
    }

    #[test]
    fn unknown_label_and_weather_are_reported_with_ids() {
        let err = assemble_graph(
            &[mk_street("S")],
            &[],
            &[mk_crash("c1", 1, "2014-03-01 10:00:00", "NOWHERE", "Clear")],
            &weather_vocab(),
            meta(),
        )
        .unwrap_err();
        assert!(matches!(err, BuildError::UnresolvedLabels(ref ids) if ids == &vec!["c1".to_string()]));

        let err = assemble_graph(
            &[mk_street("S")],
            &[],
            &[mk_crash("c1", 1, "2014-03-01 10:00:00", "S", "Hail")],
            &weather_vocab(),
            meta(),
        )
        .unwrap_err();
        assert!(matches!(err, BuildError::UnknownWeather(ref ids) if ids == &vec!["c1".to_string()]));
    }

    #[test]
    fn crash_props_round_trip() {
        let c = mk_crash("c9a", 4, "2014-12-31 23:59:58", "S", "Cloudy");
        let back = crash_from_props(&crash_to_props(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn tree_spans_whole_years_of_data() {
        let g = assemble_graph(
            &[mk_street("S")],
            &[],
            &[
                mk_crash("c1", 1, "2013-06-15 10:00:00", "S", "Clear"),
                mk_crash("c2", 2, "2014-02-01 10:00:00", "S", "Clear"),
            ],
            &weather_vocab(),
            meta(),
        )
        .unwrap();
        assert_eq!(g.tree().years.len(), 2);
        assert_eq!(g.tree().hour_count(), 8760 * 2);
    }
}
