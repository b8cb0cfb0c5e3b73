//! Time-windowed, attribute-filtered views of the graph.
//!
//! A projection never copies or mutates the graph. It produces a footprint:
//! the sets of crash nodes, spatial nodes and edges that survive the window
//! and filter, with the rest of the graph still reachable for lookups.

use crate::graph::{Direction, EdgeKind, NodeId, NodeLabel, StvgGraph};
use crate::road_prep::RawCrash;
use chrono::{Datelike, NaiveDate, NaiveDateTime};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    /// First hour, inclusive, floored to the hour.
    pub start: NaiveDateTime,
    /// Last hour, inclusive: the window covers all of this hour.
    pub end: NaiveDateTime,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid time window {input:?}: {reason}")]
pub struct WindowParseError {
    pub input: String,
    pub reason: String,
}

impl TimeWindow {
    pub fn from_years(first: i32, last: i32) -> Self {
        TimeWindow {
            start: NaiveDate::from_ymd_opt(first, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            end: NaiveDate::from_ymd_opt(last, 12, 31).unwrap().and_hms_opt(23, 0, 0).unwrap(),
        }
    }

    /// Accepted forms: `2014`, `2010:2015`, `2014-03`, and an explicit hour
    /// range `2014-03-01T00..2014-03-07T23` (end inclusive).
    pub fn parse(input: &str) -> Result<Self, WindowParseError> {
        let fail = |reason: &str| WindowParseError {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let input = input.trim();

        if let Some((a, b)) = input.split_once("..") {
            let parse_hour = |s: &str| {
                NaiveDateTime::parse_from_str(&format!("{s}:00"), "%Y-%m-%dT%H:%M")
                    .map_err(|_| fail("expected YYYY-MM-DDTHH on both sides of '..'"))
            };
            let start = parse_hour(a)?;
            let end = parse_hour(b)?;
            if start > end {
                return Err(fail("window start is after its end"));
            }
            return Ok(TimeWindow { start, end });
        }

        if let Some((a, b)) = input.split_once(':') {
            let y0: i32 = a.parse().map_err(|_| fail("expected YYYY:YYYY"))?;
            let y1: i32 = b.parse().map_err(|_| fail("expected YYYY:YYYY"))?;
            if !(1000..=9999).contains(&y0) || !(1000..=9999).contains(&y1) {
                return Err(fail("years must have four digits"));
            }
            if y0 > y1 {
                return Err(fail("window start is after its end"));
            }
            return Ok(TimeWindow::from_years(y0, y1));
        }

        if let Some((y, m)) = input.split_once('-') {
            let year: i32 = y.parse().map_err(|_| fail("expected YYYY-MM"))?;
            let month: u32 = m.parse().map_err(|_| fail("expected YYYY-MM"))?;
            let first = NaiveDate::from_ymd_opt(year, month, 1)
                .ok_or_else(|| fail("no such month"))?;
            let last_day = if month == 12 {
                NaiveDate::from_ymd_opt(year + 1, 1, 1)
            } else {
                NaiveDate::from_ymd_opt(year, month + 1, 1)
            }
            .unwrap()
            .pred_opt()
            .unwrap();
            return Ok(TimeWindow {
                start: first.and_hms_opt(0, 0, 0).unwrap(),
                end: last_day.and_hms_opt(23, 0, 0).unwrap(),
            });
        }

        let year: i32 = input.parse().map_err(|_| fail("expected a year"))?;
        if !(1000..=9999).contains(&year) {
            return Err(fail("years must have four digits"));
        }
        Ok(TimeWindow::from_years(year, year))
    }

    /// True when the crash timestamp falls inside the covered hours.
    pub fn covers(&self, t: NaiveDateTime) -> bool {
        t >= self.start && t < self.end + chrono::Duration::hours(1)
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}..{}",
            self.start.format("%Y-%m-%dT%H"),
            self.end.format("%Y-%m-%dT%H")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgeBand {
    Teen,
    Adult,
    Elderly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayClass {
    Weekday,
    Weekend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HourBand {
    Morning,
    Afternoon,
    Night,
}

/// Inclusive bounds for the age and hour bands. The night band wraps past
/// midnight, so its pair reads (from, to) across the day boundary.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bands {
    pub teen: (u32, u32),
    pub adult: (u32, u32),
    pub elderly_min: u32,
    pub morning: (u32, u32),
    pub afternoon: (u32, u32),
    pub night: (u32, u32),
}

impl Default for Bands {
    fn default() -> Self {
        Bands {
            teen: (16, 19),
            adult: (20, 64),
            elderly_min: 65,
            morning: (6, 11),
            afternoon: (12, 17),
            night: (18, 5),
        }
    }
}

impl Bands {
    pub fn age_in(&self, band: AgeBand, age: u32) -> bool {
        match band {
            AgeBand::Teen => age >= self.teen.0 && age <= self.teen.1,
            AgeBand::Adult => age >= self.adult.0 && age <= self.adult.1,
            AgeBand::Elderly => age >= self.elderly_min,
        }
    }

    pub fn hour_in(&self, band: HourBand, hour: u32) -> bool {
        let within = |(a, b): (u32, u32)| {
            if a <= b {
                hour >= a && hour <= b
            } else {
                hour >= a || hour <= b // wraps midnight
            }
        };
        match band {
            HourBand::Morning => within(self.morning),
            HourBand::Afternoon => within(self.afternoon),
            HourBand::Night => within(self.night),
        }
    }
}

/// Conjunction of crash predicates; the default filter accepts everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrashFilter {
    pub alcohol: bool,
    pub distraction: bool,
    /// Canonical weather value, compared case-insensitively.
    pub weather: Option<String>,
    pub fatalities_only: bool,
    pub age_band: Option<AgeBand>,
    pub day_class: Option<DayClass>,
    pub hour_band: Option<HourBand>,
}

impl CrashFilter {
    pub fn accepts(&self, crash: &RawCrash, bands: &Bands) -> bool {
        if self.alcohol && !crash.alcohol_related {
            return false;
        }
        if self.distraction && !crash.distraction_related {
            return false;
        }
        if let Some(w) = &self.weather {
            if !crash.weather.eq_ignore_ascii_case(w) {
                return false;
            }
        }
        if self.fatalities_only && crash.fatalities == 0 {
            return false;
        }
        if let Some(band) = self.age_band {
            if !bands.age_in(band, crash.age) {
                return false;
            }
        }
        if let Some(class) = self.day_class {
            let weekend = crash.day_of_week >= 6;
            let want_weekend = class == DayClass::Weekend;
            if weekend != want_weekend {
                return false;
            }
        }
        if let Some(band) = self.hour_band {
            if !bands.hour_in(band, crash.hour_of_day) {
                return false;
            }
        }
        true
    }

    pub fn is_empty(&self) -> bool {
        *self == CrashFilter::default()
    }
}

impl fmt::Display for CrashFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.alcohol {
            parts.push("alcohol".to_string());
        }
        if self.distraction {
            parts.push("distraction".to_string());
        }
        if let Some(w) = &self.weather {
            parts.push(format!("weather={w}"));
        }
        if self.fatalities_only {
            parts.push("fatal".to_string());
        }
        if let Some(b) = self.age_band {
            parts.push(format!("age-band={}", match b {
                AgeBand::Teen => "teen",
                AgeBand::Adult => "adult",
                AgeBand::Elderly => "elderly",
            }));
        }
        if let Some(c) = self.day_class {
            parts.push(format!("day-class={}", match c {
                DayClass::Weekday => "weekday",
                DayClass::Weekend => "weekend",
            }));
        }
        if let Some(b) = self.hour_band {
            parts.push(format!("hour-band={}", match b {
                HourBand::Morning => "morning",
                HourBand::Afternoon => "afternoon",
                HourBand::Night => "night",
            }));
        }
        if parts.is_empty() {
            write!(f, "none")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

/// The surviving node and edge sets of one projection. Node and edge masks
/// are indexed by id for O(1) membership tests.
pub struct SubgraphFootprint<'g> {
    pub graph: &'g StvgGraph,
    pub window: TimeWindow,
    pub filter: CrashFilter,
    pub crash_nodes: Vec<NodeId>,
    pub spatial_nodes: Vec<NodeId>,
    pub edge_ids: Vec<u32>,
    node_mask: Vec<bool>,
    edge_mask: Vec<bool>,
}

impl<'g> SubgraphFootprint<'g> {
    pub fn contains_node(&self, id: NodeId) -> bool {
        self.node_mask.get(id as usize).copied().unwrap_or(false)
    }

    pub fn contains_edge(&self, id: u32) -> bool {
        self.edge_mask.get(id as usize).copied().unwrap_or(false)
    }

    /// All retained nodes, ascending.
    pub fn retained_nodes(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> =
            self.crash_nodes.iter().chain(self.spatial_nodes.iter()).copied().collect();
        v.sort_unstable();
        v
    }

    pub fn is_empty(&self) -> bool {
        self.crash_nodes.is_empty()
    }

    /// Builds the footprint implied by an already-selected crash set: the
    /// crashes themselves, their network elements, the one-hop connectivity
    /// closure around retained intersections, and the retained edges.
    pub fn from_crashes(
        graph: &'g StvgGraph,
        window: TimeWindow,
        filter: CrashFilter,
        mut crash_nodes: Vec<NodeId>,
    ) -> Self {
        crash_nodes.sort_unstable();
        crash_nodes.dedup();

        let mut spatial: BTreeSet<NodeId> = BTreeSet::new();
        for &c in &crash_nodes {
            let row = graph.crash_row_of(c).expect("crash row for footprint node");
            spatial.insert(row.spatial_node);
        }
        // Closure: streets one CONNECTS hop from any retained intersection
        // stay visible, so junction scores keep their structural context.
        let intersections: Vec<NodeId> = spatial
            .iter()
            .copied()
            .filter(|&id| graph.node(id).is_ok_and(|n| n.label == NodeLabel::Intersection))
            .collect();
        for &int in &intersections {
            for (_, street) in graph
                .neighbors(int, &[EdgeKind::Connects], Direction::In)
                .expect("intersection in graph")
            {
                spatial.insert(street);
            }
        }

        let mut node_mask = vec![false; graph.node_count()];
        for &c in &crash_nodes {
            node_mask[c as usize] = true;
        }
        for &s in &spatial {
            node_mask[s as usize] = true;
        }

        let mut edge_ids: Vec<u32> = Vec::new();
        for &c in &crash_nodes {
            for &eid in graph.edges_out(c) {
                let e = graph.edge(eid);
                match e.kind {
                    EdgeKind::LocatedAt => edge_ids.push(eid),
                    EdgeKind::NextEvent if node_mask[e.target as usize] => edge_ids.push(eid),
                    _ => {}
                }
            }
        }
        for &int in &intersections {
            for &eid in graph.edges_in(int) {
                let e = graph.edge(eid);
                if e.kind == EdgeKind::Connects && node_mask[e.source as usize] {
                    edge_ids.push(eid);
                }
            }
        }
        edge_ids.sort_unstable();

        let mut edge_mask = vec![false; graph.edge_count()];
        for &eid in &edge_ids {
            edge_mask[eid as usize] = true;
        }

        SubgraphFootprint {
            graph,
            window,
            filter,
            crash_nodes,
            spatial_nodes: spatial.into_iter().collect(),
            edge_ids,
            node_mask,
            edge_mask,
        }
    }
}

/// Hour leaves covered by the window, via tree descent.
pub fn resolve_window(graph: &StvgGraph, window: &TimeWindow) -> Vec<NodeId> {
    graph.tree().resolve(window.start, window.end)
}

/// Projects the graph onto a window and filter. Crash candidates come from
/// the hour leaves' incoming HAPPENS_AT edges, never from a full scan.
pub fn project<'g>(
    graph: &'g StvgGraph,
    window: TimeWindow,
    filter: CrashFilter,
    bands: &Bands,
) -> SubgraphFootprint<'g> {
    let mut crashes: Vec<NodeId> = Vec::new();
    for hour in resolve_window(graph, &window) {
        for &eid in graph.edges_in(hour) {
            let e = graph.edge(eid);
            if e.kind != EdgeKind::HappensAt {
                continue;
            }
            let row = graph.crash_row_of(e.source).expect("crash row for HAPPENS_AT source");
            if filter.accepts(&row.data.crash, bands) {
                crashes.push(e.source);
            }
        }
    }
    SubgraphFootprint::from_crashes(graph, window, filter, crashes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepGranularity {
    HourOfDay,
    DayOfWeek,
    Month,
    Year,
}

pub const DOW_LABELS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
pub const MONTH_LABELS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// Partitions filtered crashes into calendar buckets and builds one
/// footprint per bucket. Buckets always cover the full label range, so a
/// quiet bucket shows up as an empty footprint instead of a missing row.
pub fn sweep<'g>(
    graph: &'g StvgGraph,
    granularity: SweepGranularity,
    filter: &CrashFilter,
    bands: &Bands,
) -> Vec<(String, SubgraphFootprint<'g>)> {
    let (start, end) = graph.tree().span;
    let span_window = TimeWindow { start, end };
    let first_year = start.year();

    let labels: Vec<String> = match granularity {
        SweepGranularity::HourOfDay => (0..24).map(|h| format!("{h:02}")).collect(),
        SweepGranularity::DayOfWeek => DOW_LABELS.iter().map(|s| s.to_string()).collect(),
        SweepGranularity::Month => MONTH_LABELS.iter().map(|s| s.to_string()).collect(),
        SweepGranularity::Year => (first_year..=end.year()).map(|y| y.to_string()).collect(),
    };

    let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); labels.len()];
    for row in graph.crash_rows() {
        if !filter.accepts(&row.data.crash, bands) {
            continue;
        }
        let c = &row.data.crash;
        let idx = match granularity {
            SweepGranularity::HourOfDay => c.hour_of_day as usize,
            SweepGranularity::DayOfWeek => (c.day_of_week - 1) as usize,
            SweepGranularity::Month => (c.month_of_year - 1) as usize,
            SweepGranularity::Year => (c.year - first_year) as usize,
        };
        buckets[idx].push(row.node_id);
    }

    labels
        .into_iter()
        .zip(buckets)
        .map(|(label, crashes)| {
            (
                label,
                SubgraphFootprint::from_crashes(graph, span_window, filter.clone(), crashes),
            )
        })
        .collect()
}
