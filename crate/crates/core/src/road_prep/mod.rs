//! Road network preparation: merging raw segments into named streets,
//! extracting intersections, cutting streets into fixed-length lixels and
//! snapping crash records onto the nearest network element.
//!
//! The pipeline runs in a fixed order: merge -> intersections -> lixels ->
//! neighborhoods -> enrich -> sequence. Each step is a pure function so the
//! whole chain is replayable byte for byte.

mod enrich;
mod intersect;
mod lixel;
mod merge;

pub use enrich::{geo_enrich, EnrichOutcome};
pub use intersect::extract_intersections;
pub use lixel::{build_neighborhoods, lixelize, Lixel, Neighborhood, NeighborhoodShape};
pub use merge::{merge_segments, normalize_street_name};

use crate::geom::{GeometryFault, Point, Polyline};
use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

/// One raw polyline from the source road file, before any merging.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegment {
    pub segment_id: String,
    pub name: String,
    pub geometry: Polyline,
}

/// All segments that share a normalized name, merged into one logical street.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Street {
    pub name: String,
    pub parts: Vec<Polyline>,
    pub total_length: f64,
}

/// A clustered crossing point of two or more distinct streets. `int_id` is
/// 1-based and assigned in (y, x) order of the cluster centroid, so equal
/// inputs always yield equal ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub int_id: u32,
    pub name: String,
    pub location: Point,
    pub member_streets: Vec<String>,
}

impl Intersection {
    /// Member street names with duplicates removed, sorted. This is the set
    /// that participates in street-to-intersection connectivity.
    pub fn distinct_streets(&self) -> Vec<String> {
        let mut v = self.member_streets.clone();
        v.sort();
        v.dedup();
        v
    }
}

/// Which kind of network element a crash was snapped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelKind {
    Street,
    Intersection,
}

impl LabelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelKind::Street => "street",
            LabelKind::Intersection => "intersection",
        }
    }
}

/// A single crash record as parsed from the source CSV, with every field
/// already validated and typed. Invalid rows never become a `RawCrash`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCrash {
    pub crash_id: String,
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub age: u32,
    /// 0-23, consistent with `time`.
    pub hour_of_day: u32,
    /// ISO day of week, 1 = Monday .. 7 = Sunday, consistent with `date`.
    pub day_of_week: u32,
    pub month_of_year: u32,
    pub year: i32,
    pub week_number: u32,
    pub fatalities: u32,
    pub injuries: u32,
    pub alcohol_related: bool,
    pub distraction_related: bool,
    /// Canonical weather value from the configured vocabulary.
    pub weather: String,
    pub location: Point,
}

impl RawCrash {
    pub fn timestamp(&self) -> NaiveDateTime {
        self.date.and_time(self.time)
    }
}

/// A crash after snapping: carries the assigned network label plus the
/// city-wide temporal sequence number (1-based; 0 means not yet sequenced).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedCrash {
    pub crash: RawCrash,
    pub spatial_label: String,
    pub label_kind: LabelKind,
    pub snap_distance: f64,
    pub sequence: u64,
}

/// Orders crashes by (timestamp, crash_id) and assigns 1-based sequence
/// numbers. Ties on timestamp fall back to the id so the order is total.
pub fn sequence_crashes(mut crashes: Vec<EnrichedCrash>) -> Vec<EnrichedCrash> {
    crashes.sort_by(|a, b| {
        a.crash
            .timestamp()
            .cmp(&b.crash.timestamp())
            .then_with(|| a.crash.crash_id.cmp(&b.crash.crash_id))
    });
    for (i, c) in crashes.iter_mut().enumerate() {
        c.sequence = (i + 1) as u64;
    }
    crashes
}

#[derive(Debug, thiserror::Error)]
pub enum PrepError {
    #[error("segments with empty street name after normalization: {}", ids_preview(.0))]
    EmptyStreetNames(Vec<String>),
    #[error("segment {segment_id}: {fault}")]
    BadGeometry {
        segment_id: String,
        fault: GeometryFault,
    },
}

/// Formats an offender id list, truncated so errors stay readable.
pub(crate) fn ids_preview(ids: &[String]) -> String {
    const SHOW: usize = 20;
    if ids.len() <= SHOW {
        ids.join(", ")
    } else {
        format!("{}, ... ({} total)", ids[..SHOW].join(", "), ids.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crash(id: &str, ts: &str) -> EnrichedCrash {
        let dt = NaiveDateTime::parse_from_str(ts, "%Y-%m-%d %H:%M:%S").unwrap();
        EnrichedCrash {
            crash: RawCrash {
                crash_id: id.to_string(),
                date: dt.date(),
                time: dt.time(),
                age: 30,
                hour_of_day: dt.time().format("%H").to_string().parse().unwrap(),
                day_of_week: 1,
                month_of_year: 1,
                year: 2014,
                week_number: 1,
                fatalities: 0,
                injuries: 0,
                alcohol_related: false,
                distraction_related: false,
                weather: "Clear".to_string(),
                location: Point::new(0.0, 0.0),
            },
            spatial_label: "X".to_string(),
            label_kind: LabelKind::Street,
            snap_distance: 0.0,
            sequence: 0,
        }
    }

    #[test]
    fn sequencing_orders_by_time_then_id() {
        let out = sequence_crashes(vec![
            crash("C3", "2014-01-06 12:00:00"),
            crash("C1", "2014-01-06 09:00:00"),
            crash("C2", "2014-01-06 12:00:00"),
        ]);
        let order: Vec<(&str, u64)> = out
            .iter()
            .map(|c| (c.crash.crash_id.as_str(), c.sequence))
            .collect();
        assert_eq!(order, vec![("C1", 1), ("C2", 2), ("C3", 3)]);
    }

    #[test]
    fn distinct_streets_drops_duplicates() {
        let i = Intersection {
            int_id: 1,
            name: "MINTON&PALM BAY&MINTON&PALM BAY".to_string(),
            location: Point::new(0.0, 0.0),
            member_streets: vec![
                "MINTON".to_string(),
                "PALM BAY".to_string(),
                "MINTON".to_string(),
                "PALM BAY".to_string(),
            ],
        };
        assert_eq!(i.distinct_streets(), vec!["MINTON", "PALM BAY"]);
    }
}
