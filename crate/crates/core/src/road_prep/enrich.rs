//! Geospatial enrichment: snap each crash to the nearest network element.

use super::{EnrichedCrash, LabelKind, Neighborhood, RawCrash};
use crate::geom::GridIndex;
use std::cmp::Ordering;

const GRID_CELL: f64 = 128.0;

/// Result of snapping a crash batch. Orphans fall outside every
/// neighborhood; they are kept for reporting but never enter the graph.
#[derive(Debug)]
pub struct EnrichOutcome {
    pub enriched: Vec<EnrichedCrash>,
    pub orphans: Vec<RawCrash>,
}

/// Snap preference between two candidate neighborhoods at known distances.
/// Closer wins; at equal distance an intersection beats a street, then the
/// lexicographically smaller label wins.
fn better(a: &(f64, &Neighborhood), b: &(f64, &Neighborhood)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap()
        .then_with(|| kind_rank(a.1.kind).cmp(&kind_rank(b.1.kind)))
        .then_with(|| a.1.label.cmp(&b.1.label))
}

fn kind_rank(kind: LabelKind) -> u8 {
    match kind {
        LabelKind::Intersection => 0,
        LabelKind::Street => 1,
    }
}

/// Assigns each crash the label of the nearest neighborhood whose element
/// lies within that neighborhood's radius. Sequence numbers are left at 0;
/// ordering happens afterwards over the full enriched set.
pub fn geo_enrich(crashes: Vec<RawCrash>, neighborhoods: &[Neighborhood]) -> EnrichOutcome {
    let mut grid = GridIndex::new(GRID_CELL);
    for (i, hood) in neighborhoods.iter().enumerate() {
        let (min, max) = match &hood.shape {
            super::NeighborhoodShape::Line(line) => line.bbox(),
            super::NeighborhoodShape::Point(p) => (*p, *p),
        };
        grid.insert_bbox(i as u32, min, max, hood.radius);
    }

    let mut enriched = Vec::new();
    let mut orphans = Vec::new();

    for crash in crashes {
        let mut best: Option<(f64, &Neighborhood)> = None;
        for idx in grid.query_point(crash.location) {
            let hood = &neighborhoods[idx as usize];
            let d = hood.shape.dist_to(&crash.location);
            if d > hood.radius {
                continue;
            }
            let cand = (d, hood);
            if best.as_ref().is_none_or(|b| better(&cand, b) == Ordering::Less) {
                best = Some(cand);
            }
        }
        match best {
            Some((d, hood)) => enriched.push(EnrichedCrash {
                crash,
                spatial_label: hood.label.clone(),
                label_kind: hood.kind,
                snap_distance: d,
                sequence: 0,
            }),
            None => orphans.push(crash),
        }
    }

    EnrichOutcome { enriched, orphans }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::road_prep::NeighborhoodShape;
    use crate::geom::{Point, Polyline};
    use chrono::{NaiveDate, NaiveTime};

    fn crash_at(id: &str, x: f64, y: f64) -> RawCrash {
        RawCrash {
            crash_id: id.to_string(),
            date: NaiveDate::from_ymd_opt(2014, 3, 1).unwrap(),
            time: NaiveTime::from_hms_opt(12, 0, 0).unwrap(),
            age: 40,
            hour_of_day: 12,
            day_of_week: 6,
            month_of_year: 3,
            year: 2014,
            week_number: 9,
            fatalities: 0,
            injuries: 0,
            alcohol_related: false,
            distraction_related: false,
            weather: "Clear".to_string(),
            location: Point::new(x, y),
        }
    }

    fn street_hood(name: &str, pts: &[(f64, f64)]) -> Neighborhood {
        Neighborhood {
            label: name.to_string(),
            kind: LabelKind::Street,
            int_id: None,
            shape: NeighborhoodShape::Line(Polyline::new(
                pts.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            )),
            radius: 15.0,
        }
    }

    fn int_hood(id: u32, x: f64, y: f64) -> Neighborhood {
        Neighborhood {
            label: id.to_string(),
            kind: LabelKind::Intersection,
            int_id: Some(id),
            shape: NeighborhoodShape::Point(Point::new(x, y)),
            radius: 15.0,
        }
    }

    #[test]
    fn nearest_element_wins() {
        let hoods = vec![
            street_hood("NEAR", &[(0.0, 0.0), (100.0, 0.0)]),
            street_hood("FAR", &[(0.0, 14.0), (100.0, 14.0)]),
        ];
        let out = geo_enrich(vec![crash_at("c", 50.0, 3.0)], &hoods);
        assert_eq!(out.enriched.len(), 1);
        assert_eq!(out.enriched[0].spatial_label, "NEAR");
        assert!((out.enriched[0].snap_distance - 3.0).abs() < 1e-9);
    }

    #[test]
    fn intersection_beats_street_on_exact_tie() {
        let hoods = vec![
            street_hood("S", &[(0.0, 0.0), (100.0, 0.0)]),
            int_hood(4, 50.0, 0.0),
        ];
        let out = geo_enrich(vec![crash_at("c", 50.0, 0.0)], &hoods);
        assert_eq!(out.enriched[0].spatial_label, "4");
        assert_eq!(out.enriched[0].label_kind, LabelKind::Intersection);
        assert_eq!(out.enriched[0].snap_distance, 0.0);
    }

    #[test]
    fn equal_distance_ties_use_lexicographic_labels() {
        // "10" sorts before "9" as text; the tie rule is label order, not
        // numeric order.
        let hoods = vec![int_hood(9, 10.0, 0.0), int_hood(10, -10.0, 0.0)];
        let out = geo_enrich(vec![crash_at("c", 0.0, 0.0)], &hoods);
        assert_eq!(out.enriched[0].spatial_label, "10");
    }

    #[test]
    fn out_of_reach_crash_is_an_orphan() {
        let hoods = vec![street_hood("S", &[(0.0, 0.0), (100.0, 0.0)])];
        let out = geo_enrich(
            vec![crash_at("hit", 50.0, 10.0), crash_at("miss", 50.0, 40.0)],
            &hoods,
        );
        assert_eq!(out.enriched.len(), 1);
        assert_eq!(out.orphans.len(), 1);
        assert_eq!(out.orphans[0].crash_id, "miss");
    }

    #[test]
    fn boundary_distance_is_inclusive() {
        let hoods = vec![street_hood("S", &[(0.0, 0.0), (100.0, 0.0)])];
        let out = geo_enrich(vec![crash_at("edge", 50.0, 15.0)], &hoods);
        assert_eq!(out.enriched.len(), 1);
        assert!((out.enriched[0].snap_distance - 15.0).abs() < 1e-12);
    }
}
