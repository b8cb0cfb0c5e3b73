//! Segment-to-street merging keyed on normalized street names.

use super::{PrepError, RoadSegment, Street};
use crate::geom::Point;
use std::collections::BTreeMap;

/// Canonical form of a street name: trimmed, inner whitespace collapsed to
/// single spaces, uppercased. Two segments belong to the same street exactly
/// when their normalized names are equal.
pub fn normalize_street_name(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_uppercase()
}

fn vertex_key(p: &Point) -> (f64, f64) {
    p.yx_key()
}

fn part_cmp(a: &crate::geom::Polyline, b: &crate::geom::Polyline) -> std::cmp::Ordering {
    // First vertex decides; full vertex sequence breaks ties so equal inputs
    // in any order produce the same part list.
    let n = a.vertices.len().min(b.vertices.len());
    for i in 0..n {
        let ka = vertex_key(&a.vertices[i]);
        let kb = vertex_key(&b.vertices[i]);
        match ka.partial_cmp(&kb).unwrap() {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.vertices.len().cmp(&b.vertices.len())
}

/// Groups raw segments by normalized name and returns one street per name,
/// sorted by name. Geometries are kept exactly as given, only reordered.
///
/// Segments whose name normalizes to the empty string are all collected and
/// reported in a single error; geometry faults abort on the first offender.
pub fn merge_segments(segments: Vec<RoadSegment>) -> Result<Vec<Street>, PrepError> {
    let mut nameless: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<crate::geom::Polyline>> = BTreeMap::new();

    for seg in segments {
        if let Err(fault) = seg.geometry.validate() {
            return Err(PrepError::BadGeometry {
                segment_id: seg.segment_id,
                fault,
            });
        }
        let name = normalize_street_name(&seg.name);
        if name.is_empty() {
            nameless.push(seg.segment_id);
            continue;
        }
        groups.entry(name).or_default().push(seg.geometry);
    }

    if !nameless.is_empty() {
        return Err(PrepError::EmptyStreetNames(nameless));
    }

    Ok(groups
        .into_iter()
        .map(|(name, mut parts)| {
            parts.sort_by(part_cmp);
            let total_length = parts.iter().map(|p| p.length()).sum();
            Street {
                name,
                parts,
                total_length,
            }
        })
        .collect())
}
