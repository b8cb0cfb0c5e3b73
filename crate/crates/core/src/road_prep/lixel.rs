//! Lixel cutting and connectivity neighborhoods.
//!
//! A lixel is a fixed-length linear unit of a street part. Every part is cut
//! front to back into `lixel_length` pieces plus one remainder no longer
//! than a full unit; cut points are interpolated along the arc, so the
//! pieces reassemble to the original geometry.

use super::{Intersection, LabelKind, Street};
use crate::geom::{Point, Polyline, COORD_EPS};

/// Absorbs float dust when a part length is an exact multiple of the unit.
const CUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Lixel {
    pub lixel_id: String,
    pub street_name: String,
    pub geometry: Polyline,
    pub length: f64,
}

/// Cuts every part of a street into lixels of `lixel_length`, keeping the
/// remainder piece. Lixel ids encode street, part and position, which makes
/// them stable across runs without being meaningful to anything else.
pub fn lixelize(street: &Street, lixel_length: f64) -> Vec<Lixel> {
    assert!(lixel_length > 0.0, "lixel length must be positive");
    let mut out = Vec::new();
    for (part_idx, part) in street.parts.iter().enumerate() {
        let total = part.length();
        let mut cuts: Vec<f64> = Vec::new();
        let mut s = lixel_length;
        while s < total - CUT_TOL {
            cuts.push(s);
            s += lixel_length;
        }
        cuts.push(total);

        let mut start = 0.0;
        let mut cursor = 0usize; // vertex index of the last emitted position
        let mut walked = 0.0; // arc length up to `cursor`
        for (k, &end) in cuts.iter().enumerate() {
            let mut verts = vec![part.point_at(start)];
            // Carry interior vertices that fall strictly inside (start, end).
            while cursor + 1 < part.vertices.len() {
                let seg_len = part.vertices[cursor].dist(&part.vertices[cursor + 1]);
                if walked + seg_len < end - CUT_TOL {
                    walked += seg_len;
                    cursor += 1;
                    push_vertex(&mut verts, part.vertices[cursor]);
                } else {
                    break;
                }
            }
            push_vertex(&mut verts, part.point_at(end));
            if verts.len() < 2 {
                // End landed exactly on the last carried vertex; degenerate
                // slivers are impossible because cuts are > CUT_TOL apart.
                continue;
            }
            let geometry = Polyline::new(verts);
            let length = geometry.length();
            out.push(Lixel {
                lixel_id: format!("{}#{}#{}", street.name, part_idx, k),
                street_name: street.name.clone(),
                geometry,
                length,
            });
            start = end;
        }
    }
    out
}

fn push_vertex(verts: &mut Vec<Point>, v: Point) {
    if verts.last().is_none_or(|last| last.dist(&v) > COORD_EPS) {
        verts.push(v);
    }
}

/// The geometric element a neighborhood is built around.
#[derive(Debug, Clone, PartialEq)]
pub enum NeighborhoodShape {
    Line(Polyline),
    Point(Point),
}

impl NeighborhoodShape {
    pub fn dist_to(&self, p: &Point) -> f64 {
        match self {
            NeighborhoodShape::Line(line) => line.dist_to_point(p),
            NeighborhoodShape::Point(q) => q.dist(p),
        }
    }
}

/// A catchment area around one network element. Lixel neighborhoods carry
/// their parent street name as label; intersection neighborhoods carry the
/// numeric id both as label text and as `int_id` for tie-breaking.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub label: String,
    pub kind: LabelKind,
    pub int_id: Option<u32>,
    pub shape: NeighborhoodShape,
    pub radius: f64,
}

/// Builds one neighborhood per lixel and one per intersection, in that
/// order. The count is therefore always `lixels + intersections`.
pub fn build_neighborhoods(
    lixels: &[Lixel],
    intersections: &[Intersection],
    radius: f64,
) -> Vec<Neighborhood> {
    let mut out = Vec::with_capacity(lixels.len() + intersections.len());
    for lx in lixels {
        out.push(Neighborhood {
            label: lx.street_name.clone(),
            kind: LabelKind::Street,
            int_id: None,
            shape: NeighborhoodShape::Line(lx.geometry.clone()),
            radius,
        });
    }
    for int in intersections {
        out.push(Neighborhood {
            label: int.int_id.to_string(),
            kind: LabelKind::Intersection,
            int_id: Some(int.int_id),
            shape: NeighborhoodShape::Point(int.location),
            radius,
        });
    }
    out
}
