//! Planar geometry primitives for projected road networks.
//!
//! All coordinates are assumed to be in a projected CRS with meter units.
//! Nothing here knows about latitude or longitude; the ingestion layer
//! rejects data that looks geodetic before it gets this far.

use serde::{Deserialize, Serialize};

/// Tolerance for treating two coordinates as the same location during
/// intersection extraction. Distinct from the cluster dedup epsilon, which
/// is configurable; this one guards against float noise only.
pub const COORD_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Ordering key used whenever geometry has to be sorted: y first, then x.
    pub fn yx_key(&self) -> (f64, f64) {
        (self.y, self.x)
    }
}

/// An open polyline with at least two vertices. Zero-length edges between
/// consecutive vertices are rejected at validation time, so `length()` is
/// always positive for a valid polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub vertices: Vec<Point>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polyline { vertices }
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn first(&self) -> Point {
        self.vertices[0]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Checks the structural invariants every road geometry must satisfy.
    pub fn validate(&self) -> Result<(), GeometryFault> {
        if self.vertices.len() < 2 {
            return Err(GeometryFault::TooFewVertices(self.vertices.len()));
        }
        for v in &self.vertices {
            if !v.is_finite() {
                return Err(GeometryFault::NonFiniteCoordinate);
            }
        }
        for (a, b) in self.segments() {
            if a.dist(&b) <= COORD_EPS {
                return Err(GeometryFault::DegenerateSegment);
            }
        }
        Ok(())
    }

    /// Point at arc-length `s` from the start, clamped to the polyline ends.
    pub fn point_at(&self, s: f64) -> Point {
        let mut remaining = s.max(0.0);
        for (a, b) in self.segments() {
            let len = a.dist(&b);
            if remaining <= len {
                let t = if len > 0.0 { remaining / len } else { 0.0 };
                return Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
            }
            remaining -= len;
        }
        *self.vertices.last().unwrap()
    }

    /// Shortest distance from `p` to any segment of the polyline.
    pub fn dist_to_point(&self, p: &Point) -> f64 {
        self.segments()
            .map(|(a, b)| seg_point_dist(a, b, *p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        (min, max)
    }
}

/// Reasons a geometry fails validation. Carriers (segment ids and so on)
/// are attached by the layer that knows them.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryFault {
    #[error("polyline has {0} vertices, need at least 2")]
    TooFewVertices(usize),
    #[error("coordinate is NaN or infinite")]
    NonFiniteCoordinate,
    #[error("consecutive vertices coincide")]
    DegenerateSegment,
}

fn cross(ox: f64, oy: f64, ax: f64, ay: f64) -> f64 {
    ox * ay - oy * ax
}

/// Distance from point `p` to segment `a`-`b`.
pub fn seg_point_dist(a: Point, b: Point, p: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return a.dist(&p);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(&Point::new(a.x + t * dx, a.y + t * dy))
}

/// Where two segments meet. Crossings and endpoint touches yield one point;
/// collinear overlap yields the two endpoints of the shared interval (or one
/// point if the overlap degenerates to a single location).
pub fn seg_seg_intersections(a1: Point, a2: Point, b1: Point, b2: Point) -> Vec<Point> {
    let rx = a2.x - a1.x;
    let ry = a2.y - a1.y;
    let sx = b2.x - b1.x;
    let sy = b2.y - b1.y;
    let denom = cross(rx, ry, sx, sy);
    let qpx = b1.x - a1.x;
    let qpy = b1.y - a1.y;

    let r_len = rx.hypot(ry);
    // Perpendicular distance of b1 from the infinite line through a; used to
    // decide collinearity without depending on segment scale.
    let off_line = if r_len > 0.0 {
        cross(qpx, qpy, rx, ry).abs() / r_len
    } else {
        f64::INFINITY
    };

    if denom.abs() > COORD_EPS * r_len * sx.hypot(sy) {
        // General position: a unique line crossing, inside both segments or not.
        let t = cross(qpx, qpy, sx, sy) / denom;
        let u = cross(qpx, qpy, rx, ry) / denom;
        let eps = 1e-9;
        if t >= -eps && t <= 1.0 + eps && u >= -eps && u <= 1.0 + eps {
            let tc = t.clamp(0.0, 1.0);
            return vec![Point::new(a1.x + tc * rx, a1.y + tc * ry)];
        }
        return vec![];
    }

    if off_line > COORD_EPS {
        return vec![]; // parallel, not collinear
    }

    // Collinear: project b's endpoints onto a's parameterization.
    let len2 = rx * rx + ry * ry;
    if len2 == 0.0 {
        return vec![];
    }
    let t0 = (qpx * rx + qpy * ry) / len2;
    let t1 = ((b2.x - a1.x) * rx + (b2.y - a1.y) * ry) / len2;
    let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
    let lo = lo.max(0.0);
    let hi = hi.min(1.0);
    if lo > hi {
        return vec![];
    }
    let pa = Point::new(a1.x + lo * rx, a1.y + lo * ry);
    let pb = Point::new(a1.x + hi * rx, a1.y + hi * ry);
    if pa.dist(&pb) <= COORD_EPS {
        vec![pa]
    } else {
        vec![pa, pb]
    }
}

/// Uniform grid over object ids. Deterministic as long as callers sort what
/// they pull out; the map iteration order is never observed.
pub struct GridIndex {
    cell: f64,
    cells: std::collections::HashMap<(i64, i64), Vec<u32>>,
}

impl GridIndex {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0);
        GridIndex {
            cell,
            cells: std::collections::HashMap::new(),
        }
    }

    fn key(&self, x: f64, y: f64) -> (i64, i64) {
        ((x / self.cell).floor() as i64, (y / self.cell).floor() as i64)
    }

    /// Registers `id` in every cell overlapped by the bbox, grown by `pad`.
    pub fn insert_bbox(&mut self, id: u32, min: Point, max: Point, pad: f64) {
        let (x0, y0) = self.key(min.x - pad, min.y - pad);
        let (x1, y1) = self.key(max.x + pad, max.y + pad);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                self.cells.entry((cx, cy)).or_default().push(id);
            }
        }
    }

    /// Ids registered in the cell containing `p`, sorted and deduplicated.
    pub fn query_point(&self, p: Point) -> Vec<u32> {
        let mut out = match self.cells.get(&self.key(p.x, p.y)) {
            Some(v) => v.clone(),
            None => Vec::new(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Ids whose registration overlaps the bbox, sorted and deduplicated.
    pub fn query_bbox(&self, min: Point, max: Point) -> Vec<u32> {
        let (x0, y0) = self.key(min.x, min.y);
        let (x1, y1) = self.key(max.x, max.y);
        let mut out = Vec::new();
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                if let Some(v) = self.cells.get(&(cx, cy)) {
                    out.extend_from_slice(v);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn crossing_segments_meet_once() {
        let hits = seg_seg_intersections(p(0.0, 0.0), p(10.0, 0.0), p(5.0, -5.0), p(5.0, 5.0));
        assert_eq!(hits.len(), 1);
        assert!(hits[0].dist(&p(5.0, 0.0)) < 1e-9);
    }

    #[test]
    fn endpoint_touch_counts() {
        let hits = seg_seg_intersections(p(0.0, 0.0), p(10.0, 0.0), p(10.0, 0.0), p(10.0, 7.0));
        assert_eq!(hits.len(), 1);
        assert!(hits[0].dist(&p(10.0, 0.0)) < 1e-9);
    }

    #[test]
    fn parallel_segments_miss() {
        let hits = seg_seg_intersections(p(0.0, 0.0), p(10.0, 0.0), p(0.0, 1.0), p(10.0, 1.0));
        assert!(hits.is_empty());
    }

    #[test]
    fn disjoint_on_same_line_miss() {
        let hits = seg_seg_intersections(p(0.0, 0.0), p(4.0, 0.0), p(5.0, 0.0), p(9.0, 0.0));
        assert!(hits.is_empty());
    }

    #[test]
    fn collinear_overlap_reports_interval_ends() {
        let hits = seg_seg_intersections(p(0.0, 0.0), p(10.0, 0.0), p(6.0, 0.0), p(14.0, 0.0));
        assert_eq!(hits.len(), 2);
        assert!(hits[0].dist(&p(6.0, 0.0)) < 1e-9);
        assert!(hits[1].dist(&p(10.0, 0.0)) < 1e-9);
    }

    #[test]
    fn point_at_walks_arc_length() {
        let line = Polyline::new(vec![p(0.0, 0.0), p(3.0, 0.0), p(3.0, 4.0)]);
        assert!((line.length() - 7.0).abs() < 1e-12);
        assert!(line.point_at(3.0).dist(&p(3.0, 0.0)) < 1e-12);
        assert!(line.point_at(5.0).dist(&p(3.0, 2.0)) < 1e-12);
        assert!(line.point_at(100.0).dist(&p(3.0, 4.0)) < 1e-12);
    }

    #[test]
    fn validate_rejects_bad_shapes() {
        assert!(Polyline::new(vec![p(0.0, 0.0)]).validate().is_err());
        assert!(Polyline::new(vec![p(0.0, 0.0), p(0.0, 0.0)]).validate().is_err());
        assert!(Polyline::new(vec![p(0.0, 0.0), p(f64::NAN, 1.0)])
            .validate()
            .is_err());
        assert!(Polyline::new(vec![p(0.0, 0.0), p(1.0, 1.0)]).validate().is_ok());
    }

    #[test]
    fn grid_index_finds_nearby_ids() {
        let mut g = GridIndex::new(10.0);
        g.insert_bbox(7, p(0.0, 0.0), p(5.0, 5.0), 1.0);
        g.insert_bbox(9, p(100.0, 100.0), p(105.0, 105.0), 1.0);
        assert_eq!(g.query_point(p(2.0, 2.0)), vec![7]);
        assert_eq!(g.query_point(p(102.0, 102.0)), vec![9]);
        assert!(g.query_point(p(50.0, 50.0)).is_empty());
    }
}
