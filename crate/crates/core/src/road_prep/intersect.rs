//! Intersection extraction: find every location where parts of two distinct
//! streets cross or touch, then cluster nearby candidates into junctions.

use super::{Intersection, Street};
use crate::geom::{seg_seg_intersections, GridIndex, Point, COORD_EPS};
use std::collections::BTreeMap;

const GRID_CELL: f64 = 128.0;

#[derive(Debug)]
struct SegRef {
    street: u32,
    part: u32,
    a: Point,
    b: Point,
}

/// One raw crossing of two streets, before clustering. `name_a < name_b`
/// because streets arrive sorted by name and pairs are taken in index order.
#[derive(Debug)]
struct Candidate {
    point: Point,
    name_a: u32,
    name_b: u32,
}

struct Cluster {
    sum_x: f64,
    sum_y: f64,
    n: usize,
    /// Street indices in the order candidates joined, two per candidate.
    names: Vec<u32>,
}

impl Cluster {
    fn centroid(&self) -> Point {
        Point::new(self.sum_x / self.n as f64, self.sum_y / self.n as f64)
    }
}

/// Extracts intersections from a street list (sorted by name, as produced by
/// merging). Candidates closer than `dedup_epsilon` to an existing cluster
/// centroid join that cluster; ids are assigned in (y, x) centroid order.
pub fn extract_intersections(streets: &[Street], dedup_epsilon: f64) -> Vec<Intersection> {
    let mut segs: Vec<SegRef> = Vec::new();
    for (si, street) in streets.iter().enumerate() {
        for (pi, part) in street.parts.iter().enumerate() {
            for (a, b) in part.segments() {
                segs.push(SegRef {
                    street: si as u32,
                    part: pi as u32,
                    a,
                    b,
                });
            }
        }
    }

    let mut grid = GridIndex::new(GRID_CELL);
    for (i, s) in segs.iter().enumerate() {
        let min = Point::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y));
        let max = Point::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y));
        grid.insert_bbox(i as u32, min, max, COORD_EPS);
    }

    // Hits are grouped per (street pair, part pair) so that one geometric
    // crossing reported by two adjacent segments (a shared vertex lies
    // exactly on the other street) collapses to a single candidate.
    let mut part_pair_hits: BTreeMap<(u32, u32, u32, u32), Vec<Point>> = BTreeMap::new();
    let mut seen: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();

    for (i, s) in segs.iter().enumerate() {
        let min = Point::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y));
        let max = Point::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y));
        for j in grid.query_bbox(min, max) {
            let (i, j) = (i as u32, j);
            if i >= j {
                continue;
            }
            let (lo, hi) = (&segs[i as usize], &segs[j as usize]);
            if lo.street == hi.street || !seen.insert((i, j)) {
                continue;
            }
            // Street order within the pair follows the sorted street list.
            let (first, second) = if lo.street < hi.street { (lo, hi) } else { (hi, lo) };
            for pt in seg_seg_intersections(lo.a, lo.b, hi.a, hi.b) {
                part_pair_hits
                    .entry((first.street, first.part, second.street, second.part))
                    .or_default()
                    .push(pt);
            }
        }
    }

    let mut candidates: Vec<Candidate> = Vec::new();
    for ((sa, _, sb, _), mut pts) in part_pair_hits {
        pts.sort_by(|p, q| p.yx_key().partial_cmp(&q.yx_key()).unwrap());
        let mut kept: Vec<Point> = Vec::new();
        for pt in pts {
            if kept.iter().all(|k| k.dist(&pt) > COORD_EPS) {
                kept.push(pt);
            }
        }
        for pt in kept {
            candidates.push(Candidate {
                point: pt,
                name_a: sa,
                name_b: sb,
            });
        }
    }

    candidates.sort_by(|a, b| {
        a.point
            .yx_key()
            .partial_cmp(&b.point.yx_key())
            .unwrap()
            .then(a.name_a.cmp(&b.name_a))
            .then(a.name_b.cmp(&b.name_b))
    });

    let mut clusters: Vec<Cluster> = Vec::new();
    for cand in candidates {
        let mut best: Option<(usize, f64)> = None;
        for (ci, cl) in clusters.iter().enumerate() {
            let d = cl.centroid().dist(&cand.point);
            if d < dedup_epsilon && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((ci, d));
            }
        }
        match best {
            Some((ci, _)) => {
                let cl = &mut clusters[ci];
                cl.sum_x += cand.point.x;
                cl.sum_y += cand.point.y;
                cl.n += 1;
                cl.names.push(cand.name_a);
                cl.names.push(cand.name_b);
            }
            None => clusters.push(Cluster {
                sum_x: cand.point.x,
                sum_y: cand.point.y,
                n: 1,
                names: vec![cand.name_a, cand.name_b],
            }),
        }
    }

    let mut finished: Vec<(Point, Vec<u32>)> =
        clusters.into_iter().map(|c| (c.centroid(), c.names)).collect();
    finished.sort_by(|a, b| a.0.yx_key().partial_cmp(&b.0.yx_key()).unwrap());

    finished
        .into_iter()
        .enumerate()
        .map(|(idx, (location, names))| {
            let member_streets: Vec<String> =
                names.iter().map(|&i| streets[i as usize].name.clone()).collect();
            Intersection {
                int_id: (idx + 1) as u32,
                name: member_streets.join("&"),
                location,
                member_streets,
            }
        })
        .collect()
}
