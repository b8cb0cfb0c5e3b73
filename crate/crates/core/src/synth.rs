//! Synthetic grid-city generator: a rows x cols street grid plus seeded
//! random crashes, with optional hotspots that inflate the crash rate at a
//! chosen element during an optional time window.
//!
//! Placement is engineered around the snapping rules. Intersection crashes
//! sit exactly on the junction point, because only an exact distance tie
//! lets the intersection win against the two streets passing through it.
//! Street crashes keep at least `SNAP_MARGIN` of arc distance from every
//! junction and jitter strictly less than that, so the owning street is
//! always the nearest element.

use crate::geom::Point;
use crate::projection::TimeWindow;
use crate::road_prep::{RawCrash, RoadSegment};
use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Arc-distance margin kept between a street crash and any junction, in
/// meters. Jitter stays strictly below it.
const SNAP_MARGIN: f64 = 6.0;
const JITTER_MAX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub enum HotspotTarget {
    /// Grid intersection at (row, col), 0-based.
    Intersection { row: u32, col: u32 },
    /// A generated street by its exact name, e.g. "AVENUE 2".
    Street { name: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hotspot {
    pub target: HotspotTarget,
    pub multiplier: f64,
    /// When set, the multiplier applies only to crashes inside this window.
    pub active: Option<TimeWindow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Horizontal streets ("AVENUE 0" ..), one per grid row.
    pub rows: u32,
    /// Vertical streets ("STREET 0" ..), one per grid column.
    pub cols: u32,
    /// Grid spacing in meters.
    pub spacing: f64,
    /// South-west corner of the grid. Defaults keep all coordinates well
    /// outside the +/-180 band that trips the geodetic check.
    pub origin: Point,
    pub crash_count: u32,
    pub start_year: i32,
    pub end_year: i32,
    pub hotspots: Vec<Hotspot>,
    pub alcohol_p: f64,
    pub distraction_p: f64,
    pub fatality_p: f64,
    /// Weather vocabulary with sampling weights; names must match the run
    /// config vocabulary.
    pub weather_weights: Vec<(String, f64)>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            rows: 5,
            cols: 5,
            spacing: 100.0,
            origin: Point::new(1000.0, 1000.0),
            crash_count: 1000,
            start_year: 2010,
            end_year: 2015,
            hotspots: Vec::new(),
            alcohol_p: 0.08,
            distraction_p: 0.15,
            fatality_p: 0.02,
            weather_weights: vec![
                ("Clear".to_string(), 0.7),
                ("Cloudy".to_string(), 0.2),
                ("Rain".to_string(), 0.1),
            ],
            seed: 42,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("grid must be at least 2x2, got {rows}x{cols}")]
    GridTooSmall { rows: u32, cols: u32 },
    #[error("spacing must be positive and wide enough to jitter in ({0})")]
    BadSpacing(f64),
    #[error("{name} must be a probability in [0, 1], got {value}")]
    BadProbability { name: &'static str, value: f64 },
    #[error("weather weights must be nonnegative with a positive sum")]
    BadWeatherWeights,
    #[error("year span {start}..{end} is inverted")]
    InvertedYears { start: i32, end: i32 },
    #[error("hotspot targets intersection ({row}, {col}) outside the {rows}x{cols} grid")]
    HotspotOffGrid { row: u32, col: u32, rows: u32, cols: u32 },
    #[error("hotspot targets unknown street {name:?}")]
    HotspotUnknownStreet { name: String },
    #[error("hotspot multiplier must be positive, got {0}")]
    BadMultiplier(f64),
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.rows < 2 || self.cols < 2 {
            return Err(SynthError::GridTooSmall { rows: self.rows, cols: self.cols });
        }
        if !(self.spacing.is_finite() && self.spacing > 2.0 * SNAP_MARGIN) {
            return Err(SynthError::BadSpacing(self.spacing));
        }
        for (name, value) in [
            ("alcohol_p", self.alcohol_p),
            ("distraction_p", self.distraction_p),
            ("fatality_p", self.fatality_p),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::BadProbability { name, value });
            }
        }
        let sum: f64 = self.weather_weights.iter().map(|(_, w)| w).sum();
        if self.weather_weights.iter().any(|(_, w)| *w < 0.0) || sum <= 0.0 {
            return Err(SynthError::BadWeatherWeights);
        }
        if self.end_year < self.start_year {
            return Err(SynthError::InvertedYears { start: self.start_year, end: self.end_year });
        }
        for h in &self.hotspots {
            if h.multiplier <= 0.0 || !h.multiplier.is_finite() {
                return Err(SynthError::BadMultiplier(h.multiplier));
            }
            match &h.target {
                HotspotTarget::Intersection { row, col } => {
                    if *row >= self.rows || *col >= self.cols {
                        return Err(SynthError::HotspotOffGrid {
                            row: *row,
                            col: *col,
                            rows: self.rows,
                            cols: self.cols,
                        });
                    }
                }
                HotspotTarget::Street { name } => {
                    if self.street_index(name).is_none() {
                        return Err(SynthError::HotspotUnknownStreet { name: name.clone() });
                    }
                }
            }
        }
        Ok(())
    }

    fn street_index(&self, name: &str) -> Option<usize> {
        for i in 0..self.rows {
            if name == format!("AVENUE {i}") {
                return Some(i as usize);
            }
        }
        for j in 0..self.cols {
            if name == format!("STREET {j}") {
                return Some((self.rows + j) as usize);
            }
        }
        None
    }

    /// Location of grid intersection (row, col).
    pub fn junction(&self, row: u32, col: u32) -> Point {
        Point::new(
            self.origin.x + col as f64 * self.spacing,
            self.origin.y + row as f64 * self.spacing,
        )
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub segments: Vec<RoadSegment>,
    pub crashes: Vec<RawCrash>,
}

/// One sampleable network element with its base rate weight.
enum Element {
    /// Street index into the generated order, horizontal first.
    Street { index: usize },
    Junction { row: u32, col: u32 },
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticDataset, SynthError> {
    spec.validate()?;
    let segments = grid_segments(spec);

    let mut elements: Vec<(Element, f64)> = Vec::new();
    let h_len = (spec.cols - 1) as f64 * spec.spacing;
    let v_len = (spec.rows - 1) as f64 * spec.spacing;
    for i in 0..spec.rows as usize {
        elements.push((Element::Street { index: i }, h_len / spec.spacing));
    }
    for j in 0..spec.cols as usize {
        elements.push((Element::Street { index: spec.rows as usize + j }, v_len / spec.spacing));
    }
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            elements.push((Element::Junction { row, col }, 1.0));
        }
    }

    let start = NaiveDate::from_ymd_opt(spec.start_year, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    let end = NaiveDate::from_ymd_opt(spec.end_year, 12, 31)
        .unwrap()
        .and_hms_opt(23, 0, 0)
        .unwrap();
    let span_hours = (end - start).num_hours() + 1;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut crashes = Vec::with_capacity(spec.crash_count as usize);
    for n in 0..spec.crash_count {
        let hour = rng.random_range(0..span_hours);
        let ts = start + Duration::hours(hour);
        let ts = ts
            .with_minute(rng.random_range(0..60))
            .unwrap()
            .with_second(rng.random_range(0..60))
            .unwrap();

        let weights: Vec<f64> = elements
            .iter()
            .map(|(el, base)| base * rate_multiplier(spec, el, ts))
            .collect();
        let pick = weighted_choice(&mut rng, &weights);
        let location = place(spec, &elements[pick].0, &mut rng);

        let weather = {
            let w: Vec<f64> = spec.weather_weights.iter().map(|(_, w)| *w).collect();
            spec.weather_weights[weighted_choice(&mut rng, &w)].0.clone()
        };
        let date = ts.date();
        crashes.push(RawCrash {
            crash_id: format!("S{:06}", n + 1),
            date,
            time: ts.time(),
            age: rng.random_range(16..=90),
            hour_of_day: ts.time().hour(),
            day_of_week: date.weekday().number_from_monday(),
            month_of_year: date.month(),
            year: date.year(),
            week_number: date.iso_week().week(),
            fatalities: u32::from(rng.random_bool(spec.fatality_p)),
            injuries: if rng.random_bool(0.3) { rng.random_range(1..=2) } else { 0 },
            alcohol_related: rng.random_bool(spec.alcohol_p),
            distraction_related: rng.random_bool(spec.distraction_p),
            weather,
            location,
        });
    }
    Ok(SyntheticDataset { segments, crashes })
}

fn grid_segments(spec: &SyntheticSpec) -> Vec<RoadSegment> {
    let mut segments = Vec::new();
    let x0 = spec.origin.x;
    let y0 = spec.origin.y;
    let w = (spec.cols - 1) as f64 * spec.spacing;
    let h = (spec.rows - 1) as f64 * spec.spacing;
    for i in 0..spec.rows {
        let y = y0 + i as f64 * spec.spacing;
        segments.push(RoadSegment {
            segment_id: format!("h{i}"),
            name: format!("AVENUE {i}"),
            geometry: crate::geom::Polyline::new(vec![
                Point::new(x0, y),
                Point::new(x0 + w, y),
            ]),
        });
    }
    for j in 0..spec.cols {
        let x = x0 + j as f64 * spec.spacing;
        segments.push(RoadSegment {
            segment_id: format!("v{j}"),
            name: format!("STREET {j}"),
            geometry: crate::geom::Polyline::new(vec![
                Point::new(x, y0),
                Point::new(x, y0 + h),
            ]),
        });
    }
    segments
}

fn rate_multiplier(spec: &SyntheticSpec, el: &Element, ts: NaiveDateTime) -> f64 {
    let mut m = 1.0;
    for h in &spec.hotspots {
        let applies = match (&h.target, el) {
            (HotspotTarget::Intersection { row, col }, Element::Junction { row: r, col: c }) => {
                row == r && col == c
            }
            (HotspotTarget::Street { name }, Element::Street { index }) => {
                spec.street_index(name) == Some(*index)
            }
            _ => false,
        };
        if applies && h.active.as_ref().is_none_or(|w| w.covers(ts)) {
            m *= h.multiplier;
        }
    }
    m
}

fn weighted_choice(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

fn place(spec: &SyntheticSpec, el: &Element, rng: &mut ChaCha8Rng) -> Point {
    match el {
        Element::Junction { row, col } => spec.junction(*row, *col),
        Element::Street { index } => {
            let horizontal = *index < spec.rows as usize;
            // Pick a grid cell along the street, then an offset inside it
            // that stays SNAP_MARGIN away from both bounding junctions.
            let cells = if horizontal { spec.cols - 1 } else { spec.rows - 1 };
            let cell = rng.random_range(0..cells) as f64;
            let offset = rng.random_range(SNAP_MARGIN..(spec.spacing - SNAP_MARGIN));
            let arc = cell * spec.spacing + offset;
            let jitter = rng.random_range(-JITTER_MAX..JITTER_MAX);
            if horizontal {
                let y = spec.origin.y + *index as f64 * spec.spacing;
                Point::new(spec.origin.x + arc, y + jitter)
            } else {
                let j = *index - spec.rows as usize;
                let x = spec.origin.x + j as f64 * spec.spacing;
                Point::new(x + jitter, spec.origin.y + arc)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_reproduces_exactly() {
        let spec = SyntheticSpec { crash_count: 200, ..SyntheticSpec::default() };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.crashes, b.crashes);
        assert_eq!(a.segments.len(), b.segments.len());
    }

    #[test]
    fn grid_has_expected_streets() {
        let spec = SyntheticSpec { rows: 3, cols: 4, ..SyntheticSpec::default() };
        let out = generate(&spec).unwrap();
        assert_eq!(out.segments.len(), 7);
        assert_eq!(out.segments[0].name, "AVENUE 0");
        assert_eq!(out.segments[3].name, "STREET 0");
    }

    #[test]
    fn calendar_fields_agree_with_timestamps() {
        let spec = SyntheticSpec { crash_count: 300, ..SyntheticSpec::default() };
        let out = generate(&spec).unwrap();
        for c in &out.crashes {
            assert_eq!(c.hour_of_day, c.time.hour());
            assert_eq!(c.day_of_week, c.date.weekday().number_from_monday());
            assert_eq!(c.month_of_year, c.date.month());
            assert_eq!(c.year, c.date.year());
            assert_eq!(c.week_number, c.date.iso_week().week());
            assert!(c.year >= 2010 && c.year <= 2015);
        }
    }

    #[test]
    fn hotspot_multiplier_shifts_crash_mass() {
        // 10x at one junction; its share should be well above a cold one's.
        let spec = SyntheticSpec {
            crash_count: 4000,
            hotspots: vec![Hotspot {
                target: HotspotTarget::Intersection { row: 2, col: 2 },
                multiplier: 10.0,
                active: None,
            }],
            ..SyntheticSpec::default()
        };
        let out = generate(&spec).unwrap();
        let hot = spec.junction(2, 2);
        let cold = spec.junction(0, 0);
        let at = |p: &Point| out.crashes.iter().filter(|c| c.location.dist(p) < 1e-9).count();
        let hot_n = at(&hot);
        let cold_n = at(&cold);
        assert!(hot_n > 5 * cold_n.max(1), "hot {hot_n} vs cold {cold_n}");
    }

    #[test]
    fn windowed_hotspot_is_cold_outside_its_window() {
        let spec = SyntheticSpec {
            crash_count: 6000,
            hotspots: vec![Hotspot {
                target: HotspotTarget::Intersection { row: 1, col: 1 },
                multiplier: 10.0,
                active: Some(TimeWindow::from_years(2013, 2013)),
            }],
            ..SyntheticSpec::default()
        };
        let out = generate(&spec).unwrap();
        let hot = spec.junction(1, 1);
        let inside = out
            .crashes
            .iter()
            .filter(|c| c.year == 2013 && c.location.dist(&hot) < 1e-9)
            .count();
        let outside = out
            .crashes
            .iter()
            .filter(|c| c.year == 2010 && c.location.dist(&hot) < 1e-9)
            .count();
        assert!(inside > 3 * outside.max(1), "inside {inside} vs outside {outside}");
    }

    #[test]
    fn off_grid_hotspot_is_rejected() {
        let spec = SyntheticSpec {
            hotspots: vec![Hotspot {
                target: HotspotTarget::Intersection { row: 9, col: 0 },
                multiplier: 2.0,
                active: None,
            }],
            ..SyntheticSpec::default()
        };
        assert!(matches!(generate(&spec), Err(SynthError::HotspotOffGrid { .. })));
    }
}
