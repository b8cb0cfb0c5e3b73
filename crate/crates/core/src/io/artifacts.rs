//! Prep artifact writers and readers. Every file carries the config digest
//! so downstream stages can refuse mismatched inputs.

use super::crashes::{parse_crash_fields, CRASH_HEADERS};
use super::{csv_open_error, DataError, RecordIssue};
use crate::config::RunConfig;
use crate::road_prep::{EnrichedCrash, Intersection, LabelKind, Street};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

const ENRICHED_EXTRA: [&str; 4] = ["SPATIAL_LABEL", "LABEL_KIND", "SEQUENCE", "SNAP_DIST"];

const DIGEST_PREFIX: &str = "# stvg-config-digest: ";

fn enriched_headers() -> Vec<String> {
    CRASH_HEADERS
        .iter()
        .map(|h| h.to_string())
        .chain(ENRICHED_EXTRA.iter().map(|h| h.to_string()))
        .collect()
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io { path: path.display().to_string(), source }
}

/// Writes snapped crashes as CSV: the input columns followed by the four
/// enrichment columns, preceded by a digest comment line.
pub fn write_enriched_csv(
    path: &Path,
    crashes: &[EnrichedCrash],
    cfg: &RunConfig,
) -> Result<(), DataError> {
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(file, "{DIGEST_PREFIX}{}", cfg.digest()).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(enriched_headers()).map_err(|e| csv_open_error(&path.display().to_string(), e))?;
    for c in crashes {
        let mut row = base_row(&c.crash, cfg).to_vec();
        row.extend([
            c.spatial_label.clone(),
            c.label_kind.as_str().to_string(),
            c.sequence.to_string(),
            c.snap_distance.to_string(),
        ]);
        w.write_record(&row).map_err(|e| csv_open_error(&path.display().to_string(), e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

fn base_row(r: &crate::road_prep::RawCrash, cfg: &RunConfig) -> [String; 16] {
    [
        r.crash_id.clone(),
        r.date.format(&cfg.date_format).to_string(),
        r.time.format("%H:%M:%S").to_string(),
        r.age.to_string(),
        r.hour_of_day.to_string(),
        r.day_of_week.to_string(),
        r.month_of_year.to_string(),
        r.year.to_string(),
        r.week_number.to_string(),
        r.fatalities.to_string(),
        r.injuries.to_string(),
        yes_no(r.alcohol_related),
        yes_no(r.distraction_related),
        r.weather.clone(),
        r.location.x.to_string(),
        r.location.y.to_string(),
    ]
}

fn yes_no(b: bool) -> String {
    if b { "Yes" } else { "No" }.to_string()
}

/// Writes raw crashes in the ingestion schema, e.g. for synthetic data.
/// The digest comment line is skipped by the reader, so the file feeds
/// straight back into [`super::read_crashes`].
pub fn write_crashes_csv(
    path: &Path,
    crashes: &[crate::road_prep::RawCrash],
    cfg: &RunConfig,
) -> Result<(), DataError> {
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(file, "{DIGEST_PREFIX}{}", cfg.digest()).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(CRASH_HEADERS).map_err(|e| csv_open_error(&path.display().to_string(), e))?;
    for r in crashes {
        w.write_record(base_row(r, cfg))
            .map_err(|e| csv_open_error(&path.display().to_string(), e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Reads an enriched CSV back, revalidating every field exactly as raw
/// ingestion does and checking the embedded digest against `cfg`.
pub fn read_enriched_csv(path: &Path, cfg: &RunConfig) -> Result<Vec<EnrichedCrash>, DataError> {
    let display = path.display().to_string();
    check_embedded_digest(path, cfg)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_open_error(&display, e))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::Format { path: display.clone(), reason: e.to_string() })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let want = enriched_headers();
    let missing: Vec<String> = want.iter().filter(|h| !headers.contains(h)).cloned().collect();
    let extra: Vec<String> = headers.iter().filter(|h| !want.contains(h)).cloned().collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(DataError::Schema { path: display, missing, extra });
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let base_cols: Vec<usize> = CRASH_HEADERS.iter().map(|h| col(h)).collect();
    let (label_col, kind_col, seq_col, dist_col) = (
        col("SPATIAL_LABEL"),
        col("LABEL_KIND"),
        col("SEQUENCE"),
        col("SNAP_DIST"),
    );

    let mut out = Vec::new();
    let mut issues = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 3;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                issues.push(RecordIssue { id: format!("row {line}"), reason: e.to_string() });
                continue;
            }
        };
        let rec_id = {
            let fid = row.get(base_cols[0]).unwrap_or("");
            if fid.is_empty() { format!("row {line}") } else { fid.to_string() }
        };
        match parse_enriched_row(&row, &base_cols, label_col, kind_col, seq_col, dist_col, cfg) {
            Ok(c) => out.push(c),
            Err(reason) => issues.push(RecordIssue { id: rec_id, reason }),
        }
    }
    if !issues.is_empty() {
        return Err(DataError::Records { path: display, issues });
    }
    Ok(out)
}

fn parse_enriched_row(
    row: &csv::StringRecord,
    base_cols: &[usize],
    label_col: usize,
    kind_col: usize,
    seq_col: usize,
    dist_col: usize,
    cfg: &RunConfig,
) -> Result<EnrichedCrash, String> {
    let crash = parse_crash_fields(row, base_cols, cfg)?;
    let spatial_label = row.get(label_col).unwrap_or("").to_string();
    if spatial_label.is_empty() {
        return Err("SPATIAL_LABEL is empty".to_string());
    }
    let kind_text = row.get(kind_col).unwrap_or("");
    let label_kind = match kind_text {
        "street" => LabelKind::Street,
        "intersection" => LabelKind::Intersection,
        other => return Err(format!("LABEL_KIND {other:?} is not street/intersection")),
    };
    let sequence: u64 = row
        .get(seq_col)
        .unwrap_or("")
        .parse()
        .map_err(|e| format!("SEQUENCE: {e}"))?;
    let snap_distance: f64 = row
        .get(dist_col)
        .unwrap_or("")
        .parse()
        .map_err(|e| format!("SNAP_DIST: {e}"))?;
    if !snap_distance.is_finite() || snap_distance < 0.0 {
        return Err(format!("SNAP_DIST {snap_distance} must be finite and nonnegative"));
    }
    Ok(EnrichedCrash { crash, spatial_label, label_kind, snap_distance, sequence })
}

/// The first line of an enriched CSV names the config it was produced
/// under; reading it with a different config is an error, not a warning.
fn check_embedded_digest(path: &Path, cfg: &RunConfig) -> Result<(), DataError> {
    let display = path.display().to_string();
    let text = super::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("");
    let Some(found) = first.strip_prefix(DIGEST_PREFIX) else {
        return Err(DataError::Format {
            path: display,
            reason: format!("first line must start with {DIGEST_PREFIX:?}"),
        });
    };
    let want = cfg.digest();
    if found.trim() != want {
        return Err(DataError::Format {
            path: display,
            reason: format!("config digest mismatch: file has {}, current config is {want}", found.trim()),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Provenance<T> {
    config_digest: String,
    #[serde(flatten)]
    payload: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StreetsDoc {
    streets: Vec<Street>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IntersectionsDoc {
    intersections: Vec<Intersection>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DataError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serialization");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, cfg: &RunConfig) -> Result<T, DataError> {
    let text = super::read_to_string(path)?;
    let doc: Provenance<T> = serde_json::from_str(&text).map_err(|e| DataError::Format {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let want = cfg.digest();
    if doc.config_digest != want {
        return Err(DataError::Format {
            path: path.display().to_string(),
            reason: format!(
                "config digest mismatch: file has {}, current config is {want}",
                doc.config_digest
            ),
        });
    }
    Ok(doc.payload)
}

pub fn write_streets_json(path: &Path, streets: &[Street], cfg: &RunConfig) -> Result<(), DataError> {
    write_json(
        path,
        &Provenance { config_digest: cfg.digest(), payload: StreetsDoc { streets: streets.to_vec() } },
    )
}

pub fn read_streets_json(path: &Path, cfg: &RunConfig) -> Result<Vec<Street>, DataError> {
    Ok(read_json::<StreetsDoc>(path, cfg)?.streets)
}

pub fn read_intersections_json(
    path: &Path,
    cfg: &RunConfig,
) -> Result<Vec<Intersection>, DataError> {
    Ok(read_json::<IntersectionsDoc>(path, cfg)?.intersections)
}

pub fn write_intersections_json(
    path: &Path,
    intersections: &[Intersection],
    cfg: &RunConfig,
) -> Result<(), DataError> {
    write_json(
        path,
        &Provenance {
            config_digest: cfg.digest(),
            payload: IntersectionsDoc { intersections: intersections.to_vec() },
        },
    )
}

/// Summary of one prep run: totals at each stage plus the ids of crashes
/// that could not be snapped to any network element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepReport {
    pub config_digest: String,
    pub roads_digest: String,
    pub crashes_digest: String,
    pub segments: usize,
    pub streets: usize,
    pub intersections: usize,
    pub lixels: usize,
    pub neighborhoods: usize,
    pub crashes_read: usize,
    pub enriched: usize,
    pub orphans: Vec<String>,
}

pub fn write_prep_report(path: &Path, report: &PrepReport) -> Result<(), DataError> {
    write_json(path, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Point, Polyline};
    use crate::road_prep::RawCrash;
    use chrono::{NaiveDate, NaiveTime};

    fn sample_crash(id: &str, kind: LabelKind, label: &str, seq: u64) -> EnrichedCrash {
        // 2014-03-05 is a Wednesday in ISO week 10.
        EnrichedCrash {
            crash: RawCrash {
                crash_id: id.to_string(),
                date: NaiveDate::from_ymd_opt(2014, 3, 5).unwrap(),
                time: NaiveTime::from_hms_opt(14, 30, 0).unwrap(),
                age: 42,
                hour_of_day: 14,
                day_of_week: 3,
                month_of_year: 3,
                year: 2014,
                week_number: 10,
                fatalities: 0,
                injuries: 1,
                alcohol_related: false,
                distraction_related: true,
                weather: "Clear".to_string(),
                location: Point::new(1234.5, 987.25),
            },
            spatial_label: label.to_string(),
            label_kind: kind,
            snap_distance: 3.75,
            sequence: seq,
        }
    }

    #[test]
    fn enriched_csv_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("enriched.csv");
        let cfg = RunConfig::default();
        let crashes = vec![
            sample_crash("C1", LabelKind::Street, "MAIN ST", 1),
            sample_crash("C2", LabelKind::Intersection, "17", 2),
        ];
        write_enriched_csv(&path, &crashes, &cfg).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(DIGEST_PREFIX));
        let back = read_enriched_csv(&path, &cfg).unwrap();
        assert_eq!(back, crashes);
    }

    #[test]
    fn digest_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("enriched.csv");
        let cfg = RunConfig::default();
        write_enriched_csv(&path, &[sample_crash("C1", LabelKind::Street, "A", 1)], &cfg).unwrap();
        let other = RunConfig { lixel_length: 25.0, ..RunConfig::default() };
        assert!(matches!(
            read_enriched_csv(&path, &other).unwrap_err(),
            DataError::Format { .. }
        ));
    }

    #[test]
    fn writes_are_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let cfg = RunConfig::default();
        let crashes = vec![sample_crash("C1", LabelKind::Street, "MAIN ST", 1)];
        write_enriched_csv(&a, &crashes, &cfg).unwrap();
        write_enriched_csv(&b, &crashes, &cfg).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn streets_json_carries_digest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("streets.json");
        let cfg = RunConfig::default();
        let streets = vec![Street {
            name: "MAIN ST".to_string(),
            parts: vec![Polyline::new(vec![Point::new(0.0, 0.0), Point::new(1000.0, 0.0)])],
            total_length: 1000.0,
        }];
        write_streets_json(&path, &streets, &cfg).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(doc["config_digest"].as_str().unwrap(), cfg.digest());
        assert_eq!(doc["streets"].as_array().unwrap().len(), 1);

        assert_eq!(read_streets_json(&path, &cfg).unwrap(), streets);
        let other = RunConfig::parse("lixel_length=20\n").unwrap();
        let err = read_streets_json(&path, &other).unwrap_err();
        assert!(err.to_string().contains("digest mismatch"), "{err}");
    }

    #[test]
    fn intersections_json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("intersections.json");
        let cfg = RunConfig::default();
        let ints = vec![Intersection {
            int_id: 1,
            name: "A&B".to_string(),
            location: Point::new(3.0, 4.0),
            member_streets: vec!["A".to_string(), "B".to_string()],
        }];
        write_intersections_json(&path, &ints, &cfg).unwrap();
        assert_eq!(read_intersections_json(&path, &cfg).unwrap(), ints);
    }

    #[test]
    fn prep_report_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let report = PrepReport {
            config_digest: "abc".to_string(),
            roads_digest: "r".to_string(),
            crashes_digest: "c".to_string(),
            segments: 10,
            streets: 4,
            intersections: 3,
            lixels: 40,
            neighborhoods: 43,
            crashes_read: 100,
            enriched: 98,
            orphans: vec!["C7".to_string(), "C9".to_string()],
        };
        write_prep_report(&path, &report).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(doc["enriched"].as_u64(), Some(98));
        assert_eq!(doc["orphans"][1].as_str(), Some("C9"));
    }
}
