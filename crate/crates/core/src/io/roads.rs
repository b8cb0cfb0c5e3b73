//! Road geometry readers: GeoJSON FeatureCollection or CSV with WKT lines.

use super::{DataError, RecordIssue};
use crate::geom::{Point, Polyline};
use crate::road_prep::RoadSegment;
use std::path::Path;

/// Reads road segments, dispatching on the file extension: `.geojson` and
/// `.json` parse as GeoJSON, `.csv` as `segment_id,name,wkt` rows.
pub fn read_roads(path: &Path) -> Result<Vec<RoadSegment>, DataError> {
    let display = path.display().to_string();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let segments = match ext.as_str() {
        "geojson" | "json" => read_geojson(path)?,
        "csv" => read_wkt_csv(path)?,
        other => {
            return Err(DataError::Format {
                path: display,
                reason: format!(
                    "unsupported road file extension {other:?}; expected .geojson, .json or .csv"
                ),
            })
        }
    };
    reject_geodetic(&display, &segments)?;
    Ok(segments)
}

/// Every coordinate inside +/-180 means the file is almost certainly
/// lon/lat; meters-based parameters would be nonsense against it.
fn reject_geodetic(path: &str, segments: &[RoadSegment]) -> Result<(), DataError> {
    let mut any = false;
    for seg in segments {
        for v in &seg.geometry.vertices {
            any = true;
            if v.x.abs() > 180.0 || v.y.abs() > 180.0 {
                return Ok(());
            }
        }
    }
    if any {
        return Err(DataError::GeodeticCoordinates { path: path.to_string() });
    }
    Ok(())
}

fn read_geojson(path: &Path) -> Result<Vec<RoadSegment>, DataError> {
    let display = path.display().to_string();
    let text = super::read_to_string(path)?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| DataError::Format {
        path: display.clone(),
        reason: format!("invalid JSON: {e}"),
    })?;
    let features = doc
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or_else(|| DataError::Format {
            path: display.clone(),
            reason: "expected a FeatureCollection with a \"features\" array".to_string(),
        })?;

    let mut segments = Vec::new();
    let mut issues: Vec<RecordIssue> = Vec::new();

    for (idx, feature) in features.iter().enumerate() {
        let feature_id = feature
            .pointer("/properties/segment_id")
            .map(json_as_text)
            .unwrap_or_else(|| format!("f{idx}"));
        let mut fail = |reason: String| {
            issues.push(RecordIssue { id: feature_id.clone(), reason });
        };

        let name = match feature.pointer("/properties/name").and_then(|v| v.as_str()) {
            Some(n) => n.to_string(),
            None => {
                fail("feature has no string \"name\" property".to_string());
                continue;
            }
        };
        let geom_type = feature.pointer("/geometry/type").and_then(|v| v.as_str());
        let coords = feature.pointer("/geometry/coordinates");
        match (geom_type, coords) {
            (Some("LineString"), Some(c)) => match coords_to_polyline(c) {
                Ok(line) => segments.push(RoadSegment {
                    segment_id: feature_id.clone(),
                    name,
                    geometry: line,
                }),
                Err(reason) => fail(reason),
            },
            (Some("MultiLineString"), Some(c)) => {
                let parts = match c.as_array() {
                    Some(p) => p,
                    None => {
                        fail("MultiLineString coordinates are not an array".to_string());
                        continue;
                    }
                };
                for (k, part) in parts.iter().enumerate() {
                    match coords_to_polyline(part) {
                        Ok(line) => segments.push(RoadSegment {
                            segment_id: format!("{feature_id}.{k}"),
                            name: name.clone(),
                            geometry: line,
                        }),
                        Err(reason) => fail(format!("component {k}: {reason}")),
                    }
                }
            }
            (Some(other), _) => fail(format!("unsupported geometry type {other:?}")),
            (None, _) => fail("feature has no geometry type".to_string()),
        }
    }

    if !issues.is_empty() {
        return Err(DataError::Records { path: display, issues });
    }
    Ok(segments)
}

fn json_as_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn coords_to_polyline(coords: &serde_json::Value) -> Result<Polyline, String> {
    let arr = coords.as_array().ok_or("coordinates are not an array")?;
    let mut vertices = Vec::with_capacity(arr.len());
    for (i, pos) in arr.iter().enumerate() {
        let pair = pos.as_array().ok_or_else(|| format!("position {i} is not an array"))?;
        if pair.len() < 2 {
            return Err(format!("position {i} has fewer than 2 ordinates"));
        }
        let x = pair[0].as_f64().ok_or_else(|| format!("position {i} x is not a number"))?;
        let y = pair[1].as_f64().ok_or_else(|| format!("position {i} y is not a number"))?;
        vertices.push(Point::new(x, y));
    }
    let line = Polyline::new(vertices);
    line.validate().map_err(|f| f.to_string())?;
    Ok(line)
}

const ROAD_CSV_HEADERS: [&str; 3] = ["segment_id", "name", "wkt"];

fn read_wkt_csv(path: &Path) -> Result<Vec<RoadSegment>, DataError> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_open_error(&display, e))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::Format { path: display.clone(), reason: e.to_string() })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let missing: Vec<String> = ROAD_CSV_HEADERS
        .iter()
        .filter(|h| !headers.iter().any(|g| g == *h))
        .map(|h| h.to_string())
        .collect();
    let extra: Vec<String> = headers
        .iter()
        .filter(|h| !ROAD_CSV_HEADERS.contains(&h.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(DataError::Schema { path: display, missing, extra });
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (id_col, name_col, wkt_col) = (col("segment_id"), col("name"), col("wkt"));

    let mut segments = Vec::new();
    let mut issues = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                issues.push(RecordIssue { id: format!("row {}", i + 2), reason: e.to_string() });
                continue;
            }
        };
        let id = row.get(id_col).unwrap_or("").trim().to_string();
        let rec_id = if id.is_empty() { format!("row {}", i + 2) } else { id.clone() };
        match parse_wkt_linestring(row.get(wkt_col).unwrap_or("")) {
            Ok(line) => segments.push(RoadSegment {
                segment_id: id,
                name: row.get(name_col).unwrap_or("").to_string(),
                geometry: line,
            }),
            Err(reason) => issues.push(RecordIssue { id: rec_id, reason }),
        }
    }
    if !issues.is_empty() {
        return Err(DataError::Records { path: display, issues });
    }
    Ok(segments)
}

pub(crate) fn csv_open_error(path: &str, e: csv::Error) -> DataError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => DataError::Io { path: path.to_string(), source },
        other => DataError::Format { path: path.to_string(), reason: format!("{other:?}") },
    }
}

/// Parses `LINESTRING (x y, x y, ...)`. Only the LINESTRING form is
/// accepted; anything else in a road file is a data problem to surface.
fn parse_wkt_linestring(text: &str) -> Result<Polyline, String> {
    let trimmed = text.trim();
    let upper = trimmed.to_ascii_uppercase();
    if !upper.starts_with("LINESTRING") {
        return Err(format!("expected WKT LINESTRING, got {:?}", clip(trimmed)));
    }
    let rest = trimmed["LINESTRING".len()..].trim_start();
    if !rest.starts_with('(') || !rest.ends_with(')') {
        return Err("LINESTRING body must be parenthesized".to_string());
    }
    let body = &rest[1..rest.len() - 1];
    let mut vertices = Vec::new();
    for (i, pair) in body.split(',').enumerate() {
        let mut nums = pair.split_whitespace();
        let x = nums
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| format!("coordinate {i} has no numeric x"))?;
        let y = nums
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| format!("coordinate {i} has no numeric y"))?;
        if nums.next().is_some() {
            return Err(format!("coordinate {i} has more than two ordinates"));
        }
        vertices.push(Point::new(x, y));
    }
    let line = Polyline::new(vertices);
    line.validate().map_err(|f| f.to_string())?;
    Ok(line)
}

fn clip(s: &str) -> String {
    if s.len() > 40 {
        format!("{}...", &s[..40])
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn geojson_linestring_and_multilinestring() {
        let doc = r#"{
            "type": "FeatureCollection",
            "features": [
                {"type": "Feature",
                 "properties": {"name": "Main St", "segment_id": "a1"},
                 "geometry": {"type": "LineString", "coordinates": [[1000.0, 2000.0], [1100.0, 2000.0]]}},
                {"type": "Feature",
                 "properties": {"name": "Split Rd"},
                 "geometry": {"type": "MultiLineString",
                              "coordinates": [[[0.0, 500.0], [10.0, 500.0]],
                                              [[20.0, 500.0], [30.0, 500.0]]]}}
            ]
        }"#;
        let (_dir, path) = write_temp("roads.geojson", doc);
        let segs = read_roads(&path).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0].segment_id, "a1");
        assert_eq!(segs[1].segment_id, "f1.0");
        assert_eq!(segs[2].segment_id, "f1.1");
        assert_eq!(segs[1].name, "Split Rd");
    }

    #[test]
    fn geojson_without_name_fails_naming_the_feature() {
        let doc = r#"{"features": [
            {"properties": {"segment_id": "s7"},
             "geometry": {"type": "LineString", "coordinates": [[0.0, 0.0], [1000.0, 0.0]]}}
        ]}"#;
        let (_dir, path) = write_temp("roads.geojson", doc);
        let err = read_roads(&path).unwrap_err();
        match err {
            DataError::Records { issues, .. } => {
                assert_eq!(issues.len(), 1);
                assert_eq!(issues[0].id, "s7");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn wkt_csv_round_trip() {
        let csv = "segment_id,name,wkt\n\
                   s1,Elm Ave,\"LINESTRING (0 1000, 500 1000)\"\n\
                   s2,Oak St,\"LINESTRING (250 800, 250 1200, 260 1300)\"\n";
        let (_dir, path) = write_temp("roads.csv", csv);
        let segs = read_roads(&path).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[1].geometry.vertices.len(), 3);
    }

    #[test]
    fn wkt_csv_schema_mismatch_names_columns() {
        let csv = "segment_id,street,wkt\ns1,A,\"LINESTRING (0 0, 1 1)\"\n";
        let (_dir, path) = write_temp("roads.csv", csv);
        match read_roads(&path).unwrap_err() {
            DataError::Schema { missing, extra, .. } => {
                assert_eq!(missing, vec!["name"]);
                assert_eq!(extra, vec!["street"]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_wkt_is_a_record_error() {
        let csv = "segment_id,name,wkt\ns1,A,\"POINT (1 2)\"\n";
        let (_dir, path) = write_temp("roads.csv", csv);
        assert!(matches!(read_roads(&path).unwrap_err(), DataError::Records { .. }));
    }

    #[test]
    fn lonlat_looking_coordinates_are_refused() {
        let csv = "segment_id,name,wkt\ns1,A,\"LINESTRING (-80.6 28.1, -80.5 28.2)\"\n";
        let (_dir, path) = write_temp("roads.csv", csv);
        assert!(matches!(
            read_roads(&path).unwrap_err(),
            DataError::GeodeticCoordinates { .. }
        ));
    }
}
