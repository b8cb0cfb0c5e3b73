//! File ingestion and artifact emission.
//!
//! Readers are strict: schemas must match exactly, bad records fail loudly
//! with their identifiers, and coordinates that look geodetic are refused
//! because every downstream distance is in meters.

mod artifacts;
mod crashes;
mod roads;

pub use artifacts::{
    read_enriched_csv, read_intersections_json, read_streets_json, write_crashes_csv,
    write_enriched_csv, write_intersections_json, write_prep_report, write_streets_json,
    PrepReport,
};
pub use crashes::{read_crashes, CRASH_HEADERS};
pub use roads::read_roads;
pub(crate) use roads::csv_open_error;

use sha2::{Digest, Sha256};
use std::path::Path;

/// How many offending records an error message spells out.
const ISSUE_PREVIEW: usize = 20;

#[derive(Debug)]
pub struct RecordIssue {
    /// Crash id, segment id or line number, whichever identifies the record.
    pub id: String,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error("{path}: header mismatch; missing {missing:?}, unexpected {extra:?}")]
    Schema {
        path: String,
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("{path}: {} record(s) rejected: {}", issues.len(), preview_issues(issues))]
    Records {
        path: String,
        issues: Vec<RecordIssue>,
    },
    #[error(
        "{path}: all coordinates lie within +/-180; this looks like lon/lat, but a projected CRS in meters is required"
    )]
    GeodeticCoordinates { path: String },
}

fn preview_issues(issues: &[RecordIssue]) -> String {
    let shown: Vec<String> = issues
        .iter()
        .take(ISSUE_PREVIEW)
        .map(|i| format!("{} ({})", i.id, i.reason))
        .collect();
    if issues.len() > ISSUE_PREVIEW {
        format!("{}, ...", shown.join("; "))
    } else {
        shown.join("; ")
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Content digest of an input file, for build provenance.
pub fn file_digest(path: &Path) -> Result<String, DataError> {
    let bytes = std::fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
