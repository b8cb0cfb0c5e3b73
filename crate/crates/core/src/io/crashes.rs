//! Crash record ingestion: strict schema, typed parsing, calendar checks.

use super::{csv_open_error, DataError, RecordIssue};
use crate::config::RunConfig;
use crate::geom::Point;
use crate::road_prep::RawCrash;
use chrono::{Datelike, NaiveDate, NaiveTime, Timelike};
use std::path::Path;

/// The exact header set a crash CSV must carry, in canonical order.
pub const CRASH_HEADERS: [&str; 16] = [
    "FID",
    "Crash_DT",
    "Crash_TM",
    "Age",
    "Crash_HOD",
    "Crash_DOW",
    "Crash_MOY",
    "Crash_Y",
    "Crash_WK",
    "Fatalities",
    "Injury",
    "Alcohol_Related",
    "Distraction_Related",
    "Weather_Condition",
    "X",
    "Y",
];

/// Reads and validates a crash CSV. The header set must match
/// [`CRASH_HEADERS`] exactly (order is free); every row must parse and be
/// internally consistent, otherwise the whole file is rejected with a
/// per-record issue list.
pub fn read_crashes(path: &Path, cfg: &RunConfig) -> Result<Vec<RawCrash>, DataError> {
    let display = path.display().to_string();
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
    let missing: Vec<String> = CRASH_HEADERS
        .iter()
        .filter(|h| !headers.iter().any(|g| g == *h))
        .map(|h| h.to_string())
        .collect();
    let extra: Vec<String> = headers
        .iter()
        .filter(|h| !CRASH_HEADERS.contains(&h.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(DataError::Schema { path: display, missing, extra });
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let cols: Vec<usize> = CRASH_HEADERS.iter().map(|h| col(h)).collect();

    let mut crashes = Vec::new();
    let mut issues = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                issues.push(RecordIssue { id: format!("row {line}"), reason: e.to_string() });
                continue;
            }
        };
        let field = |slot: usize| row.get(cols[slot]).unwrap_or("");
        let rec_id = if field(0).is_empty() {
            format!("row {line}")
        } else {
            field(0).to_string()
        };
        match parse_crash_fields(&row, &cols, cfg) {
            Ok(crash) => crashes.push(crash),
            Err(reason) => issues.push(RecordIssue { id: rec_id, reason }),
        }
    }
    if !issues.is_empty() {
        return Err(DataError::Records { path: display, issues });
    }
    reject_geodetic(&display, &crashes)?;
    Ok(crashes)
}

fn reject_geodetic(path: &str, crashes: &[RawCrash]) -> Result<(), DataError> {
    if !crashes.is_empty()
        && crashes
            .iter()
            .all(|c| c.location.x.abs() <= 180.0 && c.location.y.abs() <= 180.0)
    {
        return Err(DataError::GeodeticCoordinates { path: path.to_string() });
    }
    Ok(())
}

/// Parses the sixteen base columns of one row. `cols` maps each
/// [`CRASH_HEADERS`] slot to its position in the record.
pub(super) fn parse_crash_fields(
    row: &csv::StringRecord,
    cols: &[usize],
    cfg: &RunConfig,
) -> Result<RawCrash, String> {
    let field = |slot: usize| row.get(cols[slot]).unwrap_or("");

    let crash_id = field(0).to_string();
    if crash_id.is_empty() {
        return Err("FID is empty".to_string());
    }
    let date = NaiveDate::parse_from_str(field(1), &cfg.date_format)
        .map_err(|e| format!("Crash_DT {:?} does not match {}: {e}", field(1), cfg.date_format))?;
    let time = parse_time(field(2))?;
    let age: u32 = parse_num(field(3), "Age")?;
    let hour_of_day: u32 = parse_num(field(4), "Crash_HOD")?;
    if hour_of_day > 23 {
        return Err(format!("Crash_HOD {hour_of_day} out of range 0-23"));
    }
    let day_of_week = parse_day_of_week(field(5))?;
    let month_of_year: u32 = parse_num(field(6), "Crash_MOY")?;
    if !(1..=12).contains(&month_of_year) {
        return Err(format!("Crash_MOY {month_of_year} out of range 1-12"));
    }
    let year: i32 = parse_num(field(7), "Crash_Y")?;
    let week_number: u32 = parse_num(field(8), "Crash_WK")?;
    let fatalities: u32 = parse_num(field(9), "Fatalities")?;
    let injuries: u32 = parse_num(field(10), "Injury")?;
    let alcohol_related = parse_bool(field(11), "Alcohol_Related")?;
    let distraction_related = parse_bool(field(12), "Distraction_Related")?;
    let weather = canonical_weather(field(13), &cfg.weather_values)?;
    let x: f64 = parse_num(field(14), "X")?;
    let y: f64 = parse_num(field(15), "Y")?;
    if !x.is_finite() || !y.is_finite() {
        return Err("X/Y must be finite".to_string());
    }

    check_calendar(date, time, hour_of_day, day_of_week, month_of_year, year, week_number)?;

    Ok(RawCrash {
        crash_id,
        date,
        time,
        age,
        hour_of_day,
        day_of_week,
        month_of_year,
        year,
        week_number,
        fatalities,
        injuries,
        alcohol_related,
        distraction_related,
        weather,
        location: Point::new(x, y),
    })
}

/// The redundant calendar columns must agree with the parsed date and time;
/// a mismatch means the row was corrupted or the date format is wrong.
fn check_calendar(
    date: NaiveDate,
    time: NaiveTime,
    hod: u32,
    dow: u32,
    moy: u32,
    year: i32,
    week: u32,
) -> Result<(), String> {
    if hod != time.hour() {
        return Err(format!("Crash_HOD {hod} disagrees with Crash_TM hour {}", time.hour()));
    }
    let want_dow = date.weekday().number_from_monday();
    if dow != want_dow {
        return Err(format!("Crash_DOW {dow} disagrees with Crash_DT weekday {want_dow}"));
    }
    if moy != date.month() {
        return Err(format!("Crash_MOY {moy} disagrees with Crash_DT month {}", date.month()));
    }
    if year != date.year() {
        return Err(format!("Crash_Y {year} disagrees with Crash_DT year {}", date.year()));
    }
    let want_week = date.iso_week().week();
    if week != want_week {
        return Err(format!("Crash_WK {week} disagrees with Crash_DT ISO week {want_week}"));
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(text: &str, name: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    text.parse::<T>().map_err(|e| format!("{name} {text:?}: {e}"))
}

fn parse_time(text: &str) -> Result<NaiveTime, String> {
    NaiveTime::parse_from_str(text, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(text, "%H:%M"))
        .map_err(|_| format!("Crash_TM {text:?} is not HH:MM[:SS]"))
}

fn parse_day_of_week(text: &str) -> Result<u32, String> {
    if let Ok(n) = text.parse::<u32>() {
        if (1..=7).contains(&n) {
            return Ok(n);
        }
        return Err(format!("Crash_DOW {n} out of range 1-7"));
    }
    let prefix: String = text.chars().take(3).collect::<String>().to_ascii_lowercase();
    match prefix.as_str() {
        "mon" => Ok(1),
        "tue" => Ok(2),
        "wed" => Ok(3),
        "thu" => Ok(4),
        "fri" => Ok(5),
        "sat" => Ok(6),
        "sun" => Ok(7),
        _ => Err(format!("Crash_DOW {text:?} is neither 1-7 nor a day name")),
    }
}

fn parse_bool(text: &str, name: &str) -> Result<bool, String> {
    match text.to_ascii_lowercase().as_str() {
        "yes" | "y" | "true" | "1" => Ok(true),
        "no" | "n" | "false" | "0" => Ok(false),
        _ => Err(format!("{name} {text:?} is not a yes/no value")),
    }
}

/// Case-insensitive match into the configured weather vocabulary, returning
/// the vocabulary's canonical casing.
fn canonical_weather(text: &str, vocabulary: &[String]) -> Result<String, String> {
    vocabulary
        .iter()
        .find(|v| v.eq_ignore_ascii_case(text))
        .cloned()
        .ok_or_else(|| {
            format!("Weather_Condition {text:?} not in vocabulary [{}]", vocabulary.join(", "))
        })
}
