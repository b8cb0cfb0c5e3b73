//! `synth`: deterministic grid-city road and crash generator.

use super::{write_output, Ctx};
use crate::error::{write_failed, CliError};
use crate::lock;
use clap::Args;
use stvg_core::io;
use stvg_core::projection::TimeWindow;
use stvg_core::synth::{self, Hotspot, HotspotTarget, SyntheticSpec};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Horizontal streets in the grid.
    #[arg(long, default_value_t = 5)]
    pub rows: u32,
    /// Vertical streets in the grid.
    #[arg(long, default_value_t = 5)]
    pub cols: u32,
    /// Grid spacing in meters.
    #[arg(long, default_value_t = 100.0)]
    pub spacing: f64,
    /// Number of crashes to generate.
    #[arg(long, default_value_t = 1000)]
    pub count: u32,
    /// Year span FIRST:LAST inclusive, or a single year.
    #[arg(long, default_value = "2010:2015")]
    pub years: String,
    /// Probability a crash is alcohol-related.
    #[arg(long)]
    pub alcohol_p: Option<f64>,
    /// Probability a crash is distraction-related.
    #[arg(long)]
    pub distraction_p: Option<f64>,
    /// Probability a crash is fatal.
    #[arg(long)]
    pub fatality_p: Option<f64>,
    /// Weather vocabulary with weights, e.g. Clear:0.7,Cloudy:0.2,Rain:0.1.
    #[arg(long)]
    pub weather: Option<String>,
    /// Crash rate hotspot, repeatable. Semicolon-separated key=value pairs:
    /// int=ROW,COL or street=NAME, mult=FACTOR, optional window=WINDOW.
    #[arg(long = "hotspot")]
    pub hotspots: Vec<String>,
}

fn bad_spec(what: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid {what}: {detail}"))
}

fn parse_years(text: &str) -> Result<(i32, i32), CliError> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<i32>()
            .map_err(|_| bad_spec("year span", format!("{s:?} is not a year")))
    };
    match text.split_once(':') {
        Some((a, b)) => Ok((parse_one(a)?, parse_one(b)?)),
        None => {
            let y = parse_one(text)?;
            Ok((y, y))
        }
    }
}

fn parse_weather(text: &str) -> Result<Vec<(String, f64)>, CliError> {
    let mut weights = Vec::new();
    for part in text.split(',') {
        let (name, weight) = part
            .split_once(':')
            .ok_or_else(|| bad_spec("weather weights", format!("{part:?} is not NAME:WEIGHT")))?;
        let w: f64 = weight
            .trim()
            .parse()
            .map_err(|_| bad_spec("weather weights", format!("{weight:?} is not a number")))?;
        weights.push((name.trim().to_string(), w));
    }
    Ok(weights)
}

fn parse_hotspot(text: &str) -> Result<Hotspot, CliError> {
    let mut target: Option<HotspotTarget> = None;
    let mut multiplier: Option<f64> = None;
    let mut active: Option<TimeWindow> = None;
    for part in text.split(';') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad_spec("hotspot", format!("{part:?} is not key=value")))?;
        let value = value.trim();
        match key.trim() {
            "int" => {
                let (r, c) = value
                    .split_once(',')
                    .ok_or_else(|| bad_spec("hotspot", format!("int={value:?} wants ROW,COL")))?;
                let row = r
                    .trim()
                    .parse()
                    .map_err(|_| bad_spec("hotspot", format!("{r:?} is not a row index")))?;
                let col = c
                    .trim()
                    .parse()
                    .map_err(|_| bad_spec("hotspot", format!("{c:?} is not a column index")))?;
                target = Some(HotspotTarget::Intersection { row, col });
            }
            "street" => target = Some(HotspotTarget::Street { name: value.to_string() }),
            "mult" => {
                multiplier = Some(value.parse().map_err(|_| {
                    bad_spec("hotspot", format!("mult={value:?} is not a number"))
                })?)
            }
            "window" => active = Some(TimeWindow::parse(value)?),
            other => return Err(bad_spec("hotspot", format!("unknown key {other:?}"))),
        }
    }
    let target =
        target.ok_or_else(|| bad_spec("hotspot", "needs an int=ROW,COL or street=NAME part"))?;
    let multiplier = multiplier.ok_or_else(|| bad_spec("hotspot", "needs a mult=FACTOR part"))?;
    Ok(Hotspot { target, multiplier, active })
}

/// GeoJSON emitter shaped to feed straight back into `prep`: LineString
/// features with segment_id and name properties, plus the digest as a
/// foreign member.
fn roads_geojson(segments: &[stvg_core::road_prep::RoadSegment], digest: &str) -> String {
    let features: Vec<serde_json::Value> = segments
        .iter()
        .map(|seg| {
            let coords: Vec<serde_json::Value> = seg
                .geometry
                .vertices
                .iter()
                .map(|p| serde_json::json!([p.x, p.y]))
                .collect();
            serde_json::json!({
                "type": "Feature",
                "properties": { "segment_id": seg.segment_id, "name": seg.name },
                "geometry": { "type": "LineString", "coordinates": coords },
            })
        })
        .collect();
    let doc = serde_json::json!({
        "type": "FeatureCollection",
        "config_digest": digest,
        "features": features,
    });
    serde_json::to_string_pretty(&doc).expect("geojson serializes") + "\n"
}

pub fn run(ctx: &Ctx, args: &SynthArgs) -> Result<(), CliError> {
    let _lock = lock::acquire(&ctx.out)?;

    let defaults = SyntheticSpec::default();
    let (start_year, end_year) = parse_years(&args.years)?;
    let spec = SyntheticSpec {
        rows: args.rows,
        cols: args.cols,
        spacing: args.spacing,
        origin: defaults.origin,
        crash_count: args.count,
        start_year,
        end_year,
        hotspots: args
            .hotspots
            .iter()
            .map(|h| parse_hotspot(h))
            .collect::<Result<Vec<_>, _>>()?,
        alcohol_p: args.alcohol_p.unwrap_or(defaults.alcohol_p),
        distraction_p: args.distraction_p.unwrap_or(defaults.distraction_p),
        fatality_p: args.fatality_p.unwrap_or(defaults.fatality_p),
        weather_weights: match &args.weather {
            Some(text) => parse_weather(text)?,
            None => defaults.weather_weights,
        },
        seed: ctx.seed.unwrap_or(defaults.seed),
    };

    let dataset = synth::generate(&spec)?;

    let roads_path = ctx.out.join("roads.geojson");
    write_output(&roads_path, &roads_geojson(&dataset.segments, &ctx.cfg.digest()))?;
    let crashes_path = ctx.out.join("crashes.csv");
    io::write_crashes_csv(&crashes_path, &dataset.crashes, &ctx.cfg).map_err(write_failed)?;

    println!(
        "synth: {}x{} grid, {} segments, {} crashes over {start_year}:{end_year} (seed {})",
        spec.rows,
        spec.cols,
        dataset.segments.len(),
        dataset.crashes.len(),
        spec.seed
    );
    println!("synth: wrote {} and {}", roads_path.display(), crashes_path.display());
    Ok(())
}
