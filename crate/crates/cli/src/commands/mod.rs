//! Shared context and argument plumbing for the subcommands.

pub mod build;
pub mod dump;
pub mod fatality;
pub mod prep;
pub mod profile;
pub mod rank;
pub mod synth;

use crate::error::{write_failed, CliError};
use clap::{Args, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};
use stvg_core::config::RunConfig;
use stvg_core::graph::{snapshot, StvgGraph};
use stvg_core::metrics::TargetClass;
use stvg_core::projection::{
    AgeBand, CrashFilter, DayClass, HourBand, SweepGranularity, TimeWindow,
};

/// First line of every CSV report, mirrored in JSON and SVG outputs, so a
/// consumer can always tell which configuration produced a file.
pub const DIGEST_PREFIX: &str = "# stvg-config-digest: ";

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl Ctx {
    /// Builds the run context. Config problems are usage errors: the file
    /// was named on the command line, so a bad path or bad contents mean
    /// the invocation itself is wrong.
    pub fn new(config: Option<&Path>, out: PathBuf, seed: Option<u64>) -> Result<Self, CliError> {
        let cfg = match config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        Ok(Ctx { cfg, out, seed })
    }

    pub fn snapshot_path(&self, flag: &Option<PathBuf>) -> PathBuf {
        flag.clone().unwrap_or_else(|| self.out.join("graph.stvg"))
    }
}

pub fn load_snapshot(path: &Path) -> Result<StvgGraph, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("cannot read snapshot {}: {e}", path.display())))?;
    Ok(snapshot::load(std::io::BufReader::new(file))?)
}

/// The window an analysis runs over when none is given: the whole span the
/// graph's time tree covers.
pub fn full_span(graph: &StvgGraph) -> TimeWindow {
    let (start, end) = graph.tree().span;
    TimeWindow { start, end }
}

pub fn parse_window(arg: Option<&str>, graph: &StvgGraph) -> Result<TimeWindow, CliError> {
    match arg {
        Some(text) => Ok(TimeWindow::parse(text)?),
        None => Ok(full_span(graph)),
    }
}

pub fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| write_failed(format!("cannot write {}: {e}", path.display())))
}

/// CSV body writer that prepends the digest comment line, matching the
/// artifact files the prep stage emits.
pub fn csv_with_digest(cfg: &RunConfig, rows: &[Vec<String>]) -> String {
    let mut out = format!("{DIGEST_PREFIX}{}\n", cfg.digest());
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("csv write to memory");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8"));
    out
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassArg {
    Street,
    Intersection,
}

impl From<ClassArg> for TargetClass {
    fn from(v: ClassArg) -> Self {
        match v {
            ClassArg::Street => TargetClass::Street,
            ClassArg::Intersection => TargetClass::Intersection,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricArg {
    Degree,
    Pagerank,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GranularityArg {
    Hour,
    Day,
    Month,
    Year,
}

impl GranularityArg {
    pub fn as_str(&self) -> &'static str {
        match self {
            GranularityArg::Hour => "hour",
            GranularityArg::Day => "day",
            GranularityArg::Month => "month",
            GranularityArg::Year => "year",
        }
    }
}

impl From<GranularityArg> for SweepGranularity {
    fn from(v: GranularityArg) -> Self {
        match v {
            GranularityArg::Hour => SweepGranularity::HourOfDay,
            GranularityArg::Day => SweepGranularity::DayOfWeek,
            GranularityArg::Month => SweepGranularity::Month,
            GranularityArg::Year => SweepGranularity::Year,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgeBandArg {
    Teen,
    Adult,
    Elderly,
}

impl From<AgeBandArg> for AgeBand {
    fn from(v: AgeBandArg) -> Self {
        match v {
            AgeBandArg::Teen => AgeBand::Teen,
            AgeBandArg::Adult => AgeBand::Adult,
            AgeBandArg::Elderly => AgeBand::Elderly,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayClassArg {
    Weekday,
    Weekend,
}

impl From<DayClassArg> for DayClass {
    fn from(v: DayClassArg) -> Self {
        match v {
            DayClassArg::Weekday => DayClass::Weekday,
            DayClassArg::Weekend => DayClass::Weekend,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum HourBandArg {
    Morning,
    Afternoon,
    Night,
}

impl From<HourBandArg> for HourBand {
    fn from(v: HourBandArg) -> Self {
        match v {
            HourBandArg::Morning => HourBand::Morning,
            HourBandArg::Afternoon => HourBand::Afternoon,
            HourBandArg::Night => HourBand::Night,
        }
    }
}

/// Crash predicates shared by every analysis command.
#[derive(Args, Debug, Clone)]
pub struct FilterArgs {
    /// Keep only alcohol-related crashes.
    #[arg(long)]
    pub alcohol: bool,
    /// Keep only distraction-related crashes.
    #[arg(long)]
    pub distraction: bool,
    /// Keep only crashes under this weather value (case-insensitive).
    #[arg(long)]
    pub weather: Option<String>,
    /// Keep only crashes with at least one fatality.
    #[arg(long)]
    pub fatal: bool,
    /// Keep only drivers inside this age band.
    #[arg(long, value_enum)]
    pub age_band: Option<AgeBandArg>,
    /// Keep only weekday or weekend crashes.
    #[arg(long, value_enum)]
    pub day_class: Option<DayClassArg>,
    /// Keep only crashes inside this hour band.
    #[arg(long, value_enum)]
    pub hour_band: Option<HourBandArg>,
}

impl FilterArgs {
    /// Validates against the configured weather vocabulary so a typo fails
    /// loudly instead of silently matching nothing.
    pub fn to_filter(&self, cfg: &RunConfig) -> Result<CrashFilter, CliError> {
        let weather = match &self.weather {
            Some(w) => {
                let canonical = cfg
                    .weather_values
                    .iter()
                    .find(|v| v.eq_ignore_ascii_case(w))
                    .ok_or_else(|| {
                        CliError::Usage(format!(
                            "unknown weather value {w:?}; configured vocabulary is {}",
                            cfg.weather_values.join(", ")
                        ))
                    })?;
                Some(canonical.clone())
            }
            None => None,
        };
        Ok(CrashFilter {
            alcohol: self.alcohol,
            distraction: self.distraction,
            weather,
            fatalities_only: self.fatal,
            age_band: self.age_band.map(Into::into),
            day_class: self.day_class.map(Into::into),
            hour_band: self.hour_band.map(Into::into),
        })
    }
}
