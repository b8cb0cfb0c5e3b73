//! Run configuration: the knobs that shape preparation, assembly and
//! metrics, parsed from plain `key=value` text and digested for provenance.
//!
//! The digest is a hash of the canonical serialized form. Two runs with the
//! same digest saw the same configuration, and every output file carries it.

use crate::metrics::{Convention, DanglingPolicy, PageRankConfig};
use crate::projection::Bands;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_DATE_FORMAT: &str = "%m/%d/%Y";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub lixel_length: f64,
    pub connectivity_radius: f64,
    pub dedup_epsilon: f64,
    pub date_format: String,
    pub weather_values: Vec<String>,
    pub bands: Bands,
    pub pagerank: PageRankConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lixel_length: 50.0,
            connectivity_radius: 15.0,
            dedup_epsilon: 1.0,
            date_format: DEFAULT_DATE_FORMAT.to_string(),
            weather_values: vec!["Clear".to_string(), "Cloudy".to_string(), "Rain".to_string()],
            bands: Bands::default(),
            pagerank: PageRankConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config line {line}: expected key=value, got {text:?}")]
    NotKeyValue { line: usize, text: String },
    #[error("config key {key:?} is not recognized")]
    UnknownKey { key: String },
    #[error("config key {key:?}: {reason}")]
    BadValue { key: String, reason: String },
    #[error("config invalid: {0}")]
    Invalid(String),
}

impl RunConfig {
    /// Applies `key=value` lines over the defaults. Blank lines and lines
    /// starting with `#` are ignored. Later keys override earlier ones.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::NotKeyValue {
                line: i + 1,
                text: line.to_string(),
            })?;
            cfg.apply(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |reason: String| ConfigError::BadValue { key: key.to_string(), reason };
        let parse_f64 = |v: &str| v.parse::<f64>().map_err(|e| bad(e.to_string()));
        let parse_u32 = |v: &str| v.parse::<u32>().map_err(|e| bad(e.to_string()));
        let parse_range = |v: &str| -> Result<(u32, u32), ConfigError> {
            let (a, b) = v
                .split_once('-')
                .ok_or_else(|| bad("expected FROM-TO hours".to_string()))?;
            Ok((
                a.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                b.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            ))
        };

        match key {
            "lixel_length" => self.lixel_length = parse_f64(value)?,
            "connectivity_radius" => self.connectivity_radius = parse_f64(value)?,
            "dedup_epsilon" => self.dedup_epsilon = parse_f64(value)?,
            "date_format" => self.date_format = value.to_string(),
            "weather_values" => {
                let values: Vec<String> = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if values.is_empty() {
                    return Err(bad("needs at least one value".to_string()));
                }
                self.weather_values = values;
            }
            "teen_band" => self.bands.teen = parse_range(value)?,
            "adult_band" => self.bands.adult = parse_range(value)?,
            "elderly_min" => self.bands.elderly_min = parse_u32(value)?,
            "morning_band" => self.bands.morning = parse_range(value)?,
            "afternoon_band" => self.bands.afternoon = parse_range(value)?,
            "night_band" => self.bands.night = parse_range(value)?,
            "pagerank_damping" => self.pagerank.damping = parse_f64(value)?,
            "pagerank_max_iterations" => self.pagerank.max_iterations = parse_u32(value)?,
            "pagerank_tolerance" => self.pagerank.tolerance = parse_f64(value)?,
            "pagerank_dangling" => {
                self.pagerank.dangling = match value.to_ascii_lowercase().as_str() {
                    "sink" => DanglingPolicy::Sink,
                    "redistribute" => DanglingPolicy::Redistribute,
                    other => return Err(bad(format!("unknown policy {other:?}"))),
                }
            }
            "pagerank_convention" => {
                self.pagerank.convention = match value.to_ascii_lowercase().as_str() {
                    "paper" => Convention::Paper,
                    "standard" => Convention::Standard,
                    other => return Err(bad(format!("unknown convention {other:?}"))),
                }
            }
            _ => return Err(ConfigError::UnknownKey { key: key.to_string() }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("lixel_length", self.lixel_length),
            ("connectivity_radius", self.connectivity_radius),
            ("dedup_epsilon", self.dedup_epsilon),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.date_format.trim().is_empty() {
            return Err(ConfigError::Invalid("date_format is empty".to_string()));
        }
        self.pagerank.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    /// Canonical serialization; digest input and human-readable provenance.
    pub fn canonical_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex digest identifying this configuration in every output file.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}
