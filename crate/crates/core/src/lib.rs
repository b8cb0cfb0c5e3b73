//! Space-time road network graph engine for traffic crash analysis.
//!
//! The crate turns a road map and a crash table into a property graph that
//! links crashes to the streets and intersections they happened on, to each
//! other in time, to contributing factors, and to a calendar tree of hour
//! nodes. Time-windowed subgraphs of that graph are then scored with degree
//! and PageRank centrality to rank high-risk locations and to profile how
//! crash activity varies by hour, weekday, month or year.
//!
//! Everything is deterministic: identical inputs and configuration always
//! produce byte-identical artifacts, snapshots and reports.

pub mod config;
pub mod geom;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod projection;
pub mod road_prep;
pub mod synth;
