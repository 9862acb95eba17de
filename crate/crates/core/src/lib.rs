//! Desk-scale object-goal navigation: a deterministic grid world and the
//! mapping, prediction, fusion and planning stack that drives an agent in it.

pub mod config;
pub mod episode;
pub mod error;
pub mod fusion;
pub mod grid;
pub mod layered_map;
pub mod metrics;
pub mod planner;
pub mod prediction;
pub mod rays;
pub mod render;
pub mod scene_file;
pub mod scenegen;
pub mod snapshot;
pub mod suite;
pub mod value_map;
pub mod wire;
pub mod world;

pub use error::{Error, Result};
pub use grid::{BitLayer, CellCoord, ClassId, GridLayer};
