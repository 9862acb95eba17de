use thiserror::Error;

use crate::grid::CellCoord;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside [0, 1]")]
    ConfidenceOutOfRange { name: &'static str, value: f64 },

    #[error("{name} = {value} must be non-negative")]
    Negative { name: &'static str, value: f64 },

    #[error("cell ({}, {}) is outside the {width}x{height} grid", .cell.x, .cell.y)]
    OutOfBounds { cell: CellCoord, width: usize, height: usize },

    #[error("class id {0} is not in the scene object list")]
    UnknownClass(u16),

    #[error("layer dimensions {got:?} do not match {expected:?}")]
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },

    #[error("field of view contains no cells")]
    EmptyFov,

    #[error("distance map needs at least one predicted target")]
    NoTargets,

    #[error("start cell ({}, {}) is occupied", .0.x, .0.y)]
    StartOccupied(CellCoord),

    #[error("optimal path length must be positive, got {0}")]
    NonPositiveOptimal(f64),

    #[error("scene parse error at line {line}: {msg}")]
    SceneParse { line: usize, msg: String },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("snapshot parse error: {0}")]
    Snapshot(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("wire protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ConfidenceOutOfRange { name, value })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Negative { name, value })
    }
}
