use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty particle set")]
    EmptyParticleSet,

    #[error("invalid coordinates: particle {index} has a non-finite coordinate")]
    InvalidCoordinates { index: usize },

    #[error("invalid smoothing length {value} for particle {index}")]
    InvalidSmoothingLength { index: usize, value: f64 },

    #[error("unsupported dimension {0}, expected 2 or 3")]
    UnsupportedDimension(usize),

    #[error("malformed particle set: {0}")]
    MalformedParticleSet(String),

    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("particle outside cell")]
    ParticleOutsideCell,

    #[error("sub-cell coordinate {coord} out of range for branching factor {b}")]
    CellCoordOutOfRange { coord: u32, b: u32 },

    #[error("no subdivision needed: {n} particles fit a bucket of size {s}")]
    NoSubdivisionNeeded { n: usize, s: usize },

    #[error("invalid tree parameters: {0}")]
    InvalidParams(String),

    #[error("unknown particle {0}")]
    UnknownParticle(usize),

    #[error("particle set too small: {n} particles for {target} target neighbors")]
    TooFewParticles { n: usize, target: usize },

    #[error("particle {0} has more coincident partners than the target neighbor count")]
    CoincidentParticles(usize),

    #[error("particle count overflows the index type: {0}")]
    Overflow(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
