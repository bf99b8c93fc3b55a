use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("z = {z} lies outside [0, {length}]")]
    Domain { z: f64, length: f64 },

    #[error("overlapping damping pieces: gamma = {gamma} must be below 1/4")]
    Overlap { gamma: f64 },

    #[error("Taylor expansion invalid at z = {z}: Re*(1 - z/L) = {remainder} is not below 1")]
    Validity { z: f64, remainder: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate:e}")]
    Integration { a: f64, b: f64, estimate: f64 },

    #[error("ratio undefined: gradient norm vanishes")]
    UndefinedRatio,

    #[error("samples out of order: t = {next} does not follow t = {last}")]
    Sequencing { last: f64, next: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("time step underflow: dt = {dt:e} at t = {time}")]
    Stability { dt: f64, time: f64 },

    #[error("projection failed: relative divergence {divergence:e} exceeds {tolerance:e}")]
    Projection { divergence: f64, tolerance: f64 },

    #[error("kinetic energy {energy:e} at t = {time} exceeds 100x running median {median:e}")]
    Boundedness { time: f64, energy: f64, median: f64 },

    #[error("steady-shear oracle failed: {0}")]
    Oracle(String),

    #[error("bad damping table {path}: {reason}")]
    Table { path: PathBuf, reason: String },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("sweep point {point}: {source}")]
    Point { point: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
