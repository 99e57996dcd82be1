use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("superluminal velocity: |v| = {speed} >= c = {c}")]
    Superluminal { speed: f64, c: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("body extends outside the grid: {0}")]
    OutOfBounds(String),

    #[error("CFL number {cfl} violates the stability bound {bound}")]
    Stability { cfl: f64, bound: f64 },

    #[error("solution diverged (non-finite value) at step {step}")]
    Divergence { step: u64 },

    #[error("static solve did not converge in {iterations} iterations (residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("evaluation point lies inside the source support (distance {distance}, support radius {radius})")]
    Proximity { distance: f64, radius: f64 },

    #[error("scheduling error: {0}")]
    Scheduling(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("configuration errors:\n{0}")]
    Config(crate::config::ConfigErrors),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
