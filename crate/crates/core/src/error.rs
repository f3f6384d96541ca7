use thiserror::Error;

/// Errors raised by geometric constructions and measurements.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("line is parallel to the hyperplane (|<direction, normal>| = {0:e})")]
    Parallel(f64),

    #[error("near-parallel configuration (angle {0:e}): intersection is unbounded")]
    NearParallel(f64),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("capacity exceeded: {what} = {got} > {cap}")]
    Capacity { what: &'static str, got: usize, cap: usize },

    #[error("no admissible direction: {0}")]
    EmptySelection(String),

    #[error("segment {0} projects to a point")]
    DegenerateImage(usize),

    #[error("inconclusive at this sampling resolution: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
