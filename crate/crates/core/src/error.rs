//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The smooth part of the log kernel is not positive on the grid.
    #[error("patch boundary self-intersecting at resolution: {0}")]
    SelfIntersecting(String),
    /// Time integration stopped because the radial chart degenerated.
    #[error("blow-up at t = {time}: min(1+2ξ) = {min_factor}")]
    BlowUp {
        time: f64,
        min_factor: f64,
        record: Box<crate::dynamics::TrajectoryRecord>,
    },
    /// An iterative solve did not converge.
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status associated with the error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Io(_) => 1,
            Error::SelfIntersecting(_) | Error::BlowUp { .. } | Error::NonConvergence(_) => 2,
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
