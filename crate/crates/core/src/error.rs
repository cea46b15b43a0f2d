use thiserror::Error;

use crate::dual::SolverFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{value} lies outside the domain of the {entropy} entropy ({what})")]
    Domain {
        entropy: &'static str,
        what: &'static str,
        value: f64,
    },
    #[error("exponential overflow: e^{0} exceeds the largest finite float")]
    Overflow(f64),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Solver(Box<SolverFailure>),
    #[error("closure failed in cell {cell} at node {node} (t = {time}): {source}")]
    Closure {
        cell: usize,
        node: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True when the error came from evaluating the ansatz outside the domain
    /// of the dual entropy; line searches treat these as an infinite objective.
    pub fn is_evaluation(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Overflow(_))
    }
}

impl From<SolverFailure> for Error {
    fn from(f: SolverFailure) -> Self {
        Error::Solver(Box::new(f))
    }
}
