use thiserror::Error;

/// Errors produced by graph construction, sampling, counting and the statistics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} requires {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("edge set contains a cycle (edge {edge})")]
    Cycle { edge: usize },
    #[error("random walk exceeded {limit} steps starting from vertex {start}")]
    WalkLimit { start: usize, limit: u64 },
    #[error("linear system is singular or not positive definite at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
