use thiserror::Error;

use crate::model::{AgentRef, InstanceViolation, MatchingViolation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("agent {agent} has type {found}, expected type {expected}")]
    TypeMismatch {
        agent: AgentRef,
        expected: usize,
        found: usize,
    },

    #[error("invalid instance: {}", join(.0))]
    InvalidInstance(Vec<InstanceViolation>),

    #[error("invalid matching: {}", join(.0))]
    InvalidMatching(Vec<MatchingViolation>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("family ({0}) is not the image of a 3-dimensional family")]
    NotCanonical(String),

    #[error("search space too large: {bound} exceeds limit {limit}")]
    SpaceTooLarge { bound: u128, limit: u128 },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
