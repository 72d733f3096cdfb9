//! Stable matching in `k` dimensions with cyclic preferences.

pub mod cli;
pub mod error;
pub mod format;
pub mod genlab;
pub mod model;
pub mod par;
pub mod reduce;
pub mod rng;
pub mod solve;
pub mod verify;

pub use error::{Error, Result};
pub use model::{AgentRef, Family, Instance, Matching};
