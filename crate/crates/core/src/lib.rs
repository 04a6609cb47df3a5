//! Recognizable languages of series-parallel graphs.

pub mod decision;
pub mod error;
pub mod grammar;
pub mod oracle;
pub mod recognizer;
pub mod spgraph;
mod syntax;
pub mod termalg;

pub use error::{Error, Result};
