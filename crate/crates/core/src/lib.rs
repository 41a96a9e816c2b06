//! Data-quality pollution and measurement for tabular datasets, plus the
//! machinery to measure how classical learners degrade as quality drops.

pub mod error;
pub mod models;
pub mod pollute;
pub mod quality;
pub mod runner;
pub mod scenario;
pub mod tabular;

pub use error::{Error, Result};
