//! Experiment runner for `horotorus`: configuration, CSV artifacts, reports,
//! log-linear fits and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod fit;
pub mod output;
pub mod report;
pub mod run;

pub use error::{HarnessError, Result};
