//! Runs the qpath identity checks and writes JSON reports.

pub mod check;
pub mod config;
pub mod report;
pub mod suites;

pub use config::{ConfigError, Suite, SuiteConfig};
pub use report::{run, Report};
