//! Experiment suites, configuration and report plumbing for the `hardylim` binary.

pub mod config;
pub mod output;
pub mod report;
pub mod suites;

pub use config::{ConfigError, Overrides, RunConfig};
pub use output::{Check, Csv, SuiteOutput, Verdict};
pub use report::{summarize, Summary};
pub use suites::Suite;

/// Exit code for an invalid configuration or command line.
pub const EXIT_CONFIG: i32 = 64;
/// Exit code for a failure inside an experiment or while writing output.
pub const EXIT_RUNTIME: i32 = 70;
