//! Support library for the `ncuplink` binary: run-configuration parsing,
//! the policy-table file format, and output formatting. Split out of the
//! binary so integration tests can exercise the formats directly.

pub mod config;
pub mod sigfmt;
pub mod table_file;
