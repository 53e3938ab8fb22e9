//! Batch front-end for `hcorr-core`.
//!
//! Inputs and reports are JSON documents; see `docs/report-schema.md` for the
//! layouts. Exit statuses: 0 success, 2 parse or validation failure, 3
//! numerical failure (ellipticity, convergence, conditioning), 4 failed
//! internal cross-check or oracle comparison.

pub mod commands;
pub mod document;
pub mod error;
pub mod report;

pub use error::CliError;
