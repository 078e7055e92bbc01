//! File formats, reports, and the `regret` command line.

pub mod cli;
pub mod files;
pub mod report;
