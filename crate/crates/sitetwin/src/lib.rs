//! Project files, reports, CLI and HTTP service on top of `sitetwin-core`.

pub mod cli;
pub mod fixtures;
pub mod ingest;
pub mod project_file;
pub mod report;
pub mod runner;
pub mod service;

pub use sitetwin_core as core;
