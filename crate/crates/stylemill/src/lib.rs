//! File formats, the end-to-end pipeline and the command line for
//! `stylemill`. The algorithms live in `stylemill-core`.

pub mod cli;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod store;

pub use error::{Error, Result};
pub use ingest::{parse_event_log, EventRecord, ParseOptions};
pub use pipeline::{rerun, run_pipeline, PipelineConfig, RunManifest};
pub use report::Report;
pub use stylemill_core as core;
