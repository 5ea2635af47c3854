//! Pipeline driver for jammed-packing stress computations: configuration
//! parsing, orchestration, experiment presets and file exporters.

pub mod config;
pub mod export;
pub mod pipeline;
pub mod presets;

pub use config::RunConfig;
pub use pipeline::{run_pipeline, RunReport};
