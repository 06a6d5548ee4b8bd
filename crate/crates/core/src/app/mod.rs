//! Config-driven runs of the library tasks.

mod config;
mod run;

pub use config::{ExampleConfig, FieldInput, OutputConfig, RunConfig, SequenceConfig, TaskKind};
pub use run::{error_json, execute, exit, exit_code, report_json, run_file, Artifacts, Options, Outcome, OUT_DIR_ENV};
