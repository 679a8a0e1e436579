//! Experiment files: parsing, validation, bundled presets and the runner that
//! writes `trace.csv`, `summary.json`, `report.txt` and `metadata.json`.

pub mod config;
pub mod presets;
mod runner;

pub use config::{ExperimentConfig, ExpectSection, GPolicy, OracleChoice};
pub use presets::{list_presets, preset, Preset};
pub use runner::{
    output_dir, run_experiment, solve_oracle, validate, validate_config, write_trace_csv, Outcome, RunOptions,
    RunStatus, OUT_DIR_ENV,
};
