//! Reproducible experiment driver for the weightlab numerics: region maps,
//! membership reports, truncation scans and operator ratio experiments,
//! all driven by a versioned JSON configuration.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{
    compare_verdicts, run_catalog, run_check_pair, run_region_map, run_scan_global,
    run_verify_theorem, Agreement, Outcome,
};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
