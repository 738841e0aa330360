//! Scenario runner for bright-state Raman adiabatic passage through a
//! three-level medium: configuration files, built-in presets and reports.

pub mod config;
pub mod error;
pub mod presets;
pub mod scenario;

pub use config::{parse_config, Mode, ScenarioConfig};
pub use error::CliError;
pub use scenario::{run_scenario, Report, RunOptions, Summary};
