//! Scenario files and the `twolocal` command line.

pub mod file;
pub mod run;

pub use file::{parse_scenario, parse_scenario_str, InputError, Position};
pub use run::{exit_status, kv_reports, run_file, run_files, Command, Exit, Flags, Outcome};
