//! Scenario runner behind the `horolab` command.
//!
//! A scenario is a JSON file naming a domain and a list of operations. Each
//! operation becomes a [`Record`] with its inputs, outputs and verdicts; the
//! [`Report`] passes when every record does.

pub mod cache;
mod error;
pub mod lab;
pub mod ops;
pub mod plot;
pub mod report;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use plot::{emit_plotdata, PlotKind};
pub use report::{
    execute_scenario, run_scenario, write_outputs, Record, Report, RunOptions, Verdict,
};
pub use scenario::{Operation, Scenario};
