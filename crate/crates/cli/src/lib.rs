//! Scenario runner behind the `qgraph` binary.

pub mod builtins;
pub mod run;
pub mod scenario;

pub use run::{run, RunError, RunOptions, Status};
pub use scenario::{ParseError, Scenario};
