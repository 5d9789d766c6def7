//! Library surface of the scenario runner, shared by the binary and the
//! acceptance suite.

pub mod output;
pub mod run;
pub mod scenario;
