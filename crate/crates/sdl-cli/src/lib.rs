//! Command-line front end for the singular Dirichlet laboratory: config
//! parsing, dispatch, and byte-stable report emission.

// Validation guards use `!(x > bound)` to reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, Command, RunConfig};
pub use run::{emit, run, RunOutput};
