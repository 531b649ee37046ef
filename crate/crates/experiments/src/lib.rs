//! Experiment runners for the frequency-principle and Poisson studies, with
//! layered TOML configuration and CSV/SVG output.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod runners;
pub mod train;

pub use config::{resolve, Config, Experiment};
pub use error::{RunError, RunResult};
pub use runners::{run, run_seed, Outcome, RunOutput};
