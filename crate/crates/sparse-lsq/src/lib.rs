//! File formats, synthetic instances, parallel Monte Carlo drivers, JSON
//! reports and the command-line front end for `sparse_lsq_core`.

pub mod cli;
mod error;
pub mod generate;
pub mod io;
pub mod parallel;
pub mod report;
pub mod run;

pub use error::{Error, Result};
pub use sparse_lsq_core as core;
