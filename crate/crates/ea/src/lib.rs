//! Figure and table reproductions plus the acceptance suite.

pub mod config;
pub mod error;
pub mod experiments;
pub mod four_mode;
pub mod output;
pub mod phase_runs;
pub mod tables;
pub mod validation;

pub use error::{EaError, Result};
