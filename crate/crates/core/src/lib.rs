//! Optimal dividend strategies for an insurer whose dividends are paid in a
//! foreign currency with a Lévy-driven exchange rate.

pub mod cli;
pub mod control;
pub mod error;
pub mod levy;
pub mod montecarlo;

pub use error::{Error, Result};
