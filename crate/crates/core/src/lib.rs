pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod problems;
pub mod quantum;
pub mod rl_agent;
pub mod schedule;

pub use error::{Error, Result};
