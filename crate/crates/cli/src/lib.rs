//! Command-line front end: CSV ingestion, TOML run configuration, training,
//! prediction, JSON model files and verification reports.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod model;

pub use commands::{
    cmd_predict, cmd_train_preference, cmd_train_triplet, cmd_verify, cmd_verify_with,
};
pub use error::CliError;
