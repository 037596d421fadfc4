//! Command-line harness for rcnkit: data generation, training, prediction,
//! search and benchmark reproductions.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod model_file;
pub mod report;
