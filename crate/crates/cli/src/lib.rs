//! Command-line front end: configuration, the per-command pipelines and
//! report emission.

pub mod cli;
pub mod commands;
pub mod config;
pub mod fixtures;
pub mod report;
