//! File formats, configuration, plotting, and pipeline commands for the
//! cortolam CLI. The algorithms live in `cortolam-core`; this crate owns
//! everything that touches the filesystem.

pub mod commands;
pub mod config;
pub mod data;
pub mod plot;

pub use data::DataError;
