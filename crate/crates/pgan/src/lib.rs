//! File formats, plots and the experiment runner around `pgan-core`.

pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod idx;
pub mod manifest;
pub mod plot;
