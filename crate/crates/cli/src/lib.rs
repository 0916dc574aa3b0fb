//! Batch front end for `aqm-core`: manifests, run configuration, and the
//! `measure`, `decompose` and `correlate` commands.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod results;
