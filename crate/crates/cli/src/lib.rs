//! Implementation of the `mledca` command-line tool, exposed as a library
//! so the acceptance suite can drive the same pipelines the binary runs.

pub mod commands;
pub mod config;
pub mod manifest;
