//! Command-line front end for `msalab`: configuration, experiment dispatch
//! and result files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
