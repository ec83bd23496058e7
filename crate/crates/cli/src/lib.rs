//! Command-line interface and HTTP service for the template toolchain.

pub mod cli;
pub mod service;
