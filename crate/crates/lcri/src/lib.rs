//! Command-line prover and HTTP session service.

pub mod api;
pub mod cli;
pub mod service;
pub mod smt;
