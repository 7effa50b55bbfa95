//! Command-line interface and HTTP service for alliance-selection analytics.

pub mod api;
pub mod cli;
pub mod session;
