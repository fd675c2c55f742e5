//! Scenario configuration, generators, run loop, and report emission for
//! the detection engine's command line.

pub mod config;
pub mod error;
pub mod generators;
pub mod io;
pub mod report;
pub mod runner;
