//! Experiment harness, file formats, and command-line front end for the
//! annealing simulator in `pvqa-core`.

pub mod cli;
pub mod config;
pub mod formats;
pub mod harness;
