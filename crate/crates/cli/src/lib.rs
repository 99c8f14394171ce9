//! Config parsing, command dispatch and report rendering for the `courant`
//! binary.

pub mod config;
pub mod output;
pub mod run;
