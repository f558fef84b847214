//! IO side of lightswim: parameter-space and sweep documents, CSV output,
//! the parallel sweep driver, journaled lab sessions with their HTTP API,
//! and the command-line front end.

pub mod cli;
pub mod csv;
pub mod http;
pub mod parallel;
pub mod session;
pub mod space_file;
pub mod sweep_file;

pub use lightswim_core as core;
