//! `fpl` command line and the HTTP decision service.

pub mod cli;
pub mod server;
