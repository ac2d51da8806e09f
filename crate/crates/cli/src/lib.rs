//! File formats, an oracle call log, generators, reports and the
//! command-line driver around `defeq-core`.

pub mod cli;
pub mod gen;
pub mod harness;
pub mod io;
pub mod oracle_log;
pub mod report;
