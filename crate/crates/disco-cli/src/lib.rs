//! Command-line front end and file formats for the discourse-aware
//! extractive summarization pipeline.
//!
//! The library surface exists for integration tests and for embedding
//! the stage logic elsewhere; the `disco` binary is a thin wrapper over
//! [`run`].

pub mod binfeat;
pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;

use clap::Parser;

use error::{CliError, EXIT_OK};

/// Parse arguments and execute one stage, returning the process exit
/// code (0 success, 2 I/O, 3 version mismatch, 4 validation failure).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success exits.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            report(&e);
            e.exit_code()
        }
    }
}

fn report(e: &CliError) {
    log::error!("{e}");
    eprintln!("disco: {e}");
}
