//! Command-line front end for `realclone`.

pub mod args;
pub mod commands;
pub mod report;

use std::io::Write;

use args::{Cli, Command};
use commands::{CliError, Outcome};
use report::Format;

/// Runs a parsed command line and returns the process exit code
/// (0 success, 1 failure, 2 usage error).
pub fn run(cli: Cli) -> i32 {
    let (result, common, default_format) = match &cli.command {
        Command::Bound(a) => (commands::bound(a), &a.common, Format::Text),
        Command::Optimize(a) => (commands::optimize(a), &a.common, Format::Text),
        Command::Clone(a) => (commands::clone_cmd(a), &a.common, Format::Text),
        Command::Verify(a) => (commands::verify(a), &a.common, Format::Text),
        Command::Figure(a) => (commands::figure(a), &a.common, Format::Csv),
    };
    let Outcome { report, ok, warnings } = match result {
        Ok(outcome) => outcome,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    for w in &warnings {
        eprintln!("{w}");
    }
    let mut format = common.format.unwrap_or(default_format);
    if matches!(cli.command, Command::Figure(_)) && format == Format::Text {
        format = Format::Csv;
    }
    let rendered = report.render(format);
    let written = match &common.out {
        Some(path) => std::fs::write(path, rendered.as_bytes()),
        None => std::io::stdout().lock().write_all(rendered.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 1;
    }
    if ok {
        0
    } else {
        1
    }
}
