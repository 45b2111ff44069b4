//! Front end of the `clockshift` binary: argument merging, command dispatch
//! and report formatting. `main.rs` only handles process I/O and exit codes.

pub mod commands;
pub mod report;
pub mod settings;

use std::fmt;

use clockshift_core::ErrorKind;

pub use report::{Cell, Report};
pub use settings::{Cli, Command, Format, Settings};

/// A failure with the exit status it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Input, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Numerical, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::MissingConstant => 4,
        }
    }

    pub fn code(&self) -> &'static str {
        match self.kind {
            ErrorKind::Input => "input",
            ErrorKind::Numerical => "numerical",
            ErrorKind::MissingConstant => "missing-constant",
        }
    }
}

/// `error[<code>]: <message>` on one line.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line = self.message.replace('\n', " ");
        write!(f, "error[{}]: {}", self.code(), one_line)
    }
}

impl std::error::Error for CliError {}

impl From<clockshift_core::Error> for CliError {
    fn from(e: clockshift_core::Error) -> Self {
        CliError { kind: e.kind(), message: e.to_string() }
    }
}

/// What a command produced. `deferred` is an error to report after the
/// output has been written (a scan with failed pairs still emits its rows).
#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub deferred: Option<CliError>,
}

/// Merges flags over the config file and runs the command.
pub fn run(cli: &Cli) -> Result<(Settings, Outcome), CliError> {
    let flags = Settings::from_command(&cli.command);
    let settings = match &cli.config {
        Some(path) => flags.or(Settings::load(path)?),
        None => flags,
    };
    let (report, deferred) = commands::execute(&cli.command, &settings)?;
    let text = match settings.format.unwrap_or(Format::Table) {
        Format::Csv => report.to_csv(),
        Format::Table => report.to_table(),
    };
    Ok((settings, Outcome { text, deferred }))
}
