use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use clockshift_cli::{run, Cli, CliError};

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail(&CliError::input(first));
        }
    };
    let (settings, outcome) = match run(&cli) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let written = match &settings.out {
        Some(path) => std::fs::write(path, &outcome.text)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(outcome.text.as_bytes())
            .map_err(|e| CliError::input(format!("cannot write to stdout: {e}"))),
    };
    if let Err(e) = written {
        return fail(&e);
    }
    match outcome.deferred {
        Some(e) => fail(&e),
        None => ExitCode::SUCCESS,
    }
}
