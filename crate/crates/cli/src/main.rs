mod args;
mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use output::{to_json, ErrorBody, ErrorEnvelope, SCHEMA_VERSION};

fn fail(command: &str, kind: &'static str, message: String, code: u8) -> ExitCode {
    let body = to_json(&ErrorEnvelope {
        schema_version: SCHEMA_VERSION,
        command,
        error: ErrorBody { kind, message: message.clone() },
    });
    let _ = std::io::stdout().write_all(body.as_bytes());
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            return fail("", "config", message.trim_end().to_string(), 2);
        }
    };
    let name = commands::name(&cli.command);
    let report = match commands::run(&cli.command) {
        Ok(r) => r,
        Err(e) => return fail(name, e.kind(), e.to_string(), e.exit_code()),
    };
    let out = match &cli.command {
        args::Command::Variance(a) => &a.output,
        args::Command::Detector(a) => &a.output,
        args::Command::Validate(a) => &a.output,
        args::Command::Synge(a) => &a.output,
        args::Command::Sweep(a) => &a.output,
    };
    if let Err(e) = output::emit(&report.envelope(name), &report.table, out) {
        return fail(name, "io", format!("cannot write output: {e}"), 1);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
