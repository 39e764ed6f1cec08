//! `intervene`: validate, query, intervene, bound, classify, compile, and
//! report on discrete Bayesian networks.
//!
//! Exit codes: 0 ok, 1 domain error or invalid model, 2 I/O, 3 a size cap was
//! exceeded, 4 usage. Data goes to stdout; diagnostics and the run report go
//! to stderr.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;
use intervene_core::{Limits, Rendering};

use args::Cli;
use commands::Context;
use report::RunReport;

fn emit_report(command: &str, digest: String, files: Vec<String>, start: Instant, code: u8) {
    let report = RunReport::new(command, digest, files, start.elapsed(), code);
    eprintln!("{}", report.to_line());
}

fn main() -> ExitCode {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            if code != 0 && !argv.iter().any(|a| a == "--quiet" || a == "-q") {
                emit_report("-", report::digest(&argv, &[]), Vec::new(), start, code);
            }
            return ExitCode::from(code);
        }
    };

    let name = cli.command.name();
    let digest = report::digest(&argv, &commands::inputs(&cli.command));
    let ctx = Context {
        rendering: if cli.percent {
            Rendering::Percent
        } else {
            Rendering::Probability
        },
        limits: Limits::from_env(),
    };
    let (code, files) = match commands::run(cli.command, &ctx) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = if cli.json {
                writeln!(
                    stdout,
                    "{}",
                    serde_json::to_string_pretty(&out.json).expect("json")
                )
            } else {
                stdout.write_all(out.text.as_bytes())
            };
            let _ = stdout.flush();
            let mut files: Vec<String> =
                out.files.iter().map(|p| p.display().to_string()).collect();
            files.push("stdout".into());
            (out.exit_code, files)
        }
        Err(failure) => {
            eprintln!("{}", failure.diagnostic());
            (failure.exit_code(), Vec::new())
        }
    };
    if !cli.quiet {
        emit_report(name, digest, files, start, code);
    }
    ExitCode::from(code)
}
