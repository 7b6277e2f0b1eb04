use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hellinger::cli::{run, Cli};

fn main() -> ExitCode {
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { hellinger::cli::EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = run(cli, echo);
    if let Some(report) = &outcome.report {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{}", report.to_json());
        eprint!("{}", report.summary());
    }
    if let Some(message) = &outcome.message {
        eprintln!("error: {message}");
    }
    ExitCode::from(outcome.code)
}
