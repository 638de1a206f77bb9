use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use wiretap_lab::{init_thread_pool, run, Cli, CliError};

fn fail(err: &CliError) -> ExitCode {
    let body = serde_json::to_string(&err.report()).expect("error report serializes");
    eprintln!("{body}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Help and version requests are not failures.
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.to_string())),
    };
    if let Err(e) = init_thread_pool() {
        return fail(&e);
    }
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(&cli, echo) {
        Ok(report) => {
            // A closed pipe (e.g. `| head`) is not worth a panic.
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", report.to_json()).and_then(|_| out.flush());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
