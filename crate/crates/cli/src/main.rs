use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use relat_cli::commands::{envelope, error_json, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let mut out = std::io::stdout().lock();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                let v = envelope(name, report.status.as_str(), ("result", report.result));
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("values serialize"));
            } else {
                let _ = write!(out, "{}", report.text);
            }
            ExitCode::from(report.status.exit_code())
        }
        Err(e) => {
            if cli.json {
                let v = envelope(name, "error", ("error", error_json(&e)));
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("values serialize"));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(2)
        }
    }
}
