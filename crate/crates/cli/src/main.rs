use std::process::ExitCode;

use ranklab_cli::{emit_report, run, EXIT_ERROR};

fn main() -> ExitCode {
    let outcome = run(std::env::args_os());
    if let Some(text) = &outcome.text {
        print!("{text}");
    }
    let mut exit = outcome.exit;
    if let Some(report) = &outcome.report {
        if let Some(err) = &report.error {
            eprintln!("error: {}", err["message"].as_str().unwrap_or("unknown"));
        }
        if let Err(e) = emit_report(report, outcome.json.as_deref()) {
            eprintln!("error: cannot write report: {e}");
            exit = EXIT_ERROR;
        }
    }
    ExitCode::from(exit as u8)
}
