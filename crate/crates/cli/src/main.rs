mod args;
mod commands;
mod io;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

const THREADS_VAR: &str = "REMETRICA_THREADS";

/// An error attributable to the input: bad flags, documents, points or files.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
        }
    }
}

impl From<remetrica::Error> for CliError {
    fn from(e: remetrica::Error) -> Self {
        CliError::input(e.to_string())
    }
}

pub enum Body {
    Json(Value),
    Raw(String),
}

pub struct Outcome {
    pub body: Body,
    /// False when a verification ran to completion and failed.
    pub passed: bool,
}

impl Outcome {
    pub fn ok(value: Value) -> Self {
        Outcome {
            body: Body::Json(value),
            passed: true,
        }
    }

    pub fn raw(text: String) -> Self {
        Outcome {
            body: Body::Raw(text),
            passed: true,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::input(format!(
            "{THREADS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("{THREADS_VAR}: {e}")))
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(cli.command));
    match result {
        Ok(outcome) => {
            let text = match outcome.body {
                Body::Json(v) => serde_json::to_string_pretty(&v).expect("json output"),
                Body::Raw(s) => s,
            };
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(2)
        }
    }
}
