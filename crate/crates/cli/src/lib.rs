//! `qcw` command-line front end: argument grammar, JSON reports, run
//! manifests and the regression corpus runner.

use std::ffi::OsString;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

pub mod args;
pub mod commands;
pub mod corpus;
pub mod error;
pub mod input;
pub mod manifest;

use args::Cli;
use error::{CliError, EXIT_OK};
use input::Loader;

/// Everything one invocation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub exit_code: u8,
    /// The report, already serialized.
    pub stdout: String,
    pub summary: String,
}

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
pub fn emit(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("JSON values serialize");
    s.push('\n');
    s
}

fn failure(e: &CliError) -> Run {
    Run { exit_code: e.exit_code(), stdout: emit(&e.to_json()), summary: format!("error: {e}") }
}

pub fn run<I, T>(argv: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Run { exit_code: EXIT_OK, stdout: e.to_string(), summary: String::new() };
        }
        Err(e) if matches!(e.kind(), ErrorKind::InvalidSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) => {
            return failure(&CliError::UnknownCommand(e.to_string().trim_end().to_string()));
        }
        Err(e) => return failure(&CliError::InvalidInput(e.to_string().trim_end().to_string())),
    };
    let start = Instant::now();
    let mut loader = Loader::default();
    let result = with_threads(cli.threads, || commands::execute(&cli.command, &mut loader));
    let mut out = match result {
        Ok(o) => Run { exit_code: o.exit_code(), stdout: emit(&o.report), summary: o.summary },
        Err(e) => failure(&e),
    };
    if let Some(path) = &cli.manifest {
        let m = manifest::RunManifest::new(&argv, loader.digests, cli.threads, start.elapsed(), &out);
        if let Err(e) = m.write(path) {
            out = failure(&e);
        }
    }
    out
}

fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<R, CliError> + Send,
) -> Result<R, CliError> {
    match threads {
        None => f(),
        Some(0) => Err(CliError::InvalidInput("--threads must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Computation(e.to_string()))?
            .install(f),
    }
}
