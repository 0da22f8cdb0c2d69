use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let run = qcw_cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(run.stdout.as_bytes());
    if !run.summary.is_empty() {
        eprintln!("{}", run.summary);
    }
    ExitCode::from(run.exit_code)
}
