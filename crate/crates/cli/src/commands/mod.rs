//! One handler per subcommand. Each returns a JSON report, a one-line
//! summary, and for yes/no questions the answer.

use serde::Serialize;
use serde_json::Value;

use crate::args::Command;
use crate::error::{CliError, EXIT_NO, EXIT_OK};
use crate::input::Loader;

mod causal;
mod contextuality;
mod jm;
mod lopf;
mod quantum;

pub use causal::NomicCheckpoint;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub summary: String,
    pub answer: Option<bool>,
}

impl Outcome {
    pub fn new(report: impl Serialize, summary: impl Into<String>) -> Result<Self, CliError> {
        let report = serde_json::to_value(report).map_err(|e| CliError::Computation(e.to_string()))?;
        Ok(Outcome { report, summary: summary.into(), answer: None })
    }

    pub fn answer(mut self, yes: bool) -> Self {
        self.answer = Some(yes);
        self
    }

    pub fn exit_code(&self) -> u8 {
        if self.answer == Some(false) {
            EXIT_NO
        } else {
            EXIT_OK
        }
    }
}

pub fn execute(cmd: &Command, loader: &mut Loader) -> Result<Outcome, CliError> {
    match cmd {
        Command::Scenario(c) => contextuality::scenario(c, loader),
        Command::Invariants(a) => contextuality::invariants(a, loader),
        Command::Witness(c) => contextuality::witness(c, loader),
        Command::Quantum(c) => quantum::run(c, loader),
        Command::Jm(c) => jm::run(c, loader),
        Command::Causal(c) => causal::causal(c, loader),
        Command::Process(c) => causal::process(c, loader),
        Command::Lopf(c) => lopf::run(c, loader),
        Command::Corpus(c) => crate::corpus::run(c),
    }
}
