use std::path::PathBuf;

use qcw_core::causality::CausalError;
use qcw_core::invariants::InvariantError;
use qcw_core::jointmeas::JmError;
use qcw_core::lopf::LopfError;
use qcw_core::opt::OptError;
use qcw_core::quantum::QuantumError;
use qcw_core::scenario::ScenarioError;
use qcw_core::witness::WitnessError;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NO: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    UnknownCommand(String),
    #[error("{}: schema violation at `{pointer}`: {message}", .file.display())]
    SchemaViolation { file: PathBuf, pointer: String, message: String },
    #[error("cannot read {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("no corpus cases under {}", .0.display())]
    CorpusMissing(PathBuf),
    #[error("computation failed: {0}")]
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ResourceBound(_) => EXIT_RESOURCE,
            CliError::Computation(_) => EXIT_FAILURE,
            _ => EXIT_INVALID,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::UnknownCommand(_) => "UnknownCommand",
            CliError::SchemaViolation { .. } => "SchemaViolation",
            CliError::Io { .. } => "Io",
            CliError::InvalidInput(_) => "InvalidInput",
            CliError::ResourceBound(_) => "ResourceBound",
            CliError::CorpusMissing(_) => "CorpusMissing",
            CliError::Computation(_) => "Computation",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::SchemaViolation { pointer, .. } = self {
            v["pointer"] = pointer.clone().into();
        }
        v
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::InvalidInput(e.to_string())
}

fn resource(e: impl ToString) -> CliError {
    CliError::ResourceBound(e.to_string())
}

impl From<OptError> for CliError {
    fn from(e: OptError) -> Self {
        match e {
            OptError::TooLarge { .. } => resource(e),
            OptError::NotConverged { .. } | OptError::Unbounded => CliError::Computation(e.to_string()),
            _ => invalid(e),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::TooLarge { .. } => resource(e),
            _ => invalid(e),
        }
    }
}

impl From<InvariantError> for CliError {
    fn from(e: InvariantError) -> Self {
        match e {
            InvariantError::TooLarge { .. } => resource(e),
            InvariantError::Scenario(e) => e.into(),
            InvariantError::Opt(e) => e.into(),
            _ => invalid(e),
        }
    }
}

impl From<WitnessError> for CliError {
    fn from(e: WitnessError) -> Self {
        match e {
            WitnessError::Invariant(e) => e.into(),
            _ => invalid(e),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::Scenario(e) => e.into(),
            QuantumError::Opt(e) => e.into(),
            QuantumError::Witness(e) => e.into(),
            _ => invalid(e),
        }
    }
}

impl From<JmError> for CliError {
    fn from(e: JmError) -> Self {
        match e {
            JmError::TooMany { .. } => resource(e),
            JmError::Opt(e) => e.into(),
            JmError::Scenario(e) => e.into(),
            JmError::VerificationFailed { .. } => CliError::Computation(e.to_string()),
            _ => invalid(e),
        }
    }
}

impl From<CausalError> for CliError {
    fn from(e: CausalError) -> Self {
        match e {
            CausalError::TooLarge { .. } => resource(e),
            CausalError::Opt(e) => e.into(),
            _ => invalid(e),
        }
    }
}

impl From<LopfError> for CliError {
    fn from(e: LopfError) -> Self {
        match e {
            LopfError::TooLarge(_) => resource(e),
            LopfError::Causal(e) => e.into(),
            _ => invalid(e),
        }
    }
}
