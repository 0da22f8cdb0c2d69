use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use crate::error::CliError;
use crate::input::{sha256_hex, InputDigest};
use crate::Run;

/// Provenance of one invocation. `result_sha256` covers the report bytes
/// only, so it is stable across repeated runs on the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub tool_version: String,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub threads: Option<usize>,
    pub wall_time_seconds: f64,
    pub exit_code: u8,
    pub result_sha256: String,
}

pub fn tolerances() -> BTreeMap<&'static str, f64> {
    use qcw_core::{causality, invariants, jointmeas, lopf, opt, quantum, witness};
    BTreeMap::from([
        ("lp", opt::LP_TOL),
        ("sdp", opt::SDP_TOL),
        ("hull", opt::hull::HULL_TOL),
        ("consistent_exclusivity", invariants::CE_TOL),
        ("ray", quantum::RAY_TOL),
        ("purity", quantum::entanglement::PURITY_TOL),
        ("joint_measurability", jointmeas::JM_TOL),
        ("threshold_width", jointmeas::THRESHOLD_WIDTH),
        ("stochastic", causality::STOCHASTIC_TOL),
        ("violation", witness::VIOLATION_TOL),
        ("basis", lopf::BASIS_TOL),
    ])
}

impl RunManifest {
    pub fn new(argv: &[OsString], inputs: Vec<InputDigest>, threads: Option<usize>, wall: Duration, run: &Run) -> Self {
        RunManifest {
            command_line: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
            inputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: tolerances(),
            threads,
            wall_time_seconds: wall.as_secs_f64(),
            exit_code: run.exit_code,
            result_sha256: sha256_hex(run.stdout.as_bytes()),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Computation(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.to_path_buf(), source })
    }
}
