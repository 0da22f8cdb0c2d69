//! Input files: loading with digests, schema errors with JSON-pointer
//! paths, and the on-disk formats that have no core counterpart.

use std::collections::BTreeMap;
use std::path::Path;

use qcw_core::causality::{ProcessEnvironment, ProcessFunction};
use qcw_core::quantum::{c64, CMatrix, Ray, State};
use qcw_core::scenario::{RawJms, RawScenario, ScenarioError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// `[re, im]` pairs, row-major for matrices.
pub type ComplexVector = Vec<[f64; 2]>;
pub type ComplexMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Reads inputs and remembers what was read.
#[derive(Debug, Default)]
pub struct Loader {
    pub digests: Vec<InputDigest>,
}

impl Loader {
    pub fn read<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        self.digests.push(InputDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        parse(path, &bytes)
    }
}

pub fn parse<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::SchemaViolation {
        file: path.to_path_buf(),
        pointer: json_pointer(e.path()),
        message: e.inner().to_string(),
    })
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&escape(key)),
            Segment::Enum { variant } => out.push_str(&escape(variant)),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

pub fn violation(file: &Path, pointer: impl Into<String>, message: impl ToString) -> CliError {
    CliError::SchemaViolation { file: file.to_path_buf(), pointer: pointer.into(), message: message.to_string() }
}

fn position(list: &[String], name: &str) -> Option<usize> {
    list.iter().position(|v| v == name)
}

/// Locates a scenario validation failure inside the raw document.
pub fn scenario_pointer(raw: &RawScenario, e: &ScenarioError) -> Option<String> {
    Some(match e {
        ScenarioError::EmptyHyperedge { edge } => format!("/hyperedges/{edge}"),
        ScenarioError::UnknownVertex { edge, vertex } | ScenarioError::DuplicateInHyperedge { edge, vertex } => {
            let at = raw.hyperedges.get(*edge).and_then(|h| h.iter().rposition(|v| v == vertex));
            match at {
                Some(i) => format!("/hyperedges/{edge}/{i}"),
                None => format!("/hyperedges/{edge}"),
            }
        }
        ScenarioError::OrphanVertex { vertex } | ScenarioError::DuplicateVertex { vertex } => {
            match raw.vertices.iter().rposition(|v| v == vertex) {
                Some(i) => format!("/vertices/{i}"),
                None => "/vertices".into(),
            }
        }
        ScenarioError::TooLarge { .. } => return None,
        _ => String::new(),
    })
}

pub fn jms_pointer(raw: &RawJms, e: &ScenarioError) -> Option<String> {
    Some(match e {
        ScenarioError::UnknownVertex { vertex, .. } => {
            let hit = raw.compatible.iter().enumerate().find_map(|(k, s)| position(s, vertex).map(|i| (k, i)));
            match hit {
                Some((k, i)) => format!("/compatible/{k}/{i}"),
                None => "/compatible".into(),
            }
        }
        ScenarioError::DuplicateVertex { vertex } | ScenarioError::OrphanVertex { vertex } => {
            match raw.vertices.iter().rposition(|v| v == vertex) {
                Some(i) => format!("/vertices/{i}"),
                None => "/vertices".into(),
            }
        }
        ScenarioError::TooLarge { .. } => return None,
        _ => String::new(),
    })
}

pub fn to_vector(v: &[[f64; 2]]) -> Vec<qcw_core::quantum::C64> {
    v.iter().map(|&[re, im]| c64(re, im)).collect()
}

pub fn from_vector(v: &[qcw_core::quantum::C64]) -> ComplexVector {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn to_matrix(file: &Path, pointer: &str, m: &ComplexMatrix) -> Result<CMatrix, CliError> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(violation(file, pointer, "expected a non-empty square matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c64(m[i][j][0], m[i][j][1])))
}

/// `{"rays": {"<vertex>": [[re, im], ...], ...}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayFile {
    pub rays: BTreeMap<String, ComplexVector>,
}

impl RayFile {
    /// Rays in the order of `vertices`.
    pub fn ordered(&self, file: &Path, vertices: &[String]) -> Result<Vec<Ray>, CliError> {
        if let Some(extra) = self.rays.keys().find(|k| !vertices.contains(k)) {
            return Err(violation(file, format!("/rays/{}", escape(extra)), "vertex is not in the scenario"));
        }
        vertices
            .iter()
            .map(|v| {
                let amps = self
                    .rays
                    .get(v)
                    .ok_or_else(|| violation(file, "/rays", format!("no ray for vertex `{v}`")))?;
                Ray::new(to_vector(amps)).map_err(|e| violation(file, format!("/rays/{}", escape(v)), e))
            })
            .collect()
    }
}

/// `{"pure": [[re, im], ...]}` or `{"density": [[[re, im], ...], ...]}`
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateFile {
    Pure(ComplexVector),
    Density(ComplexMatrix),
}

impl StateFile {
    pub fn state(&self, file: &Path) -> Result<State, CliError> {
        match self {
            StateFile::Pure(v) => {
                let r = Ray::new(to_vector(v)).map_err(|e| violation(file, "/pure", e))?;
                Ok(State::pure(&r))
            }
            StateFile::Density(m) => {
                State::new(to_matrix(file, "/density", m)?).map_err(|e| violation(file, "/density", e))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisyAxis {
    pub axis: [f64; 3],
    pub eta: f64,
}

/// Two-outcome qubit POVMs: explicit outcome-0 effects and/or noisy
/// spin directions `{(I + η a·σ)/2}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    #[serde(default)]
    pub effects: Vec<ComplexMatrix>,
    #[serde(default)]
    pub noisy: Vec<NoisyAxis>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub channel: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
    pub state: ComplexMatrix,
    pub dims: [usize; 2],
    pub encodings: Vec<Vec<ComplexMatrix>>,
    pub decodings: Vec<Vec<ComplexMatrix>>,
}

/// Either `table` (an environment `p(i⃗|o⃗)`) or `functions` (a
/// deterministic process function).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessFile {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    #[serde(default)]
    pub table: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub functions: Option<Vec<Vec<usize>>>,
}

fn check_functions(file: &Path, inputs: &[usize], outputs: &[usize], functions: &[Vec<usize>]) -> Result<(), CliError> {
    if functions.len() != inputs.len() || inputs.len() != outputs.len() {
        return Err(violation(file, "/functions", "one truth table per party"));
    }
    let no = outputs.iter().try_fold(1usize, |a, &b| a.checked_mul(b));
    for (k, f) in functions.iter().enumerate() {
        if Some(f.len()) != no {
            return Err(violation(file, format!("/functions/{k}"), "table needs one entry per joint output"));
        }
        if let Some(o) = f.iter().position(|&v| v >= inputs[k]) {
            return Err(violation(file, format!("/functions/{k}/{o}"), "value outside the input alphabet"));
        }
    }
    Ok(())
}

impl ProcessFile {
    pub fn environment(self, file: &Path) -> Result<ProcessEnvironment, CliError> {
        let ProcessFile { inputs, outputs, table, functions } = self;
        match (table, functions) {
            (Some(table), None) => Ok(ProcessEnvironment { inputs, outputs, table }),
            (None, Some(functions)) => {
                check_functions(file, &inputs, &outputs, &functions)?;
                Ok(ProcessFunction { inputs, outputs, functions }.to_environment())
            }
            _ => Err(violation(file, "", "exactly one of `table` and `functions` is required")),
        }
    }

    pub fn function(self, file: &Path) -> Result<ProcessFunction, CliError> {
        let ProcessFile { inputs, outputs, table, functions } = self;
        match (table, functions) {
            (None, Some(functions)) => {
                check_functions(file, &inputs, &outputs, &functions)?;
                Ok(ProcessFunction { inputs, outputs, functions })
            }
            (Some(table), None) => {
                let env = ProcessEnvironment { inputs, outputs, table };
                env.validate()?;
                ProcessFunction::from_environment(&env)
                    .ok_or_else(|| violation(file, "/table", "environment is not deterministic"))
            }
            _ => Err(violation(file, "", "exactly one of `table` and `functions` is required")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionFile {
    pub interventions: Vec<qcw_core::causality::Intervention>,
}
