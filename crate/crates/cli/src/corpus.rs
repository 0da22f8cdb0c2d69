//! Regression corpus: `cases/*.json` under a corpus directory, each naming
//! a command line, the expected exit code and checks on the report.
//! Arguments starting with `@` are paths relative to the corpus directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::CorpusCmd;
use crate::commands::Outcome;
use crate::error::CliError;
use crate::input::parse;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub name: String,
    #[serde(default)]
    pub criterion: Option<u32>,
    pub args: Vec<String>,
    pub exit: u8,
    #[serde(default)]
    pub expect: Vec<Expectation>,
    /// Run once per worker count and require byte-identical reports.
    #[serde(default)]
    pub threads: Vec<usize>,
}

/// A check on the value at `pointer`; every given condition must hold.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub pointer: String,
    #[serde(default)]
    pub equals: Option<Value>,
    #[serde(default)]
    pub approx: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub at_most: Option<f64>,
    #[serde(default)]
    pub at_least: Option<f64>,
    #[serde(default)]
    pub contains: Option<Value>,
    #[serde(default)]
    pub len: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub criterion: Option<u32>,
    pub command: String,
    pub expected_exit: u8,
    pub exit: Option<u8>,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl Expectation {
    fn check(&self, report: &Value) -> Vec<String> {
        let Some(v) = report.pointer(&self.pointer) else {
            return vec![format!("{}: missing", self.pointer)];
        };
        let p = &self.pointer;
        let mut out = Vec::new();
        let num = v.as_f64();
        if let Some(want) = &self.equals {
            if v != want {
                out.push(format!("{p}: {v} != {want}"));
            }
        }
        if let Some(want) = self.approx {
            let tol = self.tol.unwrap_or(1e-9);
            if num.is_none_or(|x| (x - want).abs() > tol) {
                out.push(format!("{p}: {v} not within {tol:e} of {want}"));
            }
        }
        if let Some(hi) = self.at_most {
            if num.is_none_or(|x| x > hi) {
                out.push(format!("{p}: {v} > {hi}"));
            }
        }
        if let Some(lo) = self.at_least {
            if num.is_none_or(|x| x < lo) {
                out.push(format!("{p}: {v} < {lo}"));
            }
        }
        if let Some(item) = &self.contains {
            if !v.as_array().is_some_and(|a| a.contains(item)) {
                out.push(format!("{p}: does not contain {item}"));
            }
        }
        if let Some(n) = self.len {
            let len = v.as_array().map(Vec::len).or_else(|| v.as_object().map(|o| o.len()));
            if len != Some(n) {
                out.push(format!("{p}: length {len:?}, expected {n}"));
            }
        }
        out
    }
}

pub fn case_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let cases = dir.join("cases");
    let mut files: Vec<PathBuf> = match std::fs::read_dir(&cases) {
        Ok(entries) => entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(_) => Vec::new(),
    };
    files.sort();
    if files.is_empty() {
        return Err(CliError::CorpusMissing(dir.to_path_buf()));
    }
    Ok(files)
}

fn resolve(dir: &Path, arg: &str) -> String {
    match arg.strip_prefix('@') {
        Some(rel) => dir.join(rel).display().to_string(),
        None => arg.to_string(),
    }
}

pub fn run_case(dir: &Path, case: &Case) -> CaseResult {
    let mut failures = Vec::new();
    let args: Vec<String> = case.args.iter().map(|a| resolve(dir, a)).collect();
    let mut result = CaseResult {
        name: case.name.clone(),
        criterion: case.criterion,
        command: case.args.join(" "),
        expected_exit: case.exit,
        exit: None,
        passed: false,
        failures: Vec::new(),
    };
    if args.first().is_some_and(|a| a == "corpus") {
        result.failures.push("corpus cases cannot run the corpus".into());
        return result;
    }
    let counts: Vec<Option<usize>> =
        if case.threads.is_empty() { vec![None] } else { case.threads.iter().copied().map(Some).collect() };
    let mut first: Option<String> = None;
    for k in counts {
        let mut argv = vec!["qcw".to_string()];
        argv.extend(args.iter().cloned());
        if let Some(k) = k {
            argv.extend(["--threads".to_string(), k.to_string()]);
        }
        let run = crate::run(&argv);
        result.exit = Some(run.exit_code);
        if run.exit_code != case.exit {
            failures.push(format!("exit {} (expected {}): {}", run.exit_code, case.exit, run.summary));
        }
        match serde_json::from_str::<Value>(&run.stdout) {
            Ok(report) => {
                for e in &case.expect {
                    failures.extend(e.check(&report));
                }
            }
            Err(e) => failures.push(format!("report is not JSON: {e}")),
        }
        match &first {
            None => first = Some(run.stdout),
            Some(f) if *f != run.stdout => failures.push(format!("report differs with {} workers", k.unwrap_or(0))),
            Some(_) => {}
        }
    }
    failures.dedup();
    result.passed = failures.is_empty();
    result.failures = failures;
    result
}

pub fn run(cmd: &CorpusCmd) -> Result<Outcome, CliError> {
    let CorpusCmd::Run { dir } = cmd;
    let files = case_files(dir)?;
    let mut results = Vec::with_capacity(files.len());
    for f in &files {
        let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let loaded = std::fs::read(f)
            .map_err(|source| CliError::Io { path: f.clone(), source })
            .and_then(|bytes| parse::<Case>(f, &bytes));
        results.push(match loaded {
            Ok(case) => run_case(dir, &case),
            Err(e) => CaseResult {
                name,
                criterion: None,
                command: String::new(),
                expected_exit: 0,
                exit: None,
                passed: false,
                failures: vec![e.to_string()],
            },
        });
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    let summary = if failed.is_empty() {
        format!("all {} corpus cases pass", results.len())
    } else {
        format!("{} of {} corpus cases fail: {}", failed.len(), results.len(), failed.join(", "))
    };
    let ok = failed.is_empty();
    let report = json!({
        "total": results.len(),
        "passed": results.len() - failed.len(),
        "failed": failed.len(),
        "cases": results,
    });
    Ok(Outcome::new(report, summary)?.answer(ok))
}
