//! Correlations without a fixed causal order: deterministic causal vertices,
//! causal-inequality games, classical process consistency, correlations
//! generated by process environments and interventions, and bounds over
//! process functions.
//!
//! All tables are indexed big-endian in party order: outcome tuple
//! `(x_1, …, x_N)` has index `Σ_k x_k·D^{N−k}` and settings likewise with
//! base `M`. Process tables use the same rule with per-party alphabet sizes.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::opt::{hull_membership, HullVerdict, OptError};

/// Column-sum tolerance for stochastic tables.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Largest `D^N·M^N` accepted by vertex enumeration.
pub const MAX_TABLE_CELLS: usize = 10_000;
/// Largest number of pre-deduplication vertices generated by the recursion.
pub const MAX_RECURSION: usize = 10_000_000;
/// Largest joint input alphabet `Π|I_k|` for consistency checks.
pub const MAX_JOINT_INPUTS: usize = 1 << 20;
/// Largest number of deterministic reply tuples scanned.
pub const MAX_REPLY_TUPLES: u64 = 10_000_000;
/// Largest number of candidate process functions tested.
pub const MAX_CANDIDATES: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CausalError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("column {column} sums to {sum}")]
    NotStochastic { column: usize, sum: f64 },
    #[error("table has a negative or non-finite entry")]
    NegativeEntry,
    #[error("{what}: {actual} exceeds the limit {limit}")]
    TooLarge { what: &'static str, actual: f64, limit: f64 },
    #[error("environment is inconsistent: reply tuple {reply:?} yields total mass {mass}")]
    InconsistentEnvironment { reply: Vec<Vec<usize>>, mass: f64 },
    #[error("invalid intervention: {0}")]
    BadIntervention(String),
    #[error("invalid game: {0}")]
    BadGame(String),
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Opt(#[from] OptError),
}

fn too_large(what: &'static str, actual: f64, limit: f64) -> CausalError {
    CausalError::TooLarge { what, actual, limit }
}

/// Mixed-radix digits of `idx`, most significant first.
pub fn digits(mut idx: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for k in (0..radices.len()).rev() {
        out[k] = idx % radices[k];
        idx /= radices[k];
    }
    out
}

/// Inverse of [`digits`].
pub fn index(ds: &[usize], radices: &[usize]) -> usize {
    ds.iter().zip(radices).fold(0, |acc, (d, r)| acc * r + d)
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// `(N, M, D)`: parties, settings per party, outcomes per setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationalScenario {
    pub n: usize,
    pub m: usize,
    pub d: usize,
}

impl CorrelationalScenario {
    pub fn new(n: usize, m: usize, d: usize) -> Result<Self, CausalError> {
        let s = CorrelationalScenario { n, m, d };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CausalError> {
        if self.n == 0 || self.m == 0 || self.d < 2 {
            return Err(CausalError::InvalidScenario(format!(
                "need N ≥ 1, M ≥ 1, D ≥ 2; got ({}, {}, {})",
                self.n, self.m, self.d
            )));
        }
        let cells = checked_pow(self.d, self.n)
            .and_then(|x| checked_pow(self.m, self.n).and_then(|a| x.checked_mul(a)));
        if cells.is_none_or(|c| c > 1 << 24) {
            return Err(too_large("table cells", f64::INFINITY, (1u64 << 24) as f64));
        }
        Ok(())
    }

    pub fn num_settings(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn num_outcomes(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn settings(&self, idx: usize) -> Vec<usize> {
        digits(idx, &vec![self.m; self.n])
    }

    pub fn outcomes(&self, idx: usize) -> Vec<usize> {
        digits(idx, &vec![self.d; self.n])
    }

    pub fn setting_index(&self, a: &[usize]) -> usize {
        index(a, &vec![self.m; self.n])
    }

    pub fn outcome_index(&self, x: &[usize]) -> usize {
        index(x, &vec![self.d; self.n])
    }
}

/// `table[x][a] = p(x⃗ | a⃗)`, a `D^N × M^N` column-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Correlation {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub table: Vec<Vec<f64>>,
}

fn check_stochastic(table: &[Vec<f64>], rows: usize, cols: usize) -> Result<(), CausalError> {
    if table.len() != rows || table.iter().any(|r| r.len() != cols) {
        return Err(CausalError::ShapeMismatch(format!("expected a {rows}×{cols} table")));
    }
    if table.iter().flatten().any(|&p| !p.is_finite() || p < -STOCHASTIC_TOL) {
        return Err(CausalError::NegativeEntry);
    }
    for c in 0..cols {
        let sum: f64 = table.iter().map(|r| r[c]).sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(CausalError::NotStochastic { column: c, sum });
        }
    }
    Ok(())
}

impl Correlation {
    pub fn new(s: CorrelationalScenario, table: Vec<Vec<f64>>) -> Result<Self, CausalError> {
        let c = Correlation { n: s.n, m: s.m, d: s.d, table };
        c.validate()?;
        Ok(c)
    }

    pub fn scenario(&self) -> CorrelationalScenario {
        CorrelationalScenario { n: self.n, m: self.m, d: self.d }
    }

    pub fn validate(&self) -> Result<(), CausalError> {
        let s = self.scenario();
        s.validate()?;
        check_stochastic(&self.table, s.num_outcomes(), s.num_settings())
    }

    /// `p(x⃗|a⃗)` from a rule giving the outcome tuple for each setting tuple.
    pub fn from_rule(
        s: CorrelationalScenario,
        rule: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self, CausalError> {
        let mut table = vec![vec![0.0; s.num_settings()]; s.num_outcomes()];
        for a in 0..s.num_settings() {
            let x = rule(&s.settings(a));
            if x.len() != s.n || x.iter().any(|&v| v >= s.d) {
                return Err(CausalError::ShapeMismatch(format!("rule produced outcome {x:?}")));
            }
            table[s.outcome_index(&x)][a] = 1.0;
        }
        Correlation::new(s, table)
    }

    pub fn uniform(s: CorrelationalScenario) -> Self {
        let v = 1.0 / s.num_outcomes() as f64;
        Correlation { n: s.n, m: s.m, d: s.d, table: vec![vec![v; s.num_settings()]; s.num_outcomes()] }
    }

    fn flat(&self) -> Vec<f64> {
        self.table.iter().flatten().copied().collect()
    }
}

/// Deterministic correlation as the outcome index for each setting index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeterministicVertex {
    pub outcomes: Vec<u32>,
}

impl DeterministicVertex {
    pub fn to_correlation(&self, s: CorrelationalScenario) -> Correlation {
        let mut table = vec![vec![0.0; s.num_settings()]; s.num_outcomes()];
        for (a, &x) in self.outcomes.iter().enumerate() {
            table[x as usize][a] = 1.0;
        }
        Correlation { n: s.n, m: s.m, d: s.d, table }
    }

    fn flat(&self, s: CorrelationalScenario) -> Vec<f64> {
        let cols = s.num_settings();
        let mut v = vec![0.0; s.num_outcomes() * cols];
        for (a, &x) in self.outcomes.iter().enumerate() {
            v[x as usize * cols + a] = 1.0;
        }
        v
    }
}

/// Deterministic causal correlations: some party's outcome is a function of
/// its own setting, and for each value of that setting the others form a
/// deterministic causal correlation. Sorted and deduplicated.
pub fn deterministic_causal_vertices(
    s: CorrelationalScenario,
) -> Result<Vec<DeterministicVertex>, CausalError> {
    s.validate()?;
    let cells = s.num_outcomes() * s.num_settings();
    if cells > MAX_TABLE_CELLS {
        return Err(too_large("D^N·M^N", cells as f64, MAX_TABLE_CELLS as f64));
    }
    let (m, d) = (s.m, s.d);
    let local_fns = checked_pow(d, m).ok_or_else(|| too_large("local functions", f64::INFINITY, 0.0))?;
    // level r: vertices over r parties (outcome index per setting index)
    let mut level: Vec<Vec<u32>> = (0..local_fns)
        .map(|f| digits(f, &vec![d; m]).into_iter().map(|x| x as u32).collect())
        .collect();
    for r in 2..=s.n {
        let prev = level.len();
        let count = (r as f64) * local_fns as f64 * (prev as f64).powi(m as i32);
        if count > MAX_RECURSION as f64 {
            return Err(too_large("recursion count", count, MAX_RECURSION as f64));
        }
        let sub_settings = m.pow(r as u32 - 1);
        let settings = m.pow(r as u32);
        let rm = vec![m; r];
        let rd = vec![d; r];
        let subm = vec![m; r - 1];
        let subd = vec![d; r - 1];
        let choices = prev.pow(m as u32);
        let mut found: BTreeSet<Vec<u32>> = (0..r)
            .into_par_iter()
            .flat_map_iter(|k| {
                let level = &level;
                let (rm, rd, subm, subd) = (&rm, &rd, &subm, &subd);
                (0..local_fns).flat_map(move |f| {
                    let fk = digits(f, &vec![d; m]);
                    (0..choices).map(move |choice| {
                        let pick = digits(choice, &vec![prev; m]);
                        let mut out = vec![0u32; settings];
                        for (a_idx, slot) in out.iter_mut().enumerate() {
                            let a = digits(a_idx, rm);
                            let ak = a[k];
                            let rest: Vec<usize> =
                                a.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| *v).collect();
                            let sub_x = level[pick[ak]][index(&rest, subm)] as usize;
                            let mut x = digits(sub_x, subd);
                            x.insert(k, fk[ak]);
                            *slot = index(&x, rd) as u32;
                        }
                        debug_assert_eq!(sub_settings * m, settings);
                        out
                    })
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
        level = std::mem::take(&mut found).into_iter().collect();
    }
    Ok(level.into_iter().map(|outcomes| DeterministicVertex { outcomes }).collect())
}

/// Scoring table `weights[x][a]` and setting prior of a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub weights: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
}

pub const BUILTIN_GAMES: [&str; 3] = ["gyni", "afbw", "gynin"];

fn maj(a: &[usize]) -> usize {
    usize::from(a.iter().sum::<usize>() * 2 > a.len())
}

impl GameSpec {
    pub fn scenario(&self) -> CorrelationalScenario {
        CorrelationalScenario { n: self.n, m: self.m, d: self.d }
    }

    pub fn validate(&self) -> Result<(), CausalError> {
        let s = self.scenario();
        s.validate()?;
        if self.weights.len() != s.num_outcomes() || self.weights.iter().any(|r| r.len() != s.num_settings()) {
            return Err(CausalError::BadGame("weight table has the wrong shape".into()));
        }
        if self.weights.iter().flatten().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(CausalError::BadGame("weights must be nonnegative".into()));
        }
        if self.prior.len() != s.num_settings()
            || self.prior.iter().any(|&p| p < 0.0)
            || (self.prior.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(CausalError::BadGame("prior must be a distribution over settings".into()));
        }
        Ok(())
    }

    /// Binary game with uniform prior that is won iff `win(x, a)`.
    pub fn from_predicate(
        name: &str,
        n: usize,
        win: impl Fn(&[usize], &[usize]) -> bool,
    ) -> Result<Self, CausalError> {
        let s = CorrelationalScenario::new(n, 2, 2)?;
        let weights = (0..s.num_outcomes())
            .map(|x| {
                (0..s.num_settings())
                    .map(|a| if win(&s.outcomes(x), &s.settings(a)) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(GameSpec {
            name: name.into(),
            n,
            m: 2,
            d: 2,
            weights,
            prior: vec![1.0 / s.num_settings() as f64; s.num_settings()],
        })
    }
}

/// Guess-your-neighbour's-input games and the majority-switched variant.
pub fn builtin_game(name: &str) -> Result<GameSpec, CausalError> {
    match name {
        "gyni" => GameSpec::from_predicate(name, 2, |x, a| x[0] == a[1] && x[1] == a[0]),
        "afbw" => GameSpec::from_predicate(name, 3, |x, a| {
            if maj(a) == 0 {
                x[0] == a[2] && x[1] == a[0] && x[2] == a[1]
            } else {
                x[0] == 1 - a[1] && x[1] == 1 - a[2] && x[2] == 1 - a[0]
            }
        }),
        "gynin" => GameSpec::from_predicate(name, 3, |x, a| {
            (x[0] == a[2] && x[1] == a[0] && x[2] == a[1])
                || (x[0] == 1 - a[2] && x[1] == 1 - a[0] && x[2] == 1 - a[1])
        }),
        other => Err(CausalError::UnknownGame(other.into())),
    }
}

fn check_game_shape(g: &GameSpec, s: CorrelationalScenario) -> Result<(), CausalError> {
    g.validate()?;
    if g.scenario() != s {
        return Err(CausalError::ShapeMismatch(format!(
            "game is for ({}, {}, {}), correlation is ({}, {}, {})",
            g.n, g.m, g.d, s.n, s.m, s.d
        )));
    }
    Ok(())
}

/// `Σ prior(a⃗)·W(x⃗, a⃗)·p(x⃗|a⃗)`
pub fn game_value(g: &GameSpec, c: &Correlation) -> Result<f64, CausalError> {
    c.validate()?;
    check_game_shape(g, c.scenario())?;
    let mut v = 0.0;
    for (x, row) in c.table.iter().enumerate() {
        for (a, p) in row.iter().enumerate() {
            v += g.prior[a] * g.weights[x][a] * p;
        }
    }
    Ok(v)
}

fn vertex_value(g: &GameSpec, v: &DeterministicVertex) -> f64 {
    v.outcomes.iter().enumerate().map(|(a, &x)| g.prior[a] * g.weights[x as usize][a]).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalBound {
    pub game: String,
    pub value: f64,
    pub vertex: DeterministicVertex,
    pub vertex_count: usize,
}

/// Largest value over the sorted list; ties go to the earliest vertex.
fn best_vertex(g: &GameSpec, vertices: &[DeterministicVertex]) -> Option<(usize, f64)> {
    vertices
        .par_iter()
        .enumerate()
        .map(|(i, v)| (i, vertex_value(g, v)))
        .reduce_with(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
}

/// Maximum of the (linear) game value over the deterministic causal vertices.
pub fn causal_bound(g: &GameSpec) -> Result<CausalBound, CausalError> {
    g.validate()?;
    let vertices = deterministic_causal_vertices(g.scenario())?;
    causal_bound_over(g, &vertices)
}

pub fn causal_bound_over(g: &GameSpec, vertices: &[DeterministicVertex]) -> Result<CausalBound, CausalError> {
    let (i, value) = best_vertex(g, vertices).ok_or_else(|| CausalError::InvalidScenario("no vertices".into()))?;
    Ok(CausalBound { game: g.name.clone(), value, vertex: vertices[i].clone(), vertex_count: vertices.len() })
}

/// Linear functional `Σ coefficients[x][a]·p(x|a) ≤ bound` valid on every
/// causal correlation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalInequality {
    pub coefficients: Vec<Vec<f64>>,
    /// Maximum of the functional over the deterministic causal vertices.
    pub bound: f64,
    /// Value of the functional on the tested correlation.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalVerdict {
    pub causal: bool,
    /// Convex weights on vertices (by index into the sorted vertex list).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<CausalInequality>,
    pub vertex_count: usize,
}

pub fn is_causal(c: &Correlation) -> Result<CausalVerdict, CausalError> {
    c.validate()?;
    let vertices = deterministic_causal_vertices(c.scenario())?;
    is_causal_over(c, &vertices)
}

pub fn is_causal_over(c: &Correlation, vertices: &[DeterministicVertex]) -> Result<CausalVerdict, CausalError> {
    let s = c.scenario();
    let gens: Vec<Vec<f64>> = vertices.iter().map(|v| v.flat(s)).collect();
    match hull_membership(&c.flat(), &gens)? {
        HullVerdict::Member { weights, .. } => {
            Ok(CausalVerdict { causal: true, weights, inequality: None, vertex_count: vertices.len() })
        }
        HullVerdict::Separated { normal, .. } => {
            let bound = gens
                .iter()
                .map(|g| g.iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            let value: f64 = c.flat().iter().zip(&normal).map(|(a, b)| a * b).sum();
            let cols = s.num_settings();
            let coefficients = normal.chunks(cols).map(<[f64]>::to_vec).collect();
            Ok(CausalVerdict {
                causal: false,
                weights: vec![],
                inequality: Some(CausalInequality { coefficients, bound, value }),
                vertex_count: vertices.len(),
            })
        }
    }
}

/// `table[i][o] = p(i⃗ | o⃗)` over per-party input and output alphabets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessEnvironment {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub table: Vec<Vec<f64>>,
}

impl ProcessEnvironment {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>, table: Vec<Vec<f64>>) -> Result<Self, CausalError> {
        let e = ProcessEnvironment { inputs, outputs, table };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), CausalError> {
        if self.inputs.is_empty() || self.inputs.len() != self.outputs.len() {
            return Err(CausalError::ShapeMismatch("one input and one output alphabet per party".into()));
        }
        if self.inputs.iter().chain(&self.outputs).any(|&k| k == 0) {
            return Err(CausalError::ShapeMismatch("alphabets must be nonempty".into()));
        }
        let (ni, no) = (self.joint_inputs()?, self.joint_outputs()?);
        check_stochastic(&self.table, ni, no)
    }

    pub fn parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn joint_inputs(&self) -> Result<usize, CausalError> {
        let n = self.inputs.iter().try_fold(1usize, |a, &b| a.checked_mul(b)).unwrap_or(usize::MAX);
        if n > MAX_JOINT_INPUTS {
            return Err(too_large("joint inputs", n as f64, MAX_JOINT_INPUTS as f64));
        }
        Ok(n)
    }

    pub fn joint_outputs(&self) -> Result<usize, CausalError> {
        let n = self.outputs.iter().try_fold(1usize, |a, &b| a.checked_mul(b)).unwrap_or(usize::MAX);
        if n > MAX_JOINT_INPUTS {
            return Err(too_large("joint outputs", n as f64, MAX_JOINT_INPUTS as f64));
        }
        Ok(n)
    }

    pub fn is_deterministic(&self) -> bool {
        self.table.iter().flatten().all(|&p| p == 0.0 || p == 1.0)
    }

    /// `p(i⃗|o⃗) = δ(i⃗, ω(o⃗))`.
    pub fn from_function(
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        omega: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self, CausalError> {
        let tmp = ProcessEnvironment { inputs: inputs.clone(), outputs: outputs.clone(), table: vec![] };
        let (ni, no) = (tmp.joint_inputs()?, tmp.joint_outputs()?);
        let mut table = vec![vec![0.0; no]; ni];
        for o in 0..no {
            let i = omega(&digits(o, &outputs));
            if i.len() != inputs.len() || i.iter().zip(&inputs).any(|(v, k)| v >= k) {
                return Err(CausalError::ShapeMismatch(format!("ω produced {i:?}")));
            }
            table[index(&i, &inputs)][o] = 1.0;
        }
        ProcessEnvironment::new(inputs, outputs, table)
    }

    /// Convex combination of environments on the same alphabets.
    pub fn mixture(parts: &[(f64, ProcessEnvironment)]) -> Result<Self, CausalError> {
        let first = &parts.first().ok_or_else(|| CausalError::ShapeMismatch("empty mixture".into()))?.1;
        let mut table = vec![vec![0.0; first.table[0].len()]; first.table.len()];
        for (w, e) in parts {
            if e.inputs != first.inputs || e.outputs != first.outputs {
                return Err(CausalError::ShapeMismatch("mixture members differ in alphabets".into()));
            }
            for (r, er) in table.iter_mut().zip(&e.table) {
                for (t, v) in r.iter_mut().zip(er) {
                    *t += w * v;
                }
            }
        }
        ProcessEnvironment::new(first.inputs.clone(), first.outputs.clone(), table)
    }

    /// `i_1 = ō_2·o_3`, `i_2 = ō_3·o_1`, `i_3 = ō_1·o_2`.
    pub fn afbw() -> Self {
        ProcessFunction::afbw().to_environment()
    }

    /// Equal mixture of the cyclic copy `i_k = o_{k−1}` and the cyclic
    /// anti-copy `i_k = ō_{k−1}`.
    pub fn bfw() -> Self {
        let copy = ProcessEnvironment::from_function(vec![2; 3], vec![2; 3], |o| vec![o[2], o[0], o[1]])
            .expect("binary table");
        let anti =
            ProcessEnvironment::from_function(vec![2; 3], vec![2; 3], |o| vec![1 - o[2], 1 - o[0], 1 - o[1]])
                .expect("binary table");
        ProcessEnvironment::mixture(&[(0.5, copy), (0.5, anti)]).expect("same alphabets")
    }

    /// Single party whose input is its own output.
    pub fn identity_loop() -> Self {
        ProcessEnvironment::from_function(vec![2], vec![2], |o| vec![o[0]]).expect("binary table")
    }
}

/// Deterministic environment given by one truth table per party:
/// `functions[k][o⃗] = ω_k(o⃗)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProcessFunction {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub functions: Vec<Vec<usize>>,
}

impl ProcessFunction {
    pub fn from_rule(
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        omega: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Self {
        let no: usize = outputs.iter().product();
        let mut functions = vec![vec![0; no]; inputs.len()];
        for o in 0..no {
            for (k, v) in omega(&digits(o, &outputs)).into_iter().enumerate() {
                functions[k][o] = v;
            }
        }
        ProcessFunction { inputs, outputs, functions }
    }

    pub fn afbw() -> Self {
        ProcessFunction::from_rule(vec![2; 3], vec![2; 3], |o| {
            vec![(1 - o[1]) * o[2], (1 - o[2]) * o[0], (1 - o[0]) * o[1]]
        })
    }

    /// `map[o⃗] = i⃗` as joint indices.
    pub fn joint_map(&self) -> Vec<usize> {
        let no: usize = self.outputs.iter().product();
        (0..no)
            .map(|o| {
                let i: Vec<usize> = self.functions.iter().map(|f| f[o]).collect();
                index(&i, &self.inputs)
            })
            .collect()
    }

    pub fn to_environment(&self) -> ProcessEnvironment {
        let ni: usize = self.inputs.iter().product();
        let map = self.joint_map();
        let mut table = vec![vec![0.0; map.len()]; ni];
        for (o, &i) in map.iter().enumerate() {
            table[i][o] = 1.0;
        }
        ProcessEnvironment { inputs: self.inputs.clone(), outputs: self.outputs.clone(), table }
    }

    /// Recovers the truth tables of a deterministic environment.
    pub fn from_environment(env: &ProcessEnvironment) -> Option<Self> {
        if !env.is_deterministic() {
            return None;
        }
        let no = env.table.first()?.len();
        let mut functions = vec![vec![0; no]; env.parties()];
        for o in 0..no {
            let i = env.table.iter().position(|r| r[o] == 1.0)?;
            for (k, v) in digits(i, &env.inputs).into_iter().enumerate() {
                functions[k][o] = v;
            }
        }
        Some(ProcessFunction { inputs: env.inputs.clone(), outputs: env.outputs.clone(), functions })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplyViolation {
    /// `reply[k][i_k] = o_k`.
    pub reply: Vec<Vec<usize>>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyVerdict {
    pub consistent: bool,
    pub reply_tuples_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<ReplyViolation>,
}

fn reply_tuple_count(inputs: &[usize], outputs: &[usize]) -> Result<u64, CausalError> {
    let mut total = 1f64;
    for (&i, &o) in inputs.iter().zip(outputs) {
        total *= (o as f64).powi(i as i32);
    }
    if total > MAX_REPLY_TUPLES as f64 {
        return Err(too_large("reply tuples", total, MAX_REPLY_TUPLES as f64));
    }
    Ok(total as u64)
}

/// Per-party reply functions `f_k: I_k → O_k` for tuple number `t`.
fn reply_tuple(mut t: u64, inputs: &[usize], outputs: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); inputs.len()];
    for k in (0..inputs.len()).rev() {
        let count = (outputs[k] as u64).pow(inputs[k] as u32);
        out[k] = digits((t % count) as usize, &vec![outputs[k]; inputs[k]]);
        t /= count;
    }
    out
}

/// `Σ_{i⃗} p(i⃗ | f(i⃗)) = 1` for every deterministic reply tuple `f`.
pub fn process_consistency(env: &ProcessEnvironment) -> Result<ConsistencyVerdict, CausalError> {
    env.validate()?;
    let total = reply_tuple_count(&env.inputs, &env.outputs)?;
    let ni = env.joint_inputs()?;
    let input_digits: Vec<Vec<usize>> = (0..ni).map(|i| digits(i, &env.inputs)).collect();
    let mass_of = |t: u64| {
        let f = reply_tuple(t, &env.inputs, &env.outputs);
        let mass: f64 = input_digits
            .iter()
            .enumerate()
            .map(|(i, ds)| {
                let o: Vec<usize> = ds.iter().enumerate().map(|(k, &v)| f[k][v]).collect();
                env.table[i][index(&o, &env.outputs)]
            })
            .sum();
        (t, mass)
    };
    let first_bad = (0..total)
        .into_par_iter()
        .map(mass_of)
        .filter(|(_, m)| (m - 1.0).abs() > STOCHASTIC_TOL)
        // antinomies (mass below one) are reported ahead of overdetermined replies
        .min_by_key(|(t, m)| (*m > 1.0, *t));
    Ok(match first_bad {
        None => ConsistencyVerdict { consistent: true, reply_tuples_checked: total, violation: None },
        Some((t, mass)) => ConsistencyVerdict {
            consistent: false,
            reply_tuples_checked: total,
            violation: Some(ReplyViolation { reply: reply_tuple(t, &env.inputs, &env.outputs), mass }),
        },
    })
}

/// `table[a][i][x][o] = p(x, o | a, i)` for one party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl Intervention {
    pub fn deterministic(
        settings: usize,
        inputs: usize,
        outcomes: usize,
        outputs: usize,
        g: impl Fn(usize, usize) -> usize,
        h: impl Fn(usize, usize) -> usize,
    ) -> Self {
        let table = (0..settings)
            .map(|a| {
                (0..inputs)
                    .map(|i| {
                        let mut t = vec![vec![0.0; outputs]; outcomes];
                        t[g(a, i)][h(a, i)] = 1.0;
                        t
                    })
                    .collect()
            })
            .collect();
        Intervention { table }
    }

    /// `x = i`, `o = a`.
    pub fn copy(settings: usize, outcomes: usize) -> Self {
        Self::deterministic(settings, outcomes, outcomes, settings, |_, i| i, |a, _| a)
    }

    /// `(settings, inputs, outcomes, outputs)`
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        let a = self.table.len();
        let i = self.table.first().map_or(0, Vec::len);
        let x = self.table.first().and_then(|t| t.first()).map_or(0, Vec::len);
        let o = self.table.first().and_then(|t| t.first()).and_then(|t| t.first()).map_or(0, Vec::len);
        (a, i, x, o)
    }

    pub fn validate(&self) -> Result<(), CausalError> {
        let (na, ni, nx, no) = self.shape();
        for by_i in &self.table {
            if by_i.len() != ni {
                return Err(CausalError::BadIntervention("ragged table".into()));
            }
            for t in by_i {
                if t.len() != nx || t.iter().any(|r| r.len() != no) {
                    return Err(CausalError::BadIntervention("ragged table".into()));
                }
                if t.iter().flatten().any(|&p| p < -STOCHASTIC_TOL) {
                    return Err(CausalError::BadIntervention("negative entry".into()));
                }
                let s: f64 = t.iter().flatten().sum();
                if (s - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(CausalError::BadIntervention(format!("entries sum to {s}")));
                }
            }
        }
        if na == 0 || ni == 0 || nx == 0 || no == 0 {
            return Err(CausalError::BadIntervention("empty alphabet".into()));
        }
        Ok(())
    }
}

/// `p(x⃗|a⃗) = Σ_{i⃗,o⃗} p(i⃗|o⃗) Π_k p(x_k, o_k | a_k, i_k)`, after checking
/// the environment is consistent.
pub fn correlation_from_process(
    env: &ProcessEnvironment,
    interventions: &[Intervention],
    s: CorrelationalScenario,
) -> Result<Correlation, CausalError> {
    let verdict = process_consistency(env)?;
    if let Some(v) = verdict.violation {
        return Err(CausalError::InconsistentEnvironment { reply: v.reply, mass: v.mass });
    }
    let table = correlation_from_process_unchecked(env, interventions, s)?;
    Correlation::new(s, table)
}

/// The same sum without the consistency gate; the result need not be
/// normalized.
pub fn correlation_from_process_unchecked(
    env: &ProcessEnvironment,
    interventions: &[Intervention],
    s: CorrelationalScenario,
) -> Result<Vec<Vec<f64>>, CausalError> {
    env.validate()?;
    s.validate()?;
    if interventions.len() != s.n || env.parties() != s.n {
        return Err(CausalError::ShapeMismatch("one intervention per party".into()));
    }
    for (k, t) in interventions.iter().enumerate() {
        t.validate()?;
        if t.shape() != (s.m, env.inputs[k], s.d, env.outputs[k]) {
            return Err(CausalError::ShapeMismatch(format!(
                "intervention {k} has shape {:?}, expected {:?}",
                t.shape(),
                (s.m, env.inputs[k], s.d, env.outputs[k])
            )));
        }
    }
    let (ni, no) = (env.joint_inputs()?, env.joint_outputs()?);
    let work = (s.num_outcomes() * s.num_settings()) as f64 * ni as f64 * no as f64;
    if work > 1e10 {
        return Err(too_large("process evaluation cells", work, 1e10));
    }
    let ids: Vec<Vec<usize>> = (0..ni).map(|i| digits(i, &env.inputs)).collect();
    let ods: Vec<Vec<usize>> = (0..no).map(|o| digits(o, &env.outputs)).collect();
    let cols: Vec<Vec<f64>> = (0..s.num_settings())
        .into_par_iter()
        .map(|a_idx| {
            let a = s.settings(a_idx);
            (0..s.num_outcomes())
                .map(|x_idx| {
                    let x = s.outcomes(x_idx);
                    let mut p = 0.0;
                    for (i, id) in ids.iter().enumerate() {
                        for (o, od) in ods.iter().enumerate() {
                            let w = env.table[i][o];
                            if w == 0.0 {
                                continue;
                            }
                            let mut prod = w;
                            for k in 0..s.n {
                                prod *= interventions[k].table[a[k]][id[k]][x[k]][od[k]];
                                if prod == 0.0 {
                                    break;
                                }
                            }
                            p += prod;
                        }
                    }
                    p
                })
                .collect()
        })
        .collect();
    Ok((0..s.num_outcomes()).map(|x| cols.iter().map(|c| c[x]).collect()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiEmbedding {
    pub environment: ProcessEnvironment,
    pub interventions: Vec<Intervention>,
}

/// `p(i⃗|o⃗) = p(x⃗ = i⃗ | a⃗ = o⃗)` with copy interventions `x = i`, `o = a`.
pub fn quasi_embed(c: &Correlation) -> Result<QuasiEmbedding, CausalError> {
    c.validate()?;
    let environment = ProcessEnvironment { inputs: vec![c.d; c.n], outputs: vec![c.m; c.n], table: c.table.clone() };
    let interventions = (0..c.n).map(|_| Intervention::copy(c.m, c.d)).collect();
    Ok(QuasiEmbedding { environment, interventions })
}

/// Whether a deterministic joint map has exactly one fixed point `i⃗ = ω(f(i⃗))`
/// under every deterministic reply tuple.
fn unique_fixed_points(map: &[usize], inputs: &[usize], outputs: &[usize], tuples: u64) -> bool {
    let ni: usize = inputs.iter().product();
    let ids: Vec<Vec<usize>> = (0..ni).map(|i| digits(i, inputs)).collect();
    (0..tuples).all(|t| {
        let f = reply_tuple(t, inputs, outputs);
        let mut hits = 0;
        for (i, ds) in ids.iter().enumerate() {
            let o: Vec<usize> = ds.iter().enumerate().map(|(k, &v)| f[k][v]).collect();
            if map[index(&o, outputs)] == i {
                hits += 1;
                if hits > 1 {
                    return false;
                }
            }
        }
        hits == 1
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessEnumeration {
    /// Size of the full candidate space `Π_k |I_k|^{Π_j |O_j|}`.
    pub candidates_total: f64,
    /// Candidates left after discarding tables where `ω_k` reads `o_k`.
    pub candidates_tested: u64,
    pub functions: Vec<ProcessFunction>,
}

/// Truth tables of party `k` that ignore `o_k`, as full tables over `o⃗`.
fn own_output_blind_tables(k: usize, inputs: &[usize], outputs: &[usize]) -> Vec<Vec<usize>> {
    let others: Vec<usize> = outputs.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, &o)| o).collect();
    let cells: usize = others.iter().product();
    let count = inputs[k].pow(cells as u32);
    let no: usize = outputs.iter().product();
    (0..count)
        .map(|t| {
            let table = digits(t, &vec![inputs[k]; cells]);
            (0..no)
                .map(|o| {
                    let mut od = digits(o, outputs);
                    od.remove(k);
                    table[index(&od, &others)]
                })
                .collect()
        })
        .collect()
}

/// Every logically consistent deterministic environment, in lexicographic
/// order of the per-party truth-table numbers.
///
/// A party whose input depends on its own output admits a reply with no
/// fixed point once the others reply with suitable constants, so such
/// tables are skipped before testing.
pub fn enumerate_process_functions(
    inputs: &[usize],
    outputs: &[usize],
) -> Result<ProcessEnumeration, CausalError> {
    if inputs.is_empty() || inputs.len() != outputs.len() {
        return Err(CausalError::ShapeMismatch("one input and one output alphabet per party".into()));
    }
    let no: usize = outputs.iter().product();
    let candidates_total: f64 = inputs.iter().map(|&i| (i as f64).powi(no as i32)).product();
    let per_party: Vec<Vec<Vec<usize>>> =
        (0..inputs.len()).map(|k| own_output_blind_tables(k, inputs, outputs)).collect();
    let tested: f64 = per_party.iter().map(|p| p.len() as f64).product();
    if tested > MAX_CANDIDATES as f64 {
        return Err(too_large("candidate process functions", tested, MAX_CANDIDATES as f64));
    }
    let tuples = reply_tuple_count(inputs, outputs)?;
    let sizes: Vec<usize> = per_party.iter().map(Vec::len).collect();
    let functions: Vec<ProcessFunction> = (0..tested as u64)
        .into_par_iter()
        .filter_map(|c| {
            let pick = digits(c as usize, &sizes);
            let pf = ProcessFunction {
                inputs: inputs.to_vec(),
                outputs: outputs.to_vec(),
                functions: pick.iter().enumerate().map(|(k, &t)| per_party[k][t].clone()).collect(),
            };
            unique_fixed_points(&pf.joint_map(), inputs, outputs, tuples).then_some(pf)
        })
        .collect();
    Ok(ProcessEnumeration { candidates_total, candidates_tested: tested as u64, functions })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum NomicMode {
    Exhaustive,
    Audit { samples: usize, seed: u64 },
}

/// Deterministic local strategy `x_k = g_k(a_k, i_k)`, `o_k = h_k(a_k, i_k)`,
/// tables indexed by `2a_k + i_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinaryStrategy {
    pub g: Vec<[usize; 4]>,
    pub h: Vec<[usize; 4]>,
}

impl BinaryStrategy {
    pub fn interventions(&self) -> Vec<Intervention> {
        self.g
            .iter()
            .zip(&self.h)
            .map(|(g, h)| Intervention::deterministic(2, 2, 2, 2, |a, i| g[2 * a + i], |a, i| h[2 * a + i]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessGameValue {
    pub value: f64,
    pub strategy: BinaryStrategy,
    /// Distinct fixed-point patterns `a⃗ ↦ i⃗` over all `h` tuples.
    pub patterns: usize,
}

fn table4(code: usize) -> [usize; 4] {
    [code & 1, code >> 1 & 1, code >> 2 & 1, code >> 3 & 1]
}

/// Best value of a binary game over deterministic interventions on one
/// process function with binary alphabets.
///
/// Every `h` tuple fixes, per setting, the unique fixed point `i⃗(a⃗)`;
/// for each distinct pattern the first `N − 1` outcome maps are enumerated
/// and the last party best-responds cell by cell.
pub fn process_game_value(g: &GameSpec, pf: &ProcessFunction) -> Result<ProcessGameValue, CausalError> {
    g.validate()?;
    let n = g.n;
    if g.m != 2 || g.d != 2 || pf.inputs != vec![2; n] || pf.outputs != vec![2; n] || n > 3 {
        return Err(CausalError::Unsupported("nomic search needs N ≤ 3 binary parties".into()));
    }
    let map = pf.joint_map();
    let na = 1usize << n;
    let bit = |v: usize, k: usize| v >> (n - 1 - k) & 1;
    let mut first_h: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut order = Vec::new();
    for hcode in 0..16usize.pow(n as u32) {
        let h: Vec<[usize; 4]> = (0..n).map(|k| table4(hcode >> (4 * (n - 1 - k)) & 15)).collect();
        let mut pattern = Vec::with_capacity(na);
        for a in 0..na {
            let mut fixed = None;
            for i in 0..na {
                let o = (0..n).fold(0, |acc, k| acc << 1 | h[k][2 * bit(a, k) + bit(i, k)]);
                if map[o] == i {
                    if fixed.is_some() {
                        return Err(CausalError::InconsistentEnvironment { reply: vec![], mass: 2.0 });
                    }
                    fixed = Some(i);
                }
            }
            pattern.push(fixed.ok_or(CausalError::InconsistentEnvironment { reply: vec![], mass: 0.0 })?);
        }
        if !first_h.contains_key(&pattern) {
            first_h.insert(pattern.clone(), hcode);
            order.push(pattern);
        }
    }
    let score = |a: usize, x: usize| g.prior[a] * g.weights[x][a];
    let mut best: Option<(f64, usize, Vec<[usize; 4]>)> = None;
    for pattern in &order {
        for gcode in 0..16usize.pow(n as u32 - 1) {
            let gs: Vec<[usize; 4]> = (0..n - 1).map(|k| table4(gcode >> (4 * (n - 2 - k)) & 15)).collect();
            // cell (a_N, i_N) → accumulated score for x_N = 0, 1
            let mut cells = [[0.0f64; 2]; 4];
            for (a, &i) in pattern.iter().enumerate() {
                let xs = (0..n - 1).fold(0, |acc, k| acc << 1 | gs[k][2 * bit(a, k) + bit(i, k)]);
                let cell = 2 * bit(a, n - 1) + bit(i, n - 1);
                for xl in 0..2 {
                    cells[cell][xl] += score(a, xs << 1 | xl);
                }
            }
            let value: f64 = cells.iter().map(|c| c[0].max(c[1])).sum();
            if best.as_ref().is_none_or(|b| value > b.0) {
                let mut last = [0; 4];
                for (c, slot) in last.iter_mut().enumerate() {
                    *slot = usize::from(cells[c][1] > cells[c][0]);
                }
                let mut all = gs.clone();
                all.push(last);
                best = Some((value, first_h[pattern], all));
            }
        }
    }
    let (value, hcode, gtab) = best.expect("at least one pattern");
    let h = (0..n).map(|k| table4(hcode >> (4 * (n - 1 - k)) & 15)).collect();
    Ok(ProcessGameValue { value, strategy: BinaryStrategy { g: gtab, h }, patterns: order.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NomicBound {
    pub game: String,
    pub mode: NomicMode,
    pub value: f64,
    pub process: ProcessFunction,
    pub strategy: BinaryStrategy,
    /// Consistent process functions available to the search.
    pub consistent_processes: usize,
    /// Samples drawn (audit) or processes scanned (exhaustive).
    pub samples: usize,
    pub distinct_evaluated: usize,
}

/// Maximum of a binary game over consistent process functions and
/// deterministic interventions. The audit mode evaluates a seeded sample of
/// the consistent list and so reports a lower bound.
pub fn nomic_game_bound(g: &GameSpec, mode: NomicMode) -> Result<NomicBound, CausalError> {
    g.validate()?;
    if g.m != 2 || g.d != 2 || g.n > 3 {
        return Err(CausalError::Unsupported("nomic search needs N ≤ 3 binary parties".into()));
    }
    let n = g.n;
    let all = enumerate_process_functions(&vec![2; n], &vec![2; n])?.functions;
    let (picks, samples): (Vec<usize>, usize) = match mode {
        NomicMode::Exhaustive => ((0..all.len()).collect(), all.len()),
        NomicMode::Audit { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let drawn: BTreeSet<usize> = (0..samples).map(|_| rng.random_range(0..all.len())).collect();
            (drawn.into_iter().collect(), samples)
        }
    };
    let results: Vec<(usize, ProcessGameValue)> = picks
        .par_iter()
        .map(|&p| process_game_value(g, &all[p]).map(|v| (p, v)))
        .collect::<Result<_, _>>()?;
    let (p, best) = results
        .into_iter()
        .reduce(|a, b| if b.1.value > a.1.value { b } else { a })
        .ok_or_else(|| CausalError::Unsupported("no consistent process functions".into()))?;
    Ok(NomicBound {
        game: g.name.clone(),
        mode,
        value: best.value,
        process: all[p].clone(),
        strategy: best.strategy,
        consistent_processes: all.len(),
        samples,
        distinct_evaluated: picks.len(),
    })
}

/// Distinct random consistent process functions drawn by the audit, for
/// external reproduction.
pub fn audit_sample(consistent: usize, samples: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let set: HashSet<usize> = (0..samples).map(|_| rng.random_range(0..consistent)).collect();
    let mut v: Vec<usize> = set.into_iter().collect();
    v.sort_unstable();
    v
}
