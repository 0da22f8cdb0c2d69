use std::collections::BTreeMap;
use std::path::Path;

use qcw_core::causality::{
    builtin_game, causal_bound, correlation_from_process, correlation_from_process_unchecked,
    deterministic_causal_vertices, enumerate_process_functions, game_value, is_causal, nomic_game_bound,
    process_consistency, process_game_value, quasi_embed, BinaryStrategy, Correlation, CorrelationalScenario,
    GameSpec, Intervention, NomicBound, NomicMode, ProcessEnvironment, ProcessFunction, BUILTIN_GAMES,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Outcome;
use crate::args::{CausalCmd, GameSource, NomicArgs, ProcessCmd, ProcessSource};
use crate::error::CliError;
use crate::input::{parse, sha256_hex, InterventionFile, Loader, ProcessFile};

fn parse_scenario(s: &str) -> Result<CorrelationalScenario, CliError> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::InvalidInput(format!("scenario `{s}` is not N,M,D")))?;
    match parts.as_slice() {
        [n, m, d] => Ok(CorrelationalScenario::new(*n, *m, *d)?),
        _ => Err(CliError::InvalidInput(format!("scenario `{s}` is not N,M,D"))),
    }
}

fn load_game(src: &GameSource, loader: &mut Loader) -> Result<GameSpec, CliError> {
    match (&src.game, &src.game_file) {
        (Some(name), _) => Ok(builtin_game(name)?),
        (None, Some(p)) => {
            let g: GameSpec = loader.read(p)?;
            g.validate()?;
            Ok(g)
        }
        (None, None) => Err(CliError::InvalidInput("give --game or --game-file".into())),
    }
}

fn load_correlation(path: &Path, loader: &mut Loader) -> Result<Correlation, CliError> {
    let c: Correlation = loader.read(path)?;
    c.validate()?;
    Ok(c)
}

fn builtin_environment(name: &str) -> Result<ProcessEnvironment, CliError> {
    match name {
        "afbw" => Ok(ProcessEnvironment::afbw()),
        "bfw" => Ok(ProcessEnvironment::bfw()),
        "identity-loop" => Ok(ProcessEnvironment::identity_loop()),
        other => Err(CliError::InvalidInput(format!("unknown environment `{other}` (afbw, bfw, identity-loop)"))),
    }
}

fn load_environment(src: &ProcessSource, loader: &mut Loader) -> Result<ProcessEnvironment, CliError> {
    match (&src.process, &src.builtin) {
        (Some(p), _) => {
            let f: ProcessFile = loader.read(p)?;
            let env = f.environment(p)?;
            env.validate()?;
            Ok(env)
        }
        (None, Some(name)) => builtin_environment(name),
        (None, None) => Err(CliError::InvalidInput("give --process or --builtin".into())),
    }
}

fn load_function(src: &ProcessSource, loader: &mut Loader) -> Result<Option<ProcessFunction>, CliError> {
    match (&src.process, &src.builtin) {
        (Some(p), _) => {
            let f: ProcessFile = loader.read(p)?;
            Ok(Some(f.function(p)?))
        }
        (None, Some(name)) => {
            let env = builtin_environment(name)?;
            ProcessFunction::from_environment(&env)
                .map(Some)
                .ok_or_else(|| CliError::InvalidInput(format!("`{name}` is not deterministic")))
        }
        (None, None) => Ok(None),
    }
}

pub fn causal(cmd: &CausalCmd, loader: &mut Loader) -> Result<Outcome, CliError> {
    match cmd {
        CausalCmd::Vertices { scenario, list } => {
            let s = parse_scenario(scenario)?;
            let vs = deterministic_causal_vertices(s)?;
            let summary = format!("{} deterministic causal vertices for ({},{},{})", vs.len(), s.n, s.m, s.d);
            let report = json!({
                "scenario": s,
                "count": vs.len(),
                "vertices": list.then_some(&vs),
            });
            Outcome::new(report, summary)
        }
        CausalCmd::Bound { game, scenario } => {
            let g = load_game(game, loader)?;
            if let Some(s) = scenario {
                let s = parse_scenario(s)?;
                if s != g.scenario() {
                    return Err(CliError::InvalidInput(format!(
                        "game `{}` lives in ({},{},{})",
                        g.name, g.n, g.m, g.d
                    )));
                }
            }
            let b = causal_bound(&g)?;
            let summary = format!("causal bound of {}: {} over {} vertices", b.game, b.value, b.vertex_count);
            Outcome::new(&b, summary)
        }
        CausalCmd::Check { correlation, embed } => {
            let c = load_correlation(correlation, loader)?;
            let v = is_causal(&c)?;
            let embedding = if *embed {
                let q = quasi_embed(&c)?;
                let table = correlation_from_process_unchecked(&q.environment, &q.interventions, c.scenario())?;
                let deviation = table
                    .iter()
                    .flatten()
                    .zip(c.table.iter().flatten())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let consistency = process_consistency(&q.environment)?;
                Some(json!({ "embedding": q, "reproduction_deviation": deviation, "consistency": consistency }))
            } else {
                None
            };
            let summary = if v.causal {
                "correlation is causal".to_string()
            } else {
                let ineq = v.inequality.as_ref().expect("separating inequality");
                format!("correlation is noncausal: value {:.6} exceeds bound {:.6}", ineq.value, ineq.bound)
            };
            let causal = v.causal;
            Ok(Outcome::new(json!({ "verdict": v, "quasi_embedding": embedding }), summary)?.answer(!causal))
        }
        CausalCmd::Game { game, correlation } => {
            let g = load_game(game, loader)?;
            let c = load_correlation(correlation, loader)?;
            let value = game_value(&g, &c)?;
            Outcome::new(json!({ "game": g.name, "value": value }), format!("{} value {value}", g.name))
        }
    }
}

fn builtin_game_values(c: &Correlation) -> Result<BTreeMap<&'static str, f64>, CliError> {
    let mut out = BTreeMap::new();
    for name in BUILTIN_GAMES {
        let g = builtin_game(name)?;
        if g.scenario() == c.scenario() {
            out.insert(name, game_value(&g, c)?);
        }
    }
    Ok(out)
}

pub fn process(cmd: &ProcessCmd, loader: &mut Loader) -> Result<Outcome, CliError> {
    match cmd {
        ProcessCmd::Check { source } => {
            let env = load_environment(source, loader)?;
            let v = process_consistency(&env)?;
            let summary = match &v.violation {
                None => format!("consistent: all {} reply tuples have mass 1", v.reply_tuples_checked),
                Some(bad) => format!("inconsistent: reply tuple {:?} has mass {}", bad.reply, bad.mass),
            };
            let consistent = v.consistent;
            let report = json!({ "inputs": env.inputs, "outputs": env.outputs, "verdict": v });
            Ok(Outcome::new(report, summary)?.answer(consistent))
        }
        ProcessCmd::Correlate { source, interventions, copy, settings, check_causal } => {
            let env = load_environment(source, loader)?;
            let ivs: Vec<Intervention> = match (interventions, copy) {
                (Some(p), _) => loader.read::<InterventionFile>(p)?.interventions,
                (None, true) => env.inputs.iter().map(|&d| Intervention::copy(*settings, d)).collect(),
                (None, false) => return Err(CliError::InvalidInput("give --interventions or --copy".into())),
            };
            for iv in &ivs {
                iv.validate()?;
            }
            let (m, d) = ivs.first().map(|iv| (iv.shape().0, iv.shape().2)).unwrap_or((0, 0));
            if ivs.iter().any(|iv| iv.shape().0 != m || iv.shape().2 != d) {
                return Err(CliError::InvalidInput("every party needs the same setting and outcome alphabets".into()));
            }
            let s = CorrelationalScenario::new(env.parties(), m, d)?;
            let c = correlation_from_process(&env, &ivs, s)?;
            let games = builtin_game_values(&c)?;
            let verdict = if *check_causal { Some(is_causal(&c)?) } else { None };
            let mut summary = format!("correlation over ({},{},{})", s.n, s.m, s.d);
            for (g, v) in &games {
                summary += &format!(", {g} {v}");
            }
            if let Some(v) = &verdict {
                summary += if v.causal { ", causal" } else { ", noncausal" };
            }
            Outcome::new(json!({ "correlation": c, "games": games, "causal": verdict }), summary)
        }
        ProcessCmd::Enumerate { parties, alphabet, list } => {
            let alphabets = vec![*alphabet; *parties];
            let e = enumerate_process_functions(&alphabets, &alphabets)?;
            let summary = format!(
                "{} consistent process functions among {} candidates",
                e.functions.len(),
                e.candidates_total
            );
            // Exact integer while it fits in a double's mantissa.
            let total = if e.candidates_total < 2f64.powi(53) { json!(e.candidates_total as u64) } else { json!(e.candidates_total) };
            let report = json!({
                "parties": parties,
                "alphabet": alphabet,
                "candidates_total": total,
                "candidates_tested": e.candidates_tested,
                "consistent": e.functions.len(),
                "functions": list.then_some(&e.functions),
            });
            Outcome::new(report, summary)
        }
        ProcessCmd::NomicBound(a) => nomic(a, loader),
    }
}

fn nomic_outcome(b: NomicBound, note: &str) -> Result<Outcome, CliError> {
    let summary = format!(
        "best {} value {} over {} of {} consistent process functions{note}",
        b.game, b.value, b.distinct_evaluated, b.consistent_processes
    );
    Outcome::new(&b, summary)
}

fn nomic(a: &NomicArgs, loader: &mut Loader) -> Result<Outcome, CliError> {
    let g = load_game(&a.game, loader)?;
    if let Some(pf) = load_function(&a.source, loader)? {
        let v = process_game_value(&g, &pf)?;
        let summary = format!("{} value {} for the given process function", g.name, v.value);
        return Outcome::new(json!({ "game": g.name, "process": pf, "result": v }), summary);
    }
    match (a.exhaustive, a.samples) {
        (true, _) => match &a.state {
            Some(state) => checkpointed_search(&g, state, a.chunk.max(1), a.budget_chunks),
            None => nomic_outcome(nomic_game_bound(&g, NomicMode::Exhaustive)?, ""),
        },
        (false, Some(samples)) => {
            nomic_outcome(nomic_game_bound(&g, NomicMode::Audit { samples, seed: a.seed })?, "")
        }
        (false, None) => {
            Err(CliError::InvalidInput("give --exhaustive, --samples, or a single --process/--builtin".into()))
        }
    }
}

/// Progress of an exhaustive nomic search, saved between chunks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomicCheckpoint {
    /// Digest of the game the search belongs to.
    pub game_sha256: String,
    pub consistent_processes: usize,
    /// Index of the next process function to evaluate.
    pub next: usize,
    pub best: Option<CheckpointBest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointBest {
    pub index: usize,
    pub value: f64,
    pub g: Vec<[usize; 4]>,
    pub h: Vec<[usize; 4]>,
}

fn game_digest(g: &GameSpec) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(g).map_err(|e| CliError::Computation(e.to_string()))?;
    Ok(sha256_hex(&bytes))
}

fn save_checkpoint(path: &Path, c: &NomicCheckpoint) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let text = serde_json::to_string_pretty(c).map_err(|e| CliError::Computation(e.to_string()))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Same search and tie rule as the in-memory exhaustive mode, evaluated in
/// chunks with the running maximum written to `state` after each one.
fn checkpointed_search(
    g: &GameSpec,
    state: &Path,
    chunk: usize,
    budget: Option<usize>,
) -> Result<Outcome, CliError> {
    g.validate()?;
    let all = enumerate_process_functions(&vec![2; g.n], &vec![2; g.n])?.functions;
    let digest = game_digest(g)?;
    let mut cp = match std::fs::read(state) {
        Ok(bytes) => {
            let cp: NomicCheckpoint = parse(state, &bytes)?;
            if cp.game_sha256 != digest || cp.consistent_processes != all.len() {
                return Err(CliError::InvalidInput(format!(
                    "{} belongs to a different search",
                    state.display()
                )));
            }
            cp
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            NomicCheckpoint { game_sha256: digest, consistent_processes: all.len(), next: 0, best: None }
        }
        Err(source) => return Err(CliError::Io { path: state.to_path_buf(), source }),
    };
    let resumed_at = cp.next;
    let mut chunks = 0;
    while cp.next < all.len() {
        if budget.is_some_and(|b| chunks >= b) {
            return Err(CliError::ResourceBound(format!(
                "chunk budget spent after {} of {} process functions; progress saved to {}",
                cp.next,
                all.len(),
                state.display()
            )));
        }
        let end = (cp.next + chunk).min(all.len());
        let results = (cp.next..end)
            .into_par_iter()
            .map(|p| process_game_value(g, &all[p]).map(|v| (p, v)))
            .collect::<Result<Vec<_>, _>>()?;
        for (p, v) in results {
            if cp.best.as_ref().is_none_or(|b| v.value > b.value) {
                cp.best = Some(CheckpointBest { index: p, value: v.value, g: v.strategy.g, h: v.strategy.h });
            }
        }
        cp.next = end;
        chunks += 1;
        save_checkpoint(state, &cp)?;
    }
    let best = cp.best.ok_or_else(|| CliError::Computation("no consistent process functions".into()))?;
    let bound = NomicBound {
        game: g.name.clone(),
        mode: NomicMode::Exhaustive,
        value: best.value,
        process: all[best.index].clone(),
        strategy: BinaryStrategy { g: best.g, h: best.h },
        consistent_processes: all.len(),
        samples: all.len(),
        distinct_evaluated: all.len(),
    };
    let note = if resumed_at > 0 { format!(" (resumed at {resumed_at})") } else { String::new() };
    nomic_outcome(bound, &note)
}
