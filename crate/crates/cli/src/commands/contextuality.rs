use std::collections::BTreeMap;
use std::path::Path;

use qcw_core::invariants::{invariant_report, EdgeDistribution};
use qcw_core::quantum::{builtin_construction, CMatrix};
use qcw_core::scenario::{
    enumerate_ks_colorings, gamma18, gamma5, orthogonality_graph, specker_decomposition, validate_jms,
    validate_scenario, ContextualityScenario, RawJms, RawScenario,
};
use qcw_core::witness::{
    best_classical_code, logical_witness, one_shot_success, statistical_witness, OneShotTask, PrepareMeasureData,
    WitnessReport,
};
use serde_json::json;

use super::Outcome;
use crate::args::{EdgeWeights, InvariantsArgs, ScenarioCmd, ScenarioSource, StatisticalArgs, WitnessCmd};
use crate::error::CliError;
use crate::input::{jms_pointer, scenario_pointer, to_matrix, violation, ComplexMatrix, Loader, TaskFile};

pub(crate) fn builtin_scenario(name: &str) -> Result<ContextualityScenario, CliError> {
    match name {
        "gamma18" => Ok(validate_scenario(&gamma18())?),
        "gamma5" => Ok(validate_scenario(&gamma5())?),
        other => Ok(builtin_construction(other)?.scenario().clone()),
    }
}

pub(crate) fn read_scenario(path: &Path, loader: &mut Loader) -> Result<ContextualityScenario, CliError> {
    let raw: RawScenario = loader.read(path)?;
    validate_scenario(&raw).map_err(|e| match scenario_pointer(&raw, &e) {
        Some(p) => violation(path, p, e),
        None => e.into(),
    })
}

pub(crate) fn load_scenario(src: &ScenarioSource, loader: &mut Loader) -> Result<ContextualityScenario, CliError> {
    match (&src.scenario, &src.builtin) {
        (Some(p), _) => read_scenario(p, loader),
        (None, Some(name)) => builtin_scenario(name),
        (None, None) => Err(CliError::InvalidInput("one of --scenario and --builtin is required".into())),
    }
}

pub(crate) fn edge_distribution(h: &ContextualityScenario, e: &EdgeWeights) -> Result<EdgeDistribution, CliError> {
    match &e.q {
        Some(q) => Ok(EdgeDistribution::new(h, q.clone())?),
        None => Ok(EdgeDistribution::uniform(h)),
    }
}

pub(crate) fn vertex_weights(h: &ContextualityScenario, path: &Path, loader: &mut Loader) -> Result<Vec<f64>, CliError> {
    let map: BTreeMap<String, f64> = loader.read(path)?;
    if let Some(extra) = map.keys().find(|k| h.vertex_index(k).is_none()) {
        return Err(violation(path, format!("/{extra}"), "vertex is not in the scenario"));
    }
    h.vertices()
        .iter()
        .map(|v| match map.get(v) {
            Some(&w) if w.is_finite() && w >= 0.0 => Ok(w),
            Some(_) => Err(violation(path, format!("/{v}"), "weight must be finite and nonnegative")),
            None => Err(violation(path, "", format!("no weight for vertex `{v}`"))),
        })
        .collect()
}

fn scenario_summary(h: &ContextualityScenario) -> Result<serde_json::Value, CliError> {
    let g = orthogonality_graph(h, None)?;
    let names = |e: &Vec<usize>| e.iter().map(|&v| h.vertices()[v].clone()).collect::<Vec<_>>();
    Ok(json!({
        "vertices": h.vertices(),
        "hyperedges": h.hyperedges().iter().map(names).collect::<Vec<_>>(),
        "num_vertices": h.num_vertices(),
        "num_hyperedges": h.num_hyperedges(),
        "exclusivity_edges": g.edges().len(),
    }))
}

pub fn scenario(cmd: &ScenarioCmd, loader: &mut Loader) -> Result<Outcome, CliError> {
    match cmd {
        ScenarioCmd::Validate { jms: Some(path), .. } => {
            let raw: RawJms = loader.read(path)?;
            let v = validate_jms(&raw).map_err(|e| match jms_pointer(&raw, &e) {
                Some(p) => violation(path, p, e),
                None => e.into(),
            })?;
            let specker = specker_decomposition(&v.structure)?;
            let summary = format!(
                "valid structure on {} measurements, {} minimal incompatible subsets",
                v.structure.vertices().len(),
                specker.len()
            );
            let report = json!({
                "vertices": v.structure.vertices(),
                "compatible_sets": v.structure.compatible_masks().len(),
                "closure_added": v.closure_added,
                "trivial": v.structure.is_trivial(),
                "minimal_incompatible": specker,
            });
            Outcome::new(report, summary)
        }
        ScenarioCmd::Validate { source, .. } => {
            let h = load_scenario(source, loader)?;
            let summary = format!("valid scenario: {} vertices, {} hyperedges", h.num_vertices(), h.num_hyperedges());
            Outcome::new(scenario_summary(&h)?, summary)
        }
        ScenarioCmd::Colorings { source, limit } => {
            let h = load_scenario(source, loader)?;
            let found = enumerate_ks_colorings(&h, *limit)?;
            let colorings: Vec<Vec<&str>> = found.iter().map(|c| c.ones(&h).collect()).collect();
            let summary = match found.len() {
                0 => "no KS-colouring exists".to_string(),
                n => format!("{n} KS-colourings"),
            };
            let report = json!({
                "count": found.len(),
                "colorings": colorings,
                "limit": limit,
            });
            Ok(Outcome::new(report, summary)?.answer(!found.is_empty()))
        }
    }
}

pub fn invariants(a: &InvariantsArgs, loader: &mut Loader) -> Result<Outcome, CliError> {
    let h = load_scenario(&a.source, loader)?;
    let w = a.weights.as_deref().map(|p| vertex_weights(&h, p, loader)).transpose()?;
    let q = if a.no_beta { None } else { Some(edge_distribution(&h, &a.edges)?) };
    let r = invariant_report(&h, w.as_deref(), q.as_ref())?;
    let mut summary = format!("alpha {} theta {:.6} alpha* {:.6}", r.alpha, r.theta, r.alpha_star);
    if let Some(b) = &r.beta {
        summary += &format!(" beta {}", b.exact.clone().unwrap_or_else(|| b.value.to_string()));
    }
    Outcome::new(&r, summary)
}

fn witness_outcome(r: WitnessReport) -> Result<Outcome, CliError> {
    let summary = format!(
        "{} {:.6} vs bound {:.6}: {}",
        if r.p0.is_some() { "R" } else { "Corr" },
        r.lhs,
        r.bound,
        if r.violated { "violated" } else { "not violated" }
    );
    let violated = r.violated;
    Ok(Outcome::new(&r, summary)?.answer(violated))
}

pub fn witness(cmd: &WitnessCmd, loader: &mut Loader) -> Result<Outcome, CliError> {
    match cmd {
        WitnessCmd::Logical { source, data, edges } => {
            let h = load_scenario(source, loader)?;
            let d: PrepareMeasureData = loader.read(data)?;
            let q = edge_distribution(&h, edges)?;
            witness_outcome(logical_witness(&h, &q, &d, None)?)
        }
        WitnessCmd::Statistical(a) => statistical(a, loader),
        WitnessCmd::Oneshot { task } => {
            let t: TaskFile = loader.read(task)?;
            let mats = |ms: &[Vec<ComplexMatrix>], at: &str| -> Result<Vec<Vec<CMatrix>>, CliError> {
                ms.iter()
                    .enumerate()
                    .map(|(i, m)| {
                        m.iter().enumerate().map(|(j, x)| to_matrix(task, &format!("/{at}/{i}/{j}"), x)).collect()
                    })
                    .collect()
            };
            let ot = OneShotTask {
                channel: t.channel.clone(),
                prior: t.prior.clone(),
                state: to_matrix(task, "/state", &t.state)?,
                dims: (t.dims[0], t.dims[1]),
                encodings: mats(&t.encodings, "encodings")?,
                decodings: mats(&t.decodings, "decodings")?,
            };
            let success = one_shot_success(&ot)?;
            let classical = best_classical_code(&t.channel, &t.prior)?;
            let summary = format!("assisted success {success:.6}, best classical code {:.6}", classical.value);
            let report = json!({
                "success": success,
                "classical": classical,
                "advantage": success - classical.value,
            });
            Outcome::new(report, summary)
        }
    }
}

fn statistical(a: &StatisticalArgs, loader: &mut Loader) -> Result<Outcome, CliError> {
    if let (Some(alpha), Some(alpha_star), Some(beta), Some(p0), Some(corr), Some(r)) =
        (a.alpha, a.alpha_star, a.beta, a.p0, a.corr, a.r)
    {
        return witness_outcome(WitnessReport::statistical(r, corr, alpha, alpha_star, beta, p0)?);
    }
    let h = load_scenario(&a.source, loader)?;
    let data = a.data.as_deref().ok_or_else(|| CliError::InvalidInput("--data is required".into()))?;
    let d: PrepareMeasureData = loader.read(data)?;
    let w = match a.weights.as_deref() {
        Some(p) => vertex_weights(&h, p, loader)?,
        None => vec![1.0; h.num_vertices()],
    };
    let q = edge_distribution(&h, &a.edges)?;
    witness_outcome(statistical_witness(&h, &q, &w, &d, None)?)
}
