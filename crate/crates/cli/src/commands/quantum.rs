use std::collections::BTreeMap;

use qcw_core::invariants::{consistent_exclusivity_check, weighted_max_predictability, EdgeDistribution};
use qcw_core::quantum::{
    builtin_construction, entanglement_flags, identity, noisy_corr_crossing, peres_mermin_audit, simulate_noisy_corr,
    validate_realization, CMatrix, QuantumError, QuantumRealization, Ray, State,
};
use qcw_core::scenario::ContextualityScenario;
use qcw_core::witness::corr_value;
use serde_json::json;

use super::contextuality::{read_scenario, vertex_weights};
use super::Outcome;
use crate::args::{QuantumCmd, RealizationSource};
use crate::error::CliError;
use crate::input::{from_vector, Loader, RayFile, StateFile};

struct Rays {
    scenario: ContextualityScenario,
    rays: Vec<Ray>,
    state: Option<State>,
}

fn load_rays(src: &RealizationSource, loader: &mut Loader) -> Result<Rays, CliError> {
    match (&src.builtin, &src.scenario, &src.rays) {
        (Some(name), _, _) => {
            let c = builtin_construction(name)?;
            Ok(Rays { scenario: c.scenario().clone(), rays: c.realization.rays().to_vec(), state: c.state })
        }
        (None, Some(sp), Some(rp)) => {
            let scenario = read_scenario(sp, loader)?;
            let file: RayFile = loader.read(rp)?;
            let rays = file.ordered(rp, scenario.vertices())?;
            Ok(Rays { scenario, rays, state: None })
        }
        _ => Err(CliError::InvalidInput("give --builtin, or both --scenario and --rays".into())),
    }
}

fn realization(src: &RealizationSource, loader: &mut Loader) -> Result<(QuantumRealization, Option<State>), CliError> {
    let r = load_rays(src, loader)?;
    Ok((validate_realization(&r.scenario, r.rays)?, r.state))
}

/// Largest completeness residual and largest in-hyperedge overlap.
fn residuals(h: &ContextualityScenario, rays: &[Ray]) -> (f64, f64) {
    let d = rays[0].dim();
    let mut completeness = 0.0f64;
    let mut overlap = 0.0f64;
    for e in h.hyperedges() {
        let sum = e.iter().fold(CMatrix::zeros(d, d), |acc, &v| acc + rays[v].projector());
        completeness = completeness.max((sum - identity(d)).norm());
        for (i, &a) in e.iter().enumerate() {
            for &b in &e[i + 1..] {
                overlap = overlap.max(rays[a].inner(&rays[b]).norm());
            }
        }
    }
    (completeness, overlap)
}

fn ray_map(h: &ContextualityScenario, rays: &[Ray]) -> BTreeMap<String, Vec<[f64; 2]>> {
    h.vertices().iter().cloned().zip(rays.iter().map(|r| from_vector(r.amplitudes()))).collect()
}

fn matrix_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn run(cmd: &QuantumCmd, loader: &mut Loader) -> Result<Outcome, CliError> {
    match cmd {
        QuantumCmd::Validate { source } => {
            let r = load_rays(source, loader)?;
            let dims_agree = r.rays.iter().all(|x| x.dim() == r.rays[0].dim());
            let (completeness, overlap) =
                if dims_agree { residuals(&r.scenario, &r.rays) } else { (f64::INFINITY, f64::INFINITY) };
            let dim = r.rays[0].dim();
            match validate_realization(&r.scenario, r.rays) {
                Ok(q) => {
                    let report = json!({
                        "valid": true,
                        "dim": q.dim(),
                        "num_vertices": q.scenario().num_vertices(),
                        "num_hyperedges": q.scenario().num_hyperedges(),
                        "completeness_residual": completeness,
                        "max_overlap": overlap,
                    });
                    let summary = format!("valid realization in dimension {} (residual {completeness:.2e})", q.dim());
                    Ok(Outcome::new(report, summary)?.answer(true))
                }
                Err(
                    e @ (QuantumError::NotComplete { .. }
                    | QuantumError::NotOrthogonal { .. }
                    | QuantumError::DimensionMismatch { .. }),
                ) => {
                    let report = json!({
                        "valid": false,
                        "dim": dim,
                        "failure": e.to_string(),
                        "completeness_residual": completeness,
                        "max_overlap": overlap,
                    });
                    Ok(Outcome::new(report, format!("invalid realization: {e}"))?.answer(false))
                }
                Err(e) => Err(e.into()),
            }
        }
        QuantumCmd::Born { source, state, weights } => {
            let (q, builtin_state) = realization(source, loader)?;
            let rho = match state {
                Some(p) => loader.read::<StateFile>(p)?.state(p)?,
                None => builtin_state
                    .ok_or_else(|| CliError::InvalidInput("this realization has no default state; pass --state".into()))?,
            };
            let h = q.scenario();
            let model = qcw_core::quantum::born_model(&q, &rho)?;
            let ce = consistent_exclusivity_check(h, &model)?;
            let sum: f64 = model.values.iter().sum();
            let weighted = match weights {
                Some(p) => {
                    let w = vertex_weights(h, p, loader)?;
                    Some(w.iter().zip(&model.values).map(|(a, b)| a * b).sum::<f64>())
                }
                None => None,
            };
            let values: BTreeMap<&str, f64> =
                h.vertices().iter().map(String::as_str).zip(model.values.iter().copied()).collect();
            let summary = format!(
                "sum of vertex probabilities {:.9}; consistent exclusivity {}",
                weighted.unwrap_or(sum),
                if ce.consistent { "holds" } else { "fails" }
            );
            let report = json!({ "values": values, "sum": sum, "weighted_sum": weighted, "exclusivity": ce });
            Outcome::new(report, summary)
        }
        QuantumCmd::NoiseSweep { source, steps, target, tol } => {
            if *steps < 2 {
                return Err(CliError::InvalidInput("--steps must be at least 2".into()));
            }
            let (q, _) = realization(source, loader)?;
            let h = q.scenario();
            let edges = EdgeDistribution::uniform(h);
            let target = match target {
                Some(t) => *t,
                None => weighted_max_predictability(h, &edges)?.value,
            };
            let mut points = Vec::with_capacity(*steps);
            for k in 0..*steps {
                let nu = k as f64 / (*steps - 1) as f64;
                let corr = corr_value(h, &edges, &simulate_noisy_corr(&q, nu, None)?)?;
                points.push((nu, corr));
            }
            let monotone = points.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
            let crossing = noisy_corr_crossing(&q, &edges, target, *tol)?;
            let summary = match crossing {
                Some(nu) => format!("Corr falls to {target:.6} at noise {nu:.7}"),
                None => format!("Corr never crosses {target:.6}"),
            };
            let report = json!({
                "target": target,
                "tolerance": tol,
                "points": points.iter().map(|(nu, c)| json!({ "nu": nu, "corr": c })).collect::<Vec<_>>(),
                "monotone": monotone,
                "crossing": crossing,
            });
            Outcome::new(report, summary)
        }
        QuantumCmd::PmAudit => {
            let a = peres_mermin_audit();
            let exact = a.identities.iter().filter(|i| i.exact).count();
            let summary = format!(
                "{exact} of {} identities exact; {} of {} valuations satisfy every constraint",
                a.identities.len(),
                a.satisfying_valuations,
                a.valuations_scanned
            );
            Outcome::new(&a, summary)
        }
        QuantumCmd::Builtin { name } => {
            let c = builtin_construction(name)?;
            let h = c.scenario();
            let rays = c.realization.rays();
            let flags = entanglement_flags(rays, &c.factors)?;
            let entangled: Vec<&str> =
                h.vertices().iter().zip(&flags).filter(|(_, f)| !f.product).map(|(v, _)| v.as_str()).collect();
            let product_hyperedges: Vec<usize> = h
                .hyperedges()
                .iter()
                .enumerate()
                .filter(|(_, e)| e.iter().all(|&v| flags[v].product))
                .map(|(k, _)| k)
                .collect();
            let summary = format!(
                "{}: {} rays in dimension {}, {} entangled",
                c.name,
                rays.len(),
                c.realization.dim(),
                entangled.len()
            );
            let report = json!({
                "name": c.name,
                "dim": c.realization.dim(),
                "factors": c.factors,
                "notes": c.notes,
                "scenario": h.to_raw(),
                "rays": ray_map(h, rays),
                "state": c.state.as_ref().map(|s| json!({ "density": matrix_pairs(s.matrix()) })),
                "entanglement": flags,
                "entangled_rays": entangled,
                "product_hyperedges": product_hyperedges,
            });
            Outcome::new(report, summary)
        }
    }
}
