use qcw_core::jointmeas::{
    jm_feasible, jm_threshold, marginal_surgery, pentagon_bounds, pentagonal_value, BinaryQubitPovm, JmError,
    NoisyFamily, PentagonalModel, SurgeryTarget,
};
use serde_json::json;

use super::Outcome;
use crate::args::{JmCmd, TargetArg};
use crate::error::CliError;
use crate::input::{to_matrix, violation, Loader, PovmFile};

pub fn run(cmd: &JmCmd, loader: &mut Loader) -> Result<Outcome, CliError> {
    match cmd {
        JmCmd::Feasible { povms } => {
            let f: PovmFile = loader.read(povms)?;
            let mut family = Vec::new();
            for (k, e) in f.effects.iter().enumerate() {
                let at = format!("/effects/{k}");
                let m = to_matrix(povms, &at, e)?;
                family.push(BinaryQubitPovm::new(m).map_err(|e| violation(povms, at, e))?);
            }
            for (k, n) in f.noisy.iter().enumerate() {
                family.push(BinaryQubitPovm::noisy(n.axis, n.eta).map_err(|e| violation(povms, format!("/noisy/{k}"), e))?);
            }
            let v = jm_feasible(&family)?;
            let summary = format!(
                "{} POVMs are {} (margin {:.3e})",
                family.len(),
                if v.feasible { "jointly measurable" } else { "incompatible" },
                v.min_eigenvalue_margin
            );
            let joint = v.joint.as_ref().map(|j| j.effects_as_pairs());
            let feasible = v.feasible;
            Ok(Outcome::new(json!({ "verdict": v, "joint_effects": joint }), summary)?.answer(feasible))
        }
        JmCmd::Threshold { paulis, planar } => {
            let family = match (paulis, planar) {
                (Some(ks), _) => {
                    if ks.iter().any(|k| !(1..=3).contains(k)) {
                        return Err(CliError::InvalidInput("Pauli indices are 1, 2, 3".into()));
                    }
                    NoisyFamily::paulis(ks)
                }
                (None, Some(n)) => NoisyFamily::planar(*n),
                (None, None) => return Err(CliError::InvalidInput("give --paulis or --planar".into())),
            };
            let t = jm_threshold(&family)?;
            let summary = format!("eta* = {:.6} in [{:.6}, {:.6}]", t.eta, t.feasible_below, t.infeasible_above);
            Outcome::new(json!({ "axes": family.axes, "threshold": t }), summary)
        }
        JmCmd::Surgery { target, n } => {
            let target = match target {
                TargetArg::Specker => SurgeryTarget::Specker,
                TargetArg::Cycle => SurgeryTarget::Cycle,
            };
            match marginal_surgery(target, *n) {
                Ok(s) => {
                    let summary =
                        format!("{} subsets match the target pattern at eta = {:.6}", s.checks.len(), s.eta);
                    let report = json!({
                        "target": s.target,
                        "n": n,
                        "eta": s.eta,
                        "axes": s.family.axes,
                        "compatible": s.structure.compatible_sets(),
                        "checks": s.checks,
                        "verified": true,
                    });
                    Ok(Outcome::new(report, summary)?.answer(true))
                }
                Err(e @ JmError::VerificationFailed { .. }) => {
                    let report = json!({ "target": target, "n": n, "verified": false, "failure": e.to_string() });
                    Ok(Outcome::new(report, e.to_string())?.answer(false))
                }
                Err(e) => Err(e.into()),
            }
        }
        JmCmd::Pentagon { model } => {
            let bounds = pentagon_bounds()?;
            let value = match model {
                Some(p) => {
                    let m: PentagonalModel = loader.read(p)?;
                    m.validate()?;
                    Some(pentagonal_value(&m)?)
                }
                None => None,
            };
            let mut summary =
                format!("deterministic max {}, pairwise-model max {}", bounds.deterministic_max, bounds.general_max);
            if let Some(v) = value {
                summary += &format!(", model value {v:.9}");
            }
            Outcome::new(json!({ "bounds": bounds, "model_value": value }), summary)
        }
    }
}
