use qcw_core::lopf::{
    correspondence_table, gram_deviation, no_global_past, protocol_distribution, s_omega_basis,
    BooleanProcessFunction, StateVector,
};
use serde_json::json;

use super::Outcome;
use crate::args::{LopfCmd, OmegaSource};
use crate::error::CliError;
use crate::input::Loader;

fn load_omega(src: &OmegaSource, loader: &mut Loader) -> Result<BooleanProcessFunction, CliError> {
    match &src.omega {
        Some(p) => {
            let w: BooleanProcessFunction = loader.read(p)?;
            Ok(BooleanProcessFunction::new(w.tables)?)
        }
        None => Ok(BooleanProcessFunction::afbw()),
    }
}

pub fn run(cmd: &LopfCmd, loader: &mut Loader) -> Result<Outcome, CliError> {
    match cmd {
        LopfCmd::Shift { omega, input: Some(label) } => {
            let w = load_omega(omega, loader)?;
            let psi = StateVector::product(label)?;
            let records = protocol_distribution(&psi, &w)?;
            let deterministic = matches!(records.as_slice(), [r] if (r.probability - 1.0).abs() <= 1e-12);
            let summary = if deterministic {
                format!("{label} identified as basis element {}", records[0].identified)
            } else {
                format!("{label} is not a basis element; {} outcomes", records.len())
            };
            Outcome::new(json!({ "input": label, "records": records, "deterministic": deterministic }), summary)
        }
        LopfCmd::Shift { omega, input: None } => {
            let w = load_omega(omega, loader)?;
            let rows = correspondence_table(&w)?;
            let summary = format!("{} rows in the correspondence table", rows.len());
            Outcome::new(json!({ "no_global_past": no_global_past(&w)?, "rows": rows }), summary)
        }
        LopfCmd::Basis { omega } => {
            let w = load_omega(omega, loader)?;
            let basis = s_omega_basis(&w)?;
            let (i, j, dev) = gram_deviation(&basis);
            let states: Vec<_> = basis
                .iter()
                .enumerate()
                .map(|(k, s)| json!({ "index": k, "label": s.product_label(), "amplitudes": s.amplitudes }))
                .collect();
            let summary = format!("{} basis states; Gram deviation {dev:.2e}", basis.len());
            let report = json!({
                "states": states,
                "gram_deviation": { "value": dev, "at": [i, j] },
            });
            Outcome::new(report, summary)
        }
    }
}
