//! Prepare-and-measure statistics of a realization under white noise on the
//! measurements.

use super::{c64, identity, CMatrix, QuantumError, QuantumRealization, Ray, State};
use crate::invariants::EdgeDistribution;
use crate::witness::{corr_value, PrepareMeasureData};

/// A source emitting `s* ∈ {0, 1}` with `p(s* = 0) = p0`, preparing
/// `states[s*]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialPreparation {
    pub p0: f64,
    pub states: [State; 2],
}

impl SpecialPreparation {
    /// `ρ_0 = |ψ⟩⟨ψ|` with weight `1/d` and `ρ_1` the normalized complement,
    /// so the source averages to the maximally mixed state.
    pub fn balanced(psi: &Ray) -> Result<Self, QuantumError> {
        let d = psi.dim();
        if d < 2 {
            return Err(QuantumError::InvalidState("special source needs dimension ≥ 2".into()));
        }
        let p = psi.projector();
        let rest = (identity(d) - &p) / c64((d - 1) as f64, 0.0);
        Ok(SpecialPreparation { p0: 1.0 / d as f64, states: [State::pure(psi), State::new(rest)?] })
    }
}

/// Effects `(1 − ν)Π_v + ν I/|e|` on every hyperedge; sources are the
/// hyperedge's own rays prepared with prior `1/|e|`.
pub fn simulate_noisy_corr(
    r: &QuantumRealization,
    nu: f64,
    special: Option<&SpecialPreparation>,
) -> Result<PrepareMeasureData, QuantumError> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(QuantumError::InvalidNoise(nu));
    }
    if let Some(sp) = special {
        if sp.states.iter().any(|s| s.dim() != r.dim()) {
            return Err(QuantumError::DimensionMismatch { expected: r.dim(), actual: sp.states[0].dim() });
        }
        if !(0.0..=1.0).contains(&sp.p0) {
            return Err(QuantumError::InvalidState(format!("p0 = {}", sp.p0)));
        }
    }
    let d = r.dim();
    let mut edges = Vec::new();
    let mut specials = Vec::new();
    for e in r.scenario().hyperedges() {
        let n = e.len() as f64;
        let effects: Vec<CMatrix> = e
            .iter()
            .map(|&v| r.rays()[v].projector() * c64(1.0 - nu, 0.0) + identity(d) * c64(nu / n, 0.0))
            .collect();
        let table = effects
            .iter()
            .map(|eff| e.iter().map(|&s| State::pure(&r.rays()[s]).expectation(eff) / n).collect())
            .collect();
        edges.push(table);
        if let Some(sp) = special {
            specials.push(
                effects
                    .iter()
                    .map(|eff| {
                        [sp.p0 * sp.states[0].expectation(eff), (1.0 - sp.p0) * sp.states[1].expectation(eff)]
                    })
                    .collect(),
            );
        }
    }
    Ok(PrepareMeasureData { edges, special: special.map(|_| specials) })
}

/// Noise level at which `Corr` falls to `target`, by bisection to width
/// `tol`. `Corr` is affine and decreasing in `ν`.
pub fn noisy_corr_crossing(
    r: &QuantumRealization,
    q: &EdgeDistribution,
    target: f64,
    tol: f64,
) -> Result<Option<f64>, QuantumError> {
    let corr = |nu: f64| -> Result<f64, QuantumError> {
        let data = simulate_noisy_corr(r, nu, None)?;
        Ok(corr_value(r.scenario(), q, &data)?)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if corr(lo)? < target || corr(hi)? > target {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if corr(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::builtin_construction;

    #[test]
    fn noiseless_is_perfectly_correlated() {
        let c = builtin_construction("cega18").unwrap();
        let q = EdgeDistribution::uniform(c.scenario());
        let d = simulate_noisy_corr(&c.realization, 0.0, None).unwrap();
        assert!((corr_value(c.scenario(), &q, &d).unwrap() - 1.0).abs() < 1e-12);
        let d = simulate_noisy_corr(&c.realization, 1.0, None).unwrap();
        assert!((corr_value(c.scenario(), &q, &d).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn crossing_matches_affine_formula() {
        let c = builtin_construction("cega18").unwrap();
        let q = EdgeDistribution::uniform(c.scenario());
        let nu = noisy_corr_crossing(&c.realization, &q, 5.0 / 6.0, 1e-9).unwrap().unwrap();
        assert!((nu - 2.0 / 9.0).abs() < 1e-8);
        assert_eq!(noisy_corr_crossing(&c.realization, &q, 0.1, 1e-9).unwrap(), None);
    }

    #[test]
    fn rejects_bad_noise() {
        let c = builtin_construction("kcbs").unwrap();
        assert!(matches!(simulate_noisy_corr(&c.realization, 1.5, None), Err(QuantumError::InvalidNoise(_))));
    }

    #[test]
    fn balanced_source_averages_to_mixed() {
        let psi = Ray::real(&[0.0, 0.0, 1.0]).unwrap();
        let sp = SpecialPreparation::balanced(&psi).unwrap();
        let avg = sp.states[0].matrix() * c64(sp.p0, 0.0) + sp.states[1].matrix() * c64(1.0 - sp.p0, 0.0);
        assert!((avg - identity(3) / c64(3.0, 0.0)).norm() < 1e-12);
    }
}
