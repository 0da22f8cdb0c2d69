use std::sync::OnceLock;

use proptest::prelude::*;
use qcw_core::invariants::{consistent_exclusivity_check, EdgeDistribution};
use qcw_core::quantum::{
    born_model, builtin_construction, c64, entanglement_flags, peres_mermin_audit, simulate_noisy_corr, CMatrix,
    Construction, Ray, State,
};
use qcw_core::witness::corr_value;

fn construction(name: &'static str) -> &'static Construction {
    static CELLS: OnceLock<Vec<Construction>> = OnceLock::new();
    let all = CELLS.get_or_init(|| {
        ["cega18", "kcbs", "peres24", "shift"].iter().map(|n| builtin_construction(n).unwrap()).collect()
    });
    all.iter().find(|c| c.name == name).unwrap()
}

fn random_state(re: &[f64], im: &[f64], d: usize) -> State {
    let g = CMatrix::from_fn(d, d, |i, j| c64(re[i * d + j], im[i * d + j]));
    let rho = &g * g.adjoint();
    let t = rho.trace();
    State::new(rho / t).unwrap()
}

fn random_unitary(re: &[f64], im: &[f64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| c64(re[i * d + j], im[i * d + j])).qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn born_models_are_normalized_and_exclusive(
        which in 0usize..3,
        re in proptest::collection::vec(-1.0f64..1.0, 64),
        im in proptest::collection::vec(-1.0f64..1.0, 64),
    ) {
        let c = construction(["cega18", "kcbs", "peres24"][which]);
        let r = &c.realization;
        let rho = random_state(&re, &im, r.dim());
        let p = born_model(r, &rho).unwrap();
        for e in r.scenario().hyperedges() {
            let s: f64 = e.iter().map(|&v| p.values[v]).sum();
            prop_assert!((s - 1.0).abs() <= 1e-10);
        }
        prop_assert!(consistent_exclusivity_check(r.scenario(), &p).unwrap().consistent);
    }

    #[test]
    fn entanglement_flags_survive_local_unitaries(
        re in proptest::collection::vec(-1.0f64..1.0, 8),
        im in proptest::collection::vec(-1.0f64..1.0, 8),
    ) {
        for name in ["peres24", "shift"] {
            let c = construction(name);
            let mut u = CMatrix::identity(1, 1);
            for (k, &d) in c.factors.iter().enumerate() {
                let off = (k * 4) % 8;
                u = u.kronecker(&random_unitary(&re[off..off + 4], &im[off..off + 4], d));
            }
            let rotated: Vec<Ray> = c
                .realization
                .rays()
                .iter()
                .map(|r| {
                    let v = &u * CMatrix::from_column_slice(r.dim(), 1, r.amplitudes());
                    Ray::new(v.iter().copied().collect()).unwrap()
                })
                .collect();
            let before = entanglement_flags(c.realization.rays(), &c.factors).unwrap();
            let after = entanglement_flags(&rotated, &c.factors).unwrap();
            for (a, b) in before.iter().zip(&after) {
                prop_assert_eq!(a.product, b.product);
            }
        }
    }
}

#[test]
fn pauli_identities_are_exact() {
    let audit = peres_mermin_audit();
    assert!(audit.identities.iter().all(|i| i.exact && i.residual == 0.0));
}

#[test]
fn noisy_corr_is_nonincreasing() {
    for name in ["cega18", "kcbs"] {
        let r = &construction(name).realization;
        let q = EdgeDistribution::uniform(r.scenario());
        let values: Vec<f64> = (0..=50)
            .map(|i| corr_value(r.scenario(), &q, &simulate_noisy_corr(r, f64::from(i) / 50.0, None).unwrap()).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}
