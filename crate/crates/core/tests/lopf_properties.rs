use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use qcw_core::causality::enumerate_process_functions;
use qcw_core::lopf::{no_global_past, protocol_distribution, s_omega_basis, shift_protocol_sim, BooleanProcessFunction, StateVector};
use qcw_core::quantum::c64;

/// Tripartite Boolean process functions in which every party can be
/// signalled to.
fn candidates() -> &'static [BooleanProcessFunction] {
    static CELL: OnceLock<Vec<BooleanProcessFunction>> = OnceLock::new();
    CELL.get_or_init(|| {
        enumerate_process_functions(&[2; 3], &[2; 3])
            .unwrap()
            .functions
            .iter()
            .map(|pf| {
                BooleanProcessFunction::new(pf.functions.iter().map(|f| f.iter().map(|&b| b as u8).collect()).collect())
                    .unwrap()
            })
            .filter(|w| no_global_past(w).unwrap())
            .collect()
    })
}

fn qubit(theta: f64, phi: f64) -> [qcw_core::quantum::C64; 2] {
    [c64((theta / 2.0).cos(), 0.0), c64((theta / 2.0).sin() * phi.cos(), (theta / 2.0).sin() * phi.sin())]
}

#[test]
fn afbw_is_among_the_candidates() {
    assert!(candidates().contains(&BooleanProcessFunction::afbw()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_inputs_are_identified_perfectly(k in 0usize..100_000) {
        let w = &candidates()[k % candidates().len()];
        let basis = s_omega_basis(w).unwrap();
        let mut records = BTreeSet::new();
        for (o, psi) in basis.iter().enumerate() {
            let r = shift_protocol_sim(psi, w).unwrap();
            prop_assert!((r.probability - 1.0).abs() <= 1e-12);
            prop_assert!((r.fidelity - 1.0).abs() <= 1e-12);
            prop_assert_eq!(r.identified, o);
            records.insert((r.inputs, r.outputs));
        }
        prop_assert_eq!(records.len(), basis.len());
    }

    #[test]
    fn product_inputs_have_complete_statistics(
        k in 0usize..100_000,
        angles in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 6),
    ) {
        let w = &candidates()[k % candidates().len()];
        let q: Vec<_> = (0..3).map(|j| qubit(angles[2 * j], angles[2 * j + 1])).collect();
        let amplitudes = (0..8)
            .map(|o: usize| (0..3).fold(c64(1.0, 0.0), |acc, j| acc * q[j][o >> (2 - j) & 1]))
            .collect();
        let psi = StateVector::new(amplitudes).unwrap();
        let total: f64 = protocol_distribution(&psi, w).unwrap().iter().map(|r| r.probability).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }
}
