mod common;

use common::{arb_scenario, scenario_from_masks};
use proptest::prelude::*;
use qcw_core::scenario::{
    enumerate_ks_colorings, orthogonality_graph, specker_decomposition, validate_jms, KsColoring, RawJms,
};

/// Reference colouring scan over all 2^n assignments.
fn scan_colorings(h: &qcw_core::scenario::ContextualityScenario) -> Vec<KsColoring> {
    let n = h.num_vertices();
    (0u32..1 << n)
        .map(|m| KsColoring { assignment: (0..n).map(|i| (m >> i & 1) as u8).collect() })
        .filter(|c| c.is_valid_for(h))
        .collect()
}

fn named_edges(h: &qcw_core::scenario::ContextualityScenario) -> Vec<(String, String)> {
    let g = orthogonality_graph(h, None).unwrap();
    g.edges()
        .iter()
        .map(|&(a, b)| (g.vertices()[a].clone(), g.vertices()[b].clone()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn colorings_match_exhaustive_scan(h in arb_scenario(12, 8)) {
        let mut found = enumerate_ks_colorings(&h, None).unwrap();
        for c in &found {
            prop_assert!(c.is_valid_for(&h));
        }
        let mut oracle = scan_colorings(&h);
        found.sort();
        oracle.sort();
        prop_assert_eq!(found, oracle);
    }

    #[test]
    fn adding_a_hyperedge_keeps_orthogonality_edges(
        masks in proptest::collection::vec(1u32..(1 << 10), 1..6),
        extra in 3u32..(1 << 10),
    ) {
        let small = scenario_from_masks(&masks);
        let mut more = masks.clone();
        more.push(extra);
        let big = scenario_from_masks(&more);
        let big_edges = named_edges(&big);
        for e in named_edges(&small) {
            prop_assert!(big_edges.contains(&e), "lost edge {:?}", e);
        }
    }

    #[test]
    fn jms_closure_is_a_fixed_point(
        n in 2usize..7,
        sets in proptest::collection::vec(1u64..64, 0..6),
    ) {
        let vertices: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let compatible = sets
            .iter()
            .map(|s| (0..n).filter(|i| s >> i & 1 == 1).map(|i| vertices[i].clone()).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        let first = validate_jms(&RawJms { vertices: vertices.clone(), compatible }).unwrap();
        let again = validate_jms(&first.structure.to_raw()).unwrap();
        prop_assert_eq!(again.closure_added, 0);
        prop_assert_eq!(&again.structure, &first.structure);
        for &m in first.structure.compatible_masks() {
            for i in 0..n {
                let sub = m & !(1u64 << i);
                if sub != 0 {
                    prop_assert!(first.structure.is_compatible_mask(sub));
                }
            }
        }
    }

    #[test]
    fn specker_sets_are_minimal_antichain(
        n in 2usize..7,
        sets in proptest::collection::vec(1u64..64, 0..6),
    ) {
        let vertices: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
        let compatible = sets
            .iter()
            .map(|s| (0..n).filter(|i| s >> i & 1 == 1).map(|i| vertices[i].clone()).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        let j = validate_jms(&RawJms { vertices: vertices.clone(), compatible }).unwrap().structure;
        let Ok(minimal) = specker_decomposition(&j) else {
            prop_assert!(j.is_trivial());
            return Ok(());
        };
        let masks: Vec<u64> = minimal
            .iter()
            .map(|s| s.iter().map(|v| 1u64 << vertices.iter().position(|u| u == v).unwrap()).sum())
            .collect();
        for (a, &ma) in masks.iter().enumerate() {
            prop_assert!(!j.is_compatible_mask(ma));
            for (b, &mb) in masks.iter().enumerate() {
                if a != b {
                    prop_assert!(ma & mb != ma, "{:?} nested in {:?}", minimal[a], minimal[b]);
                }
            }
            // every proper nonempty subset is compatible
            let mut sub = (ma - 1) & ma;
            while sub != 0 {
                prop_assert!(j.is_compatible_mask(sub));
                sub = (sub - 1) & ma;
            }
        }
    }
}
