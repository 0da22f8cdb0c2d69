#![allow(dead_code)]

use proptest::prelude::*;
use qcw_core::scenario::{validate_scenario, ContextualityScenario, RawScenario};

/// Scenario whose hyperedges are the given vertex bitmasks; vertices that
/// appear in no hyperedge are dropped.
pub fn scenario_from_masks(masks: &[u32]) -> ContextualityScenario {
    let mut edges: Vec<u32> = masks.iter().copied().filter(|m| *m != 0).collect();
    edges.sort_unstable();
    edges.dedup();
    let used = edges.iter().fold(0u32, |a, b| a | b);
    let names: Vec<String> = (0..32).filter(|i| used >> i & 1 == 1).map(|i| format!("x{i:02}")).collect();
    let hyperedges = edges
        .iter()
        .map(|m| (0..32).filter(|i| m >> i & 1 == 1).map(|i| format!("x{i:02}")).collect())
        .collect();
    validate_scenario(&RawScenario { vertices: names, hyperedges }).expect("generated scenario is valid")
}

/// Random hypergraphs on at most `max_vertices` vertices with hyperedges of
/// size 2 to 4.
pub fn arb_scenario(max_vertices: u32, max_edges: usize) -> impl Strategy<Value = ContextualityScenario> {
    let edge = proptest::collection::btree_set(0..max_vertices, 2..=4)
        .prop_map(|s| s.into_iter().fold(0u32, |m, v| m | 1 << v));
    proptest::collection::vec(edge, 1..=max_edges).prop_map(|masks| scenario_from_masks(&masks))
}
