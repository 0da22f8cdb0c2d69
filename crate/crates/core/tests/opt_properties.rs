mod common;

use common::arb_scenario;
use proptest::prelude::*;
use qcw_core::invariants::lovasz_theta;
use qcw_core::opt::{enumerate_model_vertices, hull_membership, simplex_maximize, LinearProgram, OptError};
use qcw_core::rational::to_f64;
use qcw_core::scenario::{ContextualityScenario, WeightedGraph};

fn model_lp(h: &ContextualityScenario, objective: Vec<f64>) -> LinearProgram {
    let n = h.num_vertices();
    let mut lp = LinearProgram::new(objective);
    for v in 0..n {
        lp.set_bounds(v, 0.0, 1.0);
    }
    for e in h.hyperedges() {
        let mut row = vec![0.0; n];
        for &v in e {
            row[v] = 1.0;
        }
        lp.add_eq(row, 1.0);
    }
    lp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn vertices_are_feasible_and_extreme(h in arb_scenario(9, 6)) {
        let verts = enumerate_model_vertices(&h).unwrap();
        let points: Vec<Vec<f64>> = verts.iter().map(|v| v.values.iter().map(to_f64).collect()).collect();
        for v in &verts {
            for e in h.hyperedges() {
                let s: f64 = e.iter().map(|&i| to_f64(&v.values[i])).sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
            }
            prop_assert!(v.values.iter().all(|x| to_f64(x) >= 0.0));
        }
        if points.len() < 2 {
            return Ok(());
        }
        for k in (0..points.len()).step_by(points.len().div_ceil(5)) {
            let others: Vec<Vec<f64>> =
                points.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, p)| p.clone()).collect();
            prop_assert!(!hull_membership(&points[k], &others).unwrap().is_member());
        }
    }

    #[test]
    fn simplex_agrees_with_vertex_maximum(
        h in arb_scenario(9, 6),
        c in proptest::collection::vec(-3.0f64..3.0, 9),
    ) {
        let n = h.num_vertices();
        let objective = c[..n].to_vec();
        let verts = enumerate_model_vertices(&h).unwrap();
        let lp = simplex_maximize(&model_lp(&h, objective.clone()));
        if verts.is_empty() {
            prop_assert_eq!(lp.unwrap_err(), OptError::Infeasible);
            return Ok(());
        }
        let best = verts
            .iter()
            .map(|v| v.values.iter().zip(&objective).map(|(x, w)| to_f64(x) * w).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let sol = lp.unwrap();
        prop_assert!((sol.value - best).abs() <= 1e-9, "lp {} vertices {}", sol.value, best);
    }

    #[test]
    fn theta_is_homogeneous_in_weights(w in proptest::collection::vec(0.1f64..3.0, 5)) {
        let g = WeightedGraph::cycle(5).with_weights(w.clone()).unwrap();
        let doubled = WeightedGraph::cycle(5).with_weights(w.iter().map(|x| 2.0 * x).collect()).unwrap();
        let t1 = lovasz_theta(&g).unwrap();
        let t2 = lovasz_theta(&doubled).unwrap();
        prop_assert!(t1.gap <= 1e-5 && t2.gap <= 1e-5);
        prop_assert!((t2.value - 2.0 * t1.value).abs() <= 1e-4 * t1.value.max(1.0));
    }
}
