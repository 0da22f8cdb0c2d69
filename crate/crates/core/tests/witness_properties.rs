use std::sync::OnceLock;

use proptest::prelude::*;
use qcw_core::invariants::{weighted_max_predictability, BetaValue, EdgeDistribution};
use qcw_core::opt::{enumerate_model_vertices, ModelVertex};
use qcw_core::quantum::{c64, CMatrix};
use qcw_core::rational::to_f64;
use qcw_core::scenario::{gamma18, gamma5, validate_scenario, ContextualityScenario};
use qcw_core::witness::{
    best_classical_code, corr_value, logical_witness, one_shot_success, statistical_bound, OneShotTask,
    PrepareMeasureData,
};

struct Fixture {
    h: ContextualityScenario,
    beta: BetaValue,
    responses: Vec<ModelVertex>,
}

fn fixture(which: usize) -> &'static Fixture {
    static CELLS: [OnceLock<Fixture>; 2] = [OnceLock::new(), OnceLock::new()];
    CELLS[which].get_or_init(|| {
        let raw = if which == 0 { gamma5() } else { gamma18() };
        let h = validate_scenario(&raw).unwrap();
        let beta = weighted_max_predictability(&h, &EdgeDistribution::uniform(&h)).unwrap();
        let responses = enumerate_model_vertices(&h).unwrap().into_iter().filter(|v| !v.deterministic).collect();
        Fixture { h, beta, responses }
    })
}

fn normalized(raw: &[f64]) -> Vec<f64> {
    let t: f64 = raw.iter().sum();
    raw.iter().map(|x| x / t).collect()
}

/// Arbitrary data: each table is a random distribution over `(m, s)`.
fn random_data(h: &ContextualityScenario, raw: &[f64]) -> PrepareMeasureData {
    let mut k = 0;
    let edges = h
        .hyperedges()
        .iter()
        .map(|e| {
            let n = e.len();
            let cells: Vec<f64> = (0..n * n).map(|_| { k += 1; raw[k % raw.len()] + 1e-3 }).collect();
            let cells = normalized(&cells);
            (0..n).map(|m| cells[m * n..(m + 1) * n].to_vec()).collect()
        })
        .collect();
    PrepareMeasureData { edges, special: None }
}

/// Data of a preparation- and measurement-noncontextual model: one ontic
/// distribution `μ` shared by every hyperedge's source, response functions
/// drawn from the indeterministic vertices of the model polytope, and
/// sources whose outcome may depend on `λ` arbitrarily.
fn ontological_data(f: &Fixture, mu: &[f64], picks: &[usize], source: &[f64]) -> PrepareMeasureData {
    let mu = normalized(mu);
    let mut k = 0;
    let edges = f
        .h
        .hyperedges()
        .iter()
        .map(|e| {
            let n = e.len();
            let mut t = vec![vec![0.0; n]; n];
            for (l, &w) in mu.iter().enumerate() {
                let xi = &f.responses[picks[l] % f.responses.len()];
                let ps = normalized(&(0..n).map(|_| { k += 1; source[k % source.len()] }).collect::<Vec<_>>());
                for m in 0..n {
                    for s in 0..n {
                        t[m][s] += w * to_f64(&xi.values[e[m]]) * ps[s];
                    }
                }
            }
            t
        })
        .collect();
    PrepareMeasureData { edges, special: None }
}

fn random_unitary(re: &[f64], im: &[f64], d: usize) -> CMatrix {
    let m = CMatrix::from_fn(d, d, |i, j| c64(re[i * d + j], im[i * d + j]));
    m.qr().q()
}

fn random_state(re: &[f64], im: &[f64], d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |i, j| c64(re[i * d + j], im[i * d + j]));
    let rho = &g * g.adjoint();
    let t = rho.trace();
    rho / t
}

fn basis_projectors(u: &CMatrix) -> Vec<CMatrix> {
    (0..u.ncols()).map(|k| u.column(k) * u.column(k).adjoint()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corr_is_affine_in_data(
        a in proptest::collection::vec(0.0f64..1.0, 1..40),
        b in proptest::collection::vec(0.0f64..1.0, 1..40),
        t in 0.0f64..=1.0,
    ) {
        let h = &fixture(0).h;
        let q = EdgeDistribution::uniform(h);
        let (da, db) = (random_data(h, &a), random_data(h, &b));
        let mixed = corr_value(h, &q, &da.mix(&db, t)).unwrap();
        let expected = t * corr_value(h, &q, &da).unwrap() + (1.0 - t) * corr_value(h, &q, &db).unwrap();
        prop_assert!((mixed - expected).abs() <= 1e-12);
    }

    #[test]
    fn noncontextual_models_never_violate_logical_witness(
        which in 0usize..2,
        mu in proptest::collection::vec(0.01f64..1.0, 1..5),
        picks in proptest::collection::vec(0usize..10_000, 5),
        source in proptest::collection::vec(0.0f64..1.0, 1..30),
    ) {
        let f = fixture(which);
        let source: Vec<f64> = source.iter().map(|x| x + 1e-6).collect();
        let data = ontological_data(f, &mu, &picks, &source);
        let q = EdgeDistribution::uniform(&f.h);
        let report = logical_witness(&f.h, &q, &data, Some(&f.beta)).unwrap();
        prop_assert!(!report.violated, "corr {} beta {}", report.corr, report.beta);
    }

    #[test]
    fn one_shot_success_with_product_state_is_classical(
        re in proptest::collection::vec(-1.0f64..1.0, 32),
        im in proptest::collection::vec(-1.0f64..1.0, 32),
        channel in proptest::collection::vec(0.01f64..1.0, 6),
        prior in proptest::collection::vec(0.01f64..1.0, 2),
    ) {
        let channel: Vec<Vec<f64>> = channel.chunks(3).map(normalized).collect();
        let prior = normalized(&prior);
        let rho_a = random_state(&re[0..4], &im[0..4], 2);
        let rho_b = random_state(&re[4..8], &im[4..8], 2);
        let encodings: Vec<Vec<CMatrix>> =
            (0..2).map(|m| basis_projectors(&random_unitary(&re[8 + 4 * m..], &im[8 + 4 * m..], 2))).collect();
        let decodings: Vec<Vec<CMatrix>> =
            (0..3).map(|y| basis_projectors(&random_unitary(&re[16 + 4 * y..], &im[16 + 4 * y..], 2))).collect();
        let task = OneShotTask {
            channel: channel.clone(),
            prior: prior.clone(),
            state: rho_a.kronecker(&rho_b),
            dims: (2, 2),
            encodings: encodings.clone(),
            decodings: decodings.clone(),
        };
        let s = one_shot_success(&task).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));

        // the product state only supplies independent local randomness
        let mut classical = 0.0;
        for m in 0..2 {
            for x in 0..2 {
                let px = (&encodings[m][x] * &rho_a).trace().re;
                for y in 0..3 {
                    let guess = (&decodings[y][m] * &rho_b).trace().re;
                    classical += prior[m] * px * channel[x][y] * guess;
                }
            }
        }
        prop_assert!((s - classical).abs() <= 1e-12);
        prop_assert!(s <= best_classical_code(&channel, &prior).unwrap().value + 1e-12);
    }
}

#[test]
fn statistical_bound_monotonicity() {
    let (alpha, alpha_star, p0) = (2.0, 2.5, 0.5);
    let grid: Vec<f64> = (0..=40).map(|i| f64::from(i) / 40.0).collect();
    for &beta in &grid[..36] {
        for w in grid.windows(2) {
            let hi = statistical_bound(alpha, alpha_star, beta, p0, w[0]);
            let lo = statistical_bound(alpha, alpha_star, beta, p0, w[1]);
            assert!(lo <= hi + 1e-15, "bound must not grow with Corr");
        }
    }
    // a larger β loosens the bound for every Corr < 1
    for &corr in &grid {
        for w in grid[..36].windows(2) {
            let a = statistical_bound(alpha, alpha_star, w[0], p0, corr);
            let b = statistical_bound(alpha, alpha_star, w[1], p0, corr);
            assert!(a <= b + 1e-15);
        }
    }
}
