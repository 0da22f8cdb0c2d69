//! Graph invariants of exclusivity graphs (independence number, Lovász
//! theta, fractional packing number), the weighted max-predictability of a
//! scenario and the consistent-exclusivity check.

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::opt::{
    enumerate_model_vertices, simplex_maximize, LinearProgram, ModelVertex, OptError,
    ProbabilisticModel, SdpOptions, SemidefiniteProgram,
};
use crate::rational::{self, Rational};
use crate::scenario::{orthogonality_graph, ContextualityScenario, ScenarioError, WeightedGraph};

pub const MAX_ALPHA_VERTICES: usize = 40;
pub const MAX_THETA_VERTICES: usize = 32;
pub const MAX_CLIQUE_VERTICES: usize = 30;

/// Slack allowed on clique sums by the consistent-exclusivity check.
pub const CE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("graph has {actual} vertices, limit is {limit}")]
    TooLarge { actual: usize, limit: usize },
    #[error("the model polytope has no indeterministic vertex")]
    NoIndeterministicVertices,
    #[error("edge distribution: {0}")]
    BadDistribution(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Opt(#[from] OptError),
}

/// Probabilistic weights `q_e` over the hyperedges of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDistribution {
    pub weights: Vec<f64>,
    /// Exact weights, when known.
    #[serde(skip)]
    pub exact: Option<Vec<Rational>>,
}

impl EdgeDistribution {
    pub fn new(h: &ContextualityScenario, weights: Vec<f64>) -> Result<Self, InvariantError> {
        if weights.len() != h.num_hyperedges() {
            return Err(InvariantError::BadDistribution(format!(
                "expected {} weights, got {}",
                h.num_hyperedges(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(InvariantError::BadDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(InvariantError::BadDistribution(format!("weights sum to {total}")));
        }
        Ok(EdgeDistribution { weights, exact: None })
    }

    pub fn from_rationals(
        h: &ContextualityScenario,
        exact: Vec<Rational>,
    ) -> Result<Self, InvariantError> {
        let mut d = Self::new(h, exact.iter().map(rational::to_f64).collect())?;
        if exact.iter().sum::<Rational>() != Rational::from_integer(1) {
            return Err(InvariantError::BadDistribution("weights do not sum to 1".into()));
        }
        d.exact = Some(exact);
        Ok(d)
    }

    pub fn uniform(h: &ContextualityScenario) -> Self {
        let n = h.num_hyperedges() as i128;
        let exact = vec![rational::rat(1, n); n as usize];
        EdgeDistribution { weights: vec![1.0 / n as f64; n as usize], exact: Some(exact) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependentSet {
    pub value: f64,
    pub set: Vec<usize>,
}

/// Exact weighted independence number by branch and bound; the bound is
/// the weight of a greedy clique cover of the remaining candidates.
pub fn independence_number(g: &WeightedGraph) -> Result<IndependentSet, InvariantError> {
    let n = g.num_vertices();
    if n > MAX_ALPHA_VERTICES {
        return Err(InvariantError::TooLarge { actual: n, limit: MAX_ALPHA_VERTICES });
    }
    let nbr = g.neighbour_masks();
    let mut search = AlphaSearch { w: g.weights(), nbr: &nbr, best: -1.0, best_set: 0 };
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    search.expand(all, 0.0, 0);
    let set: Vec<usize> = (0..n).filter(|&i| search.best_set >> i & 1 == 1).collect();
    Ok(IndependentSet { value: search.best.max(0.0), set })
}

struct AlphaSearch<'a> {
    w: &'a [f64],
    nbr: &'a [u64],
    best: f64,
    best_set: u64,
}

impl AlphaSearch<'_> {
    fn clique_cover_bound(&self, mut cands: u64) -> f64 {
        let mut bound = 0.0;
        while cands != 0 {
            let v = cands.trailing_zeros() as usize;
            let mut clique_ok = self.nbr[v];
            let mut top = self.w[v];
            cands &= !(1 << v);
            let mut rest = cands & clique_ok;
            while rest != 0 {
                let u = rest.trailing_zeros() as usize;
                rest &= !(1 << u);
                if clique_ok >> u & 1 == 1 {
                    clique_ok &= self.nbr[u];
                    rest &= clique_ok;
                    cands &= !(1 << u);
                    top = top.max(self.w[u]);
                }
            }
            bound += top;
        }
        bound
    }

    fn expand(&mut self, cands: u64, weight: f64, set: u64) {
        if cands == 0 {
            if weight > self.best + 1e-12 {
                self.best = weight;
                self.best_set = set;
            }
            return;
        }
        if weight + self.clique_cover_bound(cands) <= self.best + 1e-12 {
            return;
        }
        let v = cands.trailing_zeros() as usize;
        let rest = cands & !(1 << v);
        self.expand(rest & !self.nbr[v], weight + self.w[v], set | 1 << v);
        self.expand(rest, weight, set);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

/// Weighted Lovász theta as `max Σ √(w_i w_j) B_ij` over `Tr B = 1`,
/// `B_ij = 0` on edges, `B ⪰ 0`.
pub fn lovasz_theta(g: &WeightedGraph) -> Result<ThetaValue, InvariantError> {
    let n = g.num_vertices();
    if n > MAX_THETA_VERTICES {
        return Err(InvariantError::TooLarge { actual: n, limit: MAX_THETA_VERTICES });
    }
    if n == 0 {
        return Ok(ThetaValue { value: 0.0, primal_residual: 0.0, dual_residual: 0.0, gap: 0.0 });
    }
    let w = g.weights();
    let objective =
        (0..n).map(|i| (0..n).map(|j| (w[i] * w[j]).sqrt()).collect()).collect();
    let mut sdp = SemidefiniteProgram::new(objective);
    let identity = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    sdp.constraints.push((identity, 1.0));
    sdp.zero_pattern = g.edges().iter().copied().collect();
    let opts = SdpOptions { primal_tol: 1e-9, dual_tol: 1e-9, gap_tol: 1e-9, ..SdpOptions::default() };
    let sol = sdp.to_block()?.solve(&opts)?;
    Ok(ThetaValue {
        value: sol.value,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        gap: sol.gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingValue {
    pub value: f64,
    pub optimizer: Vec<f64>,
    pub cliques: usize,
}

/// Fractional packing number: LP over the maximal cliques of `g`.
pub fn fractional_packing(g: &WeightedGraph) -> Result<PackingValue, InvariantError> {
    let n = g.num_vertices();
    if n > MAX_CLIQUE_VERTICES {
        return Err(InvariantError::TooLarge { actual: n, limit: MAX_CLIQUE_VERTICES });
    }
    let cliques = g.maximal_cliques();
    let mut lp = LinearProgram::new(g.weights().to_vec());
    for c in &cliques {
        let mut row = vec![0.0; n];
        for &v in c {
            row[v] = 1.0;
        }
        lp.add_le(row, 1.0);
    }
    let sol = simplex_maximize(&lp)?;
    Ok(PackingValue { value: sol.value, optimizer: sol.x, cliques: cliques.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaValue {
    pub value: f64,
    /// `"n/d"` when both the vertices and `q` are exact.
    pub exact: Option<String>,
    #[serde(skip)]
    pub exact_value: Option<Rational>,
    /// Maximizing indeterministic vertex.
    pub witness: Vec<String>,
    pub indeterministic_vertices: usize,
}

fn edge_max(h: &ContextualityScenario, v: &ModelVertex) -> Vec<Rational> {
    h.hyperedges()
        .iter()
        .map(|e| e.iter().map(|&i| v.values[i]).max().unwrap_or_else(Rational::zero))
        .collect()
}

fn indeterministic(h: &ContextualityScenario) -> Result<Vec<ModelVertex>, InvariantError> {
    let verts: Vec<ModelVertex> =
        enumerate_model_vertices(h)?.into_iter().filter(|v| !v.deterministic).collect();
    if verts.is_empty() {
        return Err(InvariantError::NoIndeterministicVertices);
    }
    Ok(verts)
}

/// Weighted max-predictability `β(H, q)`: the largest hyperedge-averaged
/// predictability `Σ_e q_e max_{v∈e} p(v)` over indeterministic models.
///
/// The objective is a maximum of linear functionals, hence convex, so its
/// maximum over the hull of the indeterministic vertices is attained at one
/// of them.
pub fn weighted_max_predictability(
    h: &ContextualityScenario,
    q: &EdgeDistribution,
) -> Result<BetaValue, InvariantError> {
    if q.weights.len() != h.num_hyperedges() {
        return Err(InvariantError::BadDistribution("weight count differs from hyperedge count".into()));
    }
    let verts = indeterministic(h)?;
    let mut best: Option<(f64, Option<Rational>, usize)> = None;
    for (k, v) in verts.iter().enumerate() {
        let maxes = edge_max(h, v);
        let value: f64 = maxes.iter().zip(&q.weights).map(|(m, w)| rational::to_f64(m) * w).sum();
        let exact = q
            .exact
            .as_ref()
            .map(|qe| maxes.iter().zip(qe).map(|(m, w)| m * w).sum::<Rational>());
        let better = match &best {
            None => true,
            Some((bv, be, _)) => match (&exact, be) {
                (Some(e), Some(b)) => e > b,
                _ => value > bv + 1e-15,
            },
        };
        if better {
            best = Some((value, exact, k));
        }
    }
    let (value, exact_value, k) = best.expect("at least one vertex");
    Ok(BetaValue {
        value: exact_value.as_ref().map(rational::to_f64).unwrap_or(value),
        exact: exact_value.as_ref().map(rational::format),
        exact_value,
        witness: verts[k].values.iter().map(rational::format).collect(),
        indeterministic_vertices: verts.len(),
    })
}

/// Edge distribution minimizing `β(H, q)`, found by LP over the
/// indeterministic vertices.
pub fn minimize_beta(h: &ContextualityScenario) -> Result<(EdgeDistribution, f64), InvariantError> {
    let verts = indeterministic(h)?;
    let ne = h.num_hyperedges();
    // variables q_1..q_ne, t (free); maximize −t
    let mut obj = vec![0.0; ne + 1];
    obj[ne] = -1.0;
    let mut lp = LinearProgram::new(obj);
    lp.set_bounds(ne, f64::NEG_INFINITY, f64::INFINITY);
    let mut sum = vec![1.0; ne + 1];
    sum[ne] = 0.0;
    lp.add_eq(sum, 1.0);
    for v in &verts {
        let mut row: Vec<f64> = edge_max(h, v).iter().map(rational::to_f64).collect();
        row.push(-1.0);
        lp.add_le(row, 0.0);
    }
    let sol = simplex_maximize(&lp)?;
    let mut q: Vec<f64> = sol.x[..ne].iter().map(|x| x.max(0.0)).collect();
    let total: f64 = q.iter().sum();
    for x in q.iter_mut() {
        *x /= total;
    }
    Ok((EdgeDistribution { weights: q, exact: None }, -sol.value))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusivityVerdict {
    pub consistent: bool,
    /// A maximal clique of the exclusivity graph whose values sum past 1.
    pub violating_clique: Option<Vec<String>>,
    pub clique_sum: Option<f64>,
    pub cliques_checked: usize,
}

/// Checks `Σ_{v∈c} p(v) ≤ 1` on every maximal clique of the exclusivity
/// graph (sufficient for all cliques since `p ≥ 0`).
pub fn consistent_exclusivity_check(
    h: &ContextualityScenario,
    p: &ProbabilisticModel,
) -> Result<ExclusivityVerdict, InvariantError> {
    let n = h.num_vertices();
    if n > MAX_CLIQUE_VERTICES {
        return Err(InvariantError::TooLarge { actual: n, limit: MAX_CLIQUE_VERTICES });
    }
    if p.values.len() != n {
        return Err(OptError::DimensionMismatch { expected: n, actual: p.values.len() }.into());
    }
    let g = orthogonality_graph(h, None)?;
    let cliques = g.maximal_cliques();
    let mut worst: Option<(f64, &Vec<usize>)> = None;
    for c in &cliques {
        let s: f64 = c.iter().map(|&v| p.values[v]).sum();
        if s > 1.0 + CE_TOL && worst.is_none_or(|(w, _)| s > w) {
            worst = Some((s, c));
        }
    }
    Ok(ExclusivityVerdict {
        consistent: worst.is_none(),
        violating_clique: worst.map(|(_, c)| c.iter().map(|&v| h.vertices()[v].clone()).collect()),
        clique_sum: worst.map(|(s, _)| s),
        cliques_checked: cliques.len(),
    })
}

/// The invariants of `O(H)` for vertex weights `w`, together with `β(H, q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub alpha: f64,
    pub alpha_set: Vec<String>,
    pub theta: f64,
    pub theta_residuals: ThetaValue,
    pub alpha_star: f64,
    pub beta: Option<BetaValue>,
    /// `α ≤ θ ≤ α*` up to solver tolerance.
    pub sandwich_holds: bool,
}

pub fn invariant_report(
    h: &ContextualityScenario,
    weights: Option<&[f64]>,
    q: Option<&EdgeDistribution>,
) -> Result<InvariantReport, InvariantError> {
    let g = orthogonality_graph(h, weights)?;
    let alpha = independence_number(&g)?;
    let theta = lovasz_theta(&g)?;
    let alpha_star = fractional_packing(&g)?;
    let beta = match q {
        Some(q) => Some(weighted_max_predictability(h, q)?),
        None => None,
    };
    let sandwich_holds =
        alpha.value <= theta.value + 1e-4 && theta.value <= alpha_star.value + 1e-4;
    Ok(InvariantReport {
        alpha: alpha.value,
        alpha_set: alpha.set.iter().map(|&v| h.vertices()[v].clone()).collect(),
        theta: theta.value,
        theta_residuals: theta,
        alpha_star: alpha_star.value,
        beta,
        sandwich_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::scenario::{gamma18, gamma5, validate_scenario, RawScenario};

    fn brute_alpha(g: &WeightedGraph) -> f64 {
        let n = g.num_vertices();
        let mut best: f64 = 0.0;
        for m in 0u32..(1 << n) {
            let ok = (0..n).all(|a| (a + 1..n).all(|b| m >> a & 1 == 0 || m >> b & 1 == 0 || !g.adjacent(a, b)));
            if ok {
                best = best.max((0..n).filter(|i| m >> i & 1 == 1).map(|i| g.weights()[i]).sum());
            }
        }
        best
    }

    #[test]
    fn pentagon_alpha() {
        let c5 = WeightedGraph::cycle(5);
        let a = independence_number(&c5).unwrap();
        assert_eq!(a.value, 2.0);
        assert_eq!(a.set.len(), 2);
        let w = c5.with_weights(vec![2.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(independence_number(&w).unwrap().value, 3.0);
        assert_eq!(brute_alpha(&w), 3.0);
    }

    #[test]
    fn edgeless_graphs() {
        let g = WeightedGraph::unweighted(3, &[]).unwrap().with_weights(vec![0.5, 1.0, 2.0]).unwrap();
        assert_eq!(independence_number(&g).unwrap().value, 3.5);
        assert!((fractional_packing(&g).unwrap().value - 3.5).abs() < 1e-9);
        let u = WeightedGraph::unweighted(3, &[]).unwrap();
        assert!((lovasz_theta(&u).unwrap().value - 3.0).abs() < 1e-4);
    }

    #[test]
    fn complete_graph_values() {
        let k = WeightedGraph::complete(4);
        assert_eq!(independence_number(&k).unwrap().value, 1.0);
        assert!((lovasz_theta(&k).unwrap().value - 1.0).abs() < 1e-4);
        assert!((fractional_packing(&WeightedGraph::complete(3)).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pentagon_theta_and_packing() {
        let c5 = WeightedGraph::cycle(5);
        assert!((lovasz_theta(&c5).unwrap().value - 5f64.sqrt()).abs() < 1e-4);
        assert!((fractional_packing(&c5).unwrap().value - 2.5).abs() < 1e-9);
    }

    #[test]
    fn alpha_matches_brute_force_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.random_range(1..=12);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.random_bool(0.4) {
                        edges.push((a, b));
                    }
                }
            }
            let w: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..5u8))).collect();
            let g = WeightedGraph::unweighted(n, &edges).unwrap().with_weights(w).unwrap();
            assert_eq!(independence_number(&g).unwrap().value, brute_alpha(&g));
        }
    }

    #[test]
    fn beta_of_builtin_scenarios() {
        let g18 = validate_scenario(&gamma18()).unwrap();
        let b = weighted_max_predictability(&g18, &EdgeDistribution::uniform(&g18)).unwrap();
        assert_eq!(b.exact_value, Some(rat(5, 6)));
        let g5 = validate_scenario(&gamma5()).unwrap();
        let b = weighted_max_predictability(&g5, &EdgeDistribution::uniform(&g5)).unwrap();
        assert_eq!(b.exact_value, Some(rat(1, 2)));
    }

    #[test]
    fn beta_on_single_edge_distribution() {
        let g5 = validate_scenario(&gamma5()).unwrap();
        let mut q = vec![rat(0, 1); 5];
        q[2] = rat(1, 1);
        let d = EdgeDistribution::from_rationals(&g5, q).unwrap();
        let b = weighted_max_predictability(&g5, &d).unwrap();
        let verts = enumerate_model_vertices(&g5).unwrap();
        let oracle = verts
            .iter()
            .filter(|v| !v.deterministic)
            .map(|v| g5.hyperedges()[2].iter().map(|&i| v.values[i]).max().unwrap())
            .max()
            .unwrap();
        assert_eq!(b.exact_value, Some(oracle));
    }

    #[test]
    fn minimized_beta_is_no_worse_than_uniform() {
        let g5 = validate_scenario(&gamma5()).unwrap();
        let (q, v) = minimize_beta(&g5).unwrap();
        assert!(v <= 0.5 + 1e-9);
        let b = weighted_max_predictability(&g5, &q).unwrap();
        assert!((b.value - v).abs() < 1e-9);
    }

    #[test]
    fn triangle_cover_violates_exclusivity() {
        let h = validate_scenario(&RawScenario::new(
            &["v1", "v2", "v3"],
            &[&["v1", "v2"], &["v2", "v3"], &["v3", "v1"]],
        ))
        .unwrap();
        let p = ProbabilisticModel::new(&h, vec![0.5; 3]).unwrap();
        let v = consistent_exclusivity_check(&h, &p).unwrap();
        assert!(!v.consistent);
        assert_eq!(v.violating_clique.unwrap(), vec!["v1", "v2", "v3"]);
        assert!((v.clique_sum.unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn report_on_kcbs() {
        let g5 = validate_scenario(&gamma5()).unwrap();
        let w: Vec<f64> =
            g5.vertices().iter().map(|v| if v.starts_with('v') { 1.0 } else { 0.0 }).collect();
        let r = invariant_report(&g5, Some(&w), Some(&EdgeDistribution::uniform(&g5))).unwrap();
        assert_eq!(r.alpha, 2.0);
        assert!((r.alpha_star - 2.5).abs() < 1e-9);
        assert!((r.theta - 5f64.sqrt()).abs() < 1e-4);
        assert!(r.sandwich_holds);
        assert_eq!(r.beta.unwrap().exact.as_deref(), Some("1/2"));
    }
}
