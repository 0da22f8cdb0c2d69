//! Noise-robust noncontextuality witnesses built from prepare-and-measure
//! data, and the one-shot success probability of a channel-assisted
//! communication task.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::invariants::{
    fractional_packing, independence_number, weighted_max_predictability, BetaValue,
    EdgeDistribution, InvariantError,
};
use crate::quantum::{hermitian_eigenvalues, is_hermitian, CMatrix};
use crate::rational::Rational;
use crate::scenario::{orthogonality_graph, ContextualityScenario};

/// A witness counts as violated when its margin exceeds this.
pub const VIOLATION_TOL: f64 = 1e-12;
const TABLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("no data for hyperedge {edge}")]
    MissingEdgeData { edge: usize },
    #[error("table for hyperedge {edge} has the wrong shape (expected {expected}×{expected})")]
    ShapeMismatch { edge: usize, expected: usize },
    #[error("table for hyperedge {edge} sums to {sum}")]
    NotNormalized { edge: usize, sum: f64 },
    #[error("table for hyperedge {edge} has a negative entry")]
    NegativeEntry { edge: usize },
    #[error("data has no special-source table")]
    MissingSpecialSource,
    #[error("special source never emits s* = 0")]
    ZeroP0,
    #[error("special-source marginal differs between hyperedges ({a} vs {b})")]
    InconsistentSource { a: f64, b: f64 },
    #[error("max-predictability {beta} is not below 1")]
    BetaNotBelowOne { beta: f64 },
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("encoding for message {message} is not projective")]
    NonProjectiveEncoding { message: usize },
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

/// Source–measurement statistics keyed to the hyperedges of a scenario.
///
/// `edges[e][m][s] = p(m, s | M_e, S_e)` where both labels index the
/// vertices of hyperedge `e` in listing order. The optional
/// `special[e][m][s*] = p(m, s* | M_e, S_*)` holds the special source with
/// binary outcome `s*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepareMeasureData {
    pub edges: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special: Option<Vec<Vec<[f64; 2]>>>,
}

impl PrepareMeasureData {
    pub fn validate(&self, h: &ContextualityScenario) -> Result<(), WitnessError> {
        for (k, e) in h.hyperedges().iter().enumerate() {
            let t = self.edges.get(k).ok_or(WitnessError::MissingEdgeData { edge: k })?;
            let n = e.len();
            if t.len() != n || t.iter().any(|r| r.len() != n) {
                return Err(WitnessError::ShapeMismatch { edge: k, expected: n });
            }
            check_table(k, t.iter().flatten())?;
            if let Some(sp) = &self.special {
                let t = sp.get(k).ok_or(WitnessError::MissingEdgeData { edge: k })?;
                if t.len() != n {
                    return Err(WitnessError::ShapeMismatch { edge: k, expected: n });
                }
                check_table(k, t.iter().flatten())?;
            }
        }
        Ok(())
    }

    /// Linear mixture `t·self + (1−t)·other`.
    pub fn mix(&self, other: &Self, t: f64) -> Self {
        let lerp = |a: f64, b: f64| t * a + (1.0 - t) * b;
        PrepareMeasureData {
            edges: self
                .edges
                .iter()
                .zip(&other.edges)
                .map(|(a, b)| {
                    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| lerp(*p, *q)).collect()).collect()
                })
                .collect(),
            special: match (&self.special, &other.special) {
                (Some(a), Some(b)) => Some(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| {
                            x.iter().zip(y).map(|(p, q)| [lerp(p[0], q[0]), lerp(p[1], q[1])]).collect()
                        })
                        .collect(),
                ),
                _ => None,
            },
        }
    }
}

fn check_table<'a>(edge: usize, entries: impl Iterator<Item = &'a f64>) -> Result<(), WitnessError> {
    let mut sum = 0.0;
    for &x in entries {
        if x < -TABLE_TOL || !x.is_finite() {
            return Err(WitnessError::NegativeEntry { edge });
        }
        sum += x;
    }
    if (sum - 1.0).abs() > TABLE_TOL {
        return Err(WitnessError::NotNormalized { edge, sum });
    }
    Ok(())
}

/// `Corr = Σ_e q_e Σ_m p(m, m | M_e, S_e)`.
pub fn corr_value(
    h: &ContextualityScenario,
    q: &EdgeDistribution,
    data: &PrepareMeasureData,
) -> Result<f64, WitnessError> {
    data.validate(h)?;
    Ok(data
        .edges
        .iter()
        .zip(&q.weights)
        .map(|(t, w)| w * (0..t.len()).map(|m| t[m][m]).sum::<f64>())
        .sum())
}

/// Probability `p_0` that the special source emits `s* = 0`.
pub fn special_p0(h: &ContextualityScenario, data: &PrepareMeasureData) -> Result<f64, WitnessError> {
    data.validate(h)?;
    let sp = data.special.as_ref().ok_or(WitnessError::MissingSpecialSource)?;
    let marginals: Vec<f64> = sp.iter().map(|t| t.iter().map(|r| r[0]).sum()).collect();
    let p0 = marginals[0];
    if let Some(&b) = marginals.iter().find(|&&b| (b - p0).abs() > TABLE_TOL) {
        return Err(WitnessError::InconsistentSource { a: p0, b });
    }
    if p0 <= TABLE_TOL {
        return Err(WitnessError::ZeroP0);
    }
    Ok(p0)
}

/// `R = Σ_v w_v p(v, s* = 0 | S_*) / p_0`, where `p(v, s* = 0)` is averaged
/// over the hyperedges containing `v` (operationally equivalent events).
pub fn special_source_statistic(
    h: &ContextualityScenario,
    w: &[f64],
    data: &PrepareMeasureData,
) -> Result<f64, WitnessError> {
    let p0 = special_p0(h, data)?;
    let sp = data.special.as_ref().ok_or(WitnessError::MissingSpecialSource)?;
    let mut r = 0.0;
    for v in 0..h.num_vertices() {
        let edges = h.edges_containing(v);
        let avg: f64 = edges
            .iter()
            .map(|&e| {
                let pos = h.hyperedges()[e].iter().position(|&u| u == v).expect("v in e");
                sp[e][pos][0]
            })
            .sum::<f64>()
            / edges.len() as f64;
        r += w[v] * avg;
    }
    Ok(r / p0)
}

/// `α + (α* − α)/p_0 · (1 − Corr)/(1 − β)`
pub fn statistical_bound(alpha: f64, alpha_star: f64, beta: f64, p0: f64, corr: f64) -> f64 {
    alpha + (alpha_star - alpha) / p0 * (1.0 - corr) / (1.0 - beta)
}

pub fn statistical_bound_exact(
    alpha: Rational,
    alpha_star: Rational,
    beta: Rational,
    p0: Rational,
    corr: Rational,
) -> Rational {
    let one = Rational::from_integer(1);
    alpha + (alpha_star - alpha) / p0 * (one - corr) / (one - beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessForm {
    Logical,
    Statistical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub form: WitnessForm,
    pub corr: f64,
    pub beta: f64,
    pub bound: f64,
    /// `Corr` for the logical form, `R` for the statistical form.
    pub lhs: f64,
    pub violated: bool,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
}

impl WitnessReport {
    pub fn logical(corr: f64, beta: f64) -> Result<Self, WitnessError> {
        if beta >= 1.0 {
            return Err(WitnessError::BetaNotBelowOne { beta });
        }
        let margin = corr - beta;
        Ok(WitnessReport {
            form: WitnessForm::Logical,
            corr,
            beta,
            bound: beta,
            lhs: corr,
            violated: margin > VIOLATION_TOL,
            margin,
            p0: None,
        })
    }

    pub fn statistical(
        r: f64,
        corr: f64,
        alpha: f64,
        alpha_star: f64,
        beta: f64,
        p0: f64,
    ) -> Result<Self, WitnessError> {
        if beta >= 1.0 {
            return Err(WitnessError::BetaNotBelowOne { beta });
        }
        if p0 <= 0.0 {
            return Err(WitnessError::ZeroP0);
        }
        let bound = statistical_bound(alpha, alpha_star, beta, p0, corr);
        let margin = r - bound;
        Ok(WitnessReport {
            form: WitnessForm::Statistical,
            corr,
            beta,
            bound,
            lhs: r,
            violated: margin > VIOLATION_TOL,
            margin,
            p0: Some(p0),
        })
    }
}

/// `Corr ≤ β(H, q)`; `beta` may be supplied to skip recomputing it.
pub fn logical_witness(
    h: &ContextualityScenario,
    q: &EdgeDistribution,
    data: &PrepareMeasureData,
    beta: Option<&BetaValue>,
) -> Result<WitnessReport, WitnessError> {
    let corr = corr_value(h, q, data)?;
    let beta = match beta {
        Some(b) => b.value,
        None => weighted_max_predictability(h, q)?.value,
    };
    WitnessReport::logical(corr, beta)
}

/// `R ≤ α + (α* − α)/p_0 · (1 − Corr)/(1 − β)` with the invariants of
/// `O(H)` weighted by `w`.
pub fn statistical_witness(
    h: &ContextualityScenario,
    q: &EdgeDistribution,
    w: &[f64],
    data: &PrepareMeasureData,
    beta: Option<&BetaValue>,
) -> Result<WitnessReport, WitnessError> {
    let corr = corr_value(h, q, data)?;
    let p0 = special_p0(h, data)?;
    let r = special_source_statistic(h, w, data)?;
    let g = orthogonality_graph(h, Some(w)).map_err(InvariantError::from)?;
    let alpha = independence_number(&g)?.value;
    let alpha_star = fractional_packing(&g)?.value;
    let beta = match beta {
        Some(b) => b.value,
        None => weighted_max_predictability(h, q)?.value,
    };
    WitnessReport::statistical(r, corr, alpha, alpha_star, beta, p0)
}

/// One use of a classical channel `N(y|x)` assisted by a shared state.
///
/// Alice measures `encodings[m]` (projectors indexed by channel input `x`)
/// on her half; Bob measures `decodings[y]` (effects indexed by message).
#[derive(Debug, Clone, PartialEq)]
pub struct OneShotTask {
    pub channel: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
    pub state: CMatrix,
    pub dims: (usize, usize),
    pub encodings: Vec<Vec<CMatrix>>,
    pub decodings: Vec<Vec<CMatrix>>,
}

const MEAS_TOL: f64 = 1e-9;

fn check_measurement(effects: &[CMatrix], d: usize, what: &str) -> Result<(), WitnessError> {
    let mut sum = CMatrix::zeros(d, d);
    for e in effects {
        if e.nrows() != d || !is_hermitian(e, MEAS_TOL) {
            return Err(WitnessError::InvalidMeasurement(format!("{what}: effect is not a Hermitian {d}×{d} matrix")));
        }
        if hermitian_eigenvalues(e).first().is_some_and(|&l| l < -MEAS_TOL) {
            return Err(WitnessError::InvalidMeasurement(format!("{what}: effect is not positive")));
        }
        sum += e;
    }
    if (sum - CMatrix::identity(d, d)).norm() > MEAS_TOL {
        return Err(WitnessError::InvalidMeasurement(format!("{what}: effects do not sum to identity")));
    }
    Ok(())
}

impl OneShotTask {
    pub fn validate(&self) -> Result<(), WitnessError> {
        let nx = self.channel.len();
        let nm = self.prior.len();
        let ny = self.channel.first().map_or(0, Vec::len);
        if nx == 0 || nm == 0 || ny == 0 {
            return Err(WitnessError::InvalidTask("empty alphabet".into()));
        }
        for row in &self.channel {
            if row.len() != ny || row.iter().any(|&p| p < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > MEAS_TOL {
                return Err(WitnessError::InvalidTask("channel rows must be distributions".into()));
            }
        }
        if self.prior.iter().any(|&p| p < 0.0) || (self.prior.iter().sum::<f64>() - 1.0).abs() > MEAS_TOL {
            return Err(WitnessError::InvalidTask("prior must be a distribution".into()));
        }
        let (da, db) = self.dims;
        if self.state.nrows() != da * db || self.state.ncols() != da * db {
            return Err(WitnessError::InvalidTask("state dimension differs from dims".into()));
        }
        if self.encodings.len() != nm || self.decodings.len() != ny {
            return Err(WitnessError::InvalidTask("one encoding per message and one decoding per output".into()));
        }
        for (m, enc) in self.encodings.iter().enumerate() {
            if enc.len() != nx {
                return Err(WitnessError::InvalidTask(format!("encoding {m} needs {nx} outcomes")));
            }
            check_measurement(enc, da, "encoding")?;
            if enc.iter().any(|p| (p * p - p).norm() > MEAS_TOL) {
                return Err(WitnessError::NonProjectiveEncoding { message: m });
            }
        }
        for dec in &self.decodings {
            if dec.len() != nm {
                return Err(WitnessError::InvalidTask(format!("decodings need {nm} outcomes")));
            }
            check_measurement(dec, db, "decoding")?;
        }
        Ok(())
    }
}

/// `S = Σ_m p(m) Σ_x Σ_y N(y|x) Tr[(P^m_x ⊗ D^y_m) ρ]`.
pub fn one_shot_success(task: &OneShotTask) -> Result<f64, WitnessError> {
    task.validate()?;
    let mut s = 0.0;
    for (m, pm) in task.prior.iter().enumerate() {
        for (x, proj) in task.encodings[m].iter().enumerate() {
            for (y, n) in task.channel[x].iter().enumerate() {
                if *n == 0.0 || *pm == 0.0 {
                    continue;
                }
                let op = proj.kronecker(&task.decodings[y][m]);
                s += pm * n * (op * &task.state).trace().re;
            }
        }
    }
    Ok(s.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalCode {
    pub value: f64,
    /// Channel input per message.
    pub encoding: Vec<usize>,
    /// Decoded message per channel output.
    pub decoding: Vec<usize>,
}

/// Best deterministic encoding/decoding pair; for each encoding the
/// maximum-a-posteriori decoder is optimal.
pub fn best_classical_code(channel: &[Vec<f64>], prior: &[f64]) -> Result<ClassicalCode, WitnessError> {
    let nx = channel.len();
    let nm = prior.len();
    let ny = channel.first().map_or(0, Vec::len);
    if nx == 0 || nm == 0 || ny == 0 {
        return Err(WitnessError::InvalidTask("empty alphabet".into()));
    }
    let total = (nx as f64).powi(nm as i32);
    if total > 1e7 {
        return Err(WitnessError::InvalidTask(format!("{total} encodings exceed search limit")));
    }
    let mut best = ClassicalCode { value: -1.0, encoding: vec![], decoding: vec![] };
    let mut enc = vec![0usize; nm];
    loop {
        let mut value = 0.0;
        let mut dec = vec![0usize; ny];
        for (y, d) in dec.iter_mut().enumerate() {
            let mut top = -1.0;
            for m in 0..nm {
                let v = prior[m] * channel[enc[m]][y];
                if v > top + 1e-15 {
                    top = v;
                    *d = m;
                }
            }
            value += top;
        }
        if value > best.value + 1e-15 {
            best = ClassicalCode { value, encoding: enc.clone(), decoding: dec };
        }
        let mut k = 0;
        while k < nm {
            enc[k] += 1;
            if enc[k] < nx {
                break;
            }
            enc[k] = 0;
            k += 1;
        }
        if k == nm {
            break;
        }
    }
    Ok(best)
}

/// Projector onto computational basis state `k` in dimension `d`.
pub fn basis_projector(d: usize, k: usize) -> CMatrix {
    let mut m = DMatrix::zeros(d, d);
    m[(k, k)] = crate::quantum::c64(1.0, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{c64, CMatrix};
    use crate::rational::rat;
    use crate::scenario::{gamma18, validate_scenario};

    fn diagonal_data(h: &ContextualityScenario) -> PrepareMeasureData {
        PrepareMeasureData {
            edges: h
                .hyperedges()
                .iter()
                .map(|e| {
                    let n = e.len();
                    (0..n).map(|m| (0..n).map(|s| if m == s { 1.0 / n as f64 } else { 0.0 }).collect()).collect()
                })
                .collect(),
            special: None,
        }
    }

    fn uniform_data(h: &ContextualityScenario) -> PrepareMeasureData {
        PrepareMeasureData {
            edges: h
                .hyperedges()
                .iter()
                .map(|e| {
                    let n = e.len();
                    vec![vec![1.0 / (n * n) as f64; n]; n]
                })
                .collect(),
            special: None,
        }
    }

    #[test]
    fn corr_extremes() {
        let h = validate_scenario(&gamma18()).unwrap();
        let q = EdgeDistribution::uniform(&h);
        assert!((corr_value(&h, &q, &diagonal_data(&h)).unwrap() - 1.0).abs() < 1e-12);
        assert!((corr_value(&h, &q, &uniform_data(&h)).unwrap() - 0.25).abs() < 1e-12);
        let mixed = diagonal_data(&h).mix(&uniform_data(&h), 0.3);
        assert!((corr_value(&h, &q, &mixed).unwrap() - (0.3 + 0.7 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn missing_edge_rejected() {
        let h = validate_scenario(&gamma18()).unwrap();
        let mut d = diagonal_data(&h);
        d.edges.pop();
        assert_eq!(
            corr_value(&h, &EdgeDistribution::uniform(&h), &d),
            Err(WitnessError::MissingEdgeData { edge: 8 })
        );
    }

    #[test]
    fn logical_report() {
        let r = WitnessReport::logical(1.0, 5.0 / 6.0).unwrap();
        assert!(r.violated && (r.margin - 1.0 / 6.0).abs() < 1e-12);
        assert!(!WitnessReport::logical(0.25, 5.0 / 6.0).unwrap().violated);
        assert!(WitnessReport::logical(0.5, 1.0).is_err());
    }

    #[test]
    fn statistical_bound_arithmetic() {
        let b = statistical_bound_exact(rat(2, 1), rat(5, 2), rat(1, 2), rat(1, 2), rat(9, 10));
        assert_eq!(b, rat(11, 5));
        assert!((statistical_bound(2.0, 2.5, 0.5, 0.5, 0.9) - 2.2).abs() < 1e-12);
        assert_eq!(statistical_bound(2.0, 2.5, 0.5, 0.5, 1.0), 2.0);
        let r = WitnessReport::statistical(5f64.sqrt(), 1.0, 2.0, 2.5, 0.5, 0.5).unwrap();
        assert!(r.violated);
    }

    fn real(d: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_iterator(d, d, v.iter().map(|&x| c64(x, 0.0)))
    }

    #[test]
    fn identity_channel_classical_code() {
        // Alice's half is |x⟩ determined by m; Bob decodes y directly.
        let channel = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let prior = vec![0.5, 0.5];
        let mut rho = CMatrix::zeros(4, 4);
        rho[(0, 0)] = c64(1.0, 0.0);
        let id = CMatrix::identity(2, 2);
        // message m sends x = m: projective encoding {P_x} with P_m = I
        let enc = vec![vec![id.clone(), CMatrix::zeros(2, 2)], vec![CMatrix::zeros(2, 2), id.clone()]];
        let dec = vec![vec![id.clone(), CMatrix::zeros(2, 2)], vec![CMatrix::zeros(2, 2), id.clone()]];
        let task = OneShotTask { channel, prior, state: rho, dims: (2, 2), encodings: enc, decodings: dec };
        assert!((one_shot_success(&task).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn useless_channel_gives_prior_guess() {
        let k = 3;
        let channel = vec![vec![0.5, 0.5]; 2];
        let prior = vec![1.0 / k as f64; k];
        let id = CMatrix::identity(2, 2);
        let z = CMatrix::zeros(2, 2);
        let rho = real(4, &[0.25, 0.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0, 0.25]);
        let enc = vec![vec![basis_projector(2, 0), basis_projector(2, 1)]; k];
        let mut dec_one = vec![z.clone(); k];
        dec_one[1] = id.clone();
        let dec = vec![dec_one.clone(), dec_one];
        let task = OneShotTask { channel: channel.clone(), prior: prior.clone(), state: rho, dims: (2, 2), encodings: enc, decodings: dec };
        assert!((one_shot_success(&task).unwrap() - 1.0 / k as f64).abs() < 1e-12);
        assert!((best_classical_code(&channel, &prior).unwrap().value - 1.0 / k as f64).abs() < 1e-12);
    }

    #[test]
    fn non_projective_encoding_rejected() {
        let half = CMatrix::identity(2, 2) * c64(0.5, 0.0);
        let task = OneShotTask {
            channel: vec![vec![1.0], vec![1.0]],
            prior: vec![1.0],
            state: CMatrix::identity(4, 4) * c64(0.25, 0.0),
            dims: (2, 2),
            encodings: vec![vec![half.clone(), half]],
            decodings: vec![vec![CMatrix::identity(2, 2)]],
        };
        assert_eq!(one_shot_success(&task), Err(WitnessError::NonProjectiveEncoding { message: 0 }));
    }

    #[test]
    fn pentagon_channel_code_matches_brute_force() {
        // inputs 0..4, output y ∈ {x, x+1 mod 5} uniformly: confusability pentagon
        let channel: Vec<Vec<f64>> = (0..5)
            .map(|x| (0..5).map(|y| if y == x || y == (x + 1) % 5 { 0.5 } else { 0.0 }).collect())
            .collect();
        let prior = vec![0.2; 5];
        let best = best_classical_code(&channel, &prior).unwrap();
        // exhaustive over all encodings and decodings
        let mut brute: f64 = 0.0;
        for enc in 0..5usize.pow(5) {
            let e: Vec<usize> = (0..5).map(|m| enc / 5usize.pow(m as u32) % 5).collect();
            for dec in 0..5usize.pow(5) {
                let d: Vec<usize> = (0..5).map(|y| dec / 5usize.pow(y as u32) % 5).collect();
                let v: f64 = (0..5)
                    .map(|m| prior[m] * (0..5).filter(|&y| d[y] == m).map(|y| channel[e[m]][y]).sum::<f64>())
                    .sum();
                brute = brute.max(v);
            }
        }
        assert!((best.value - brute).abs() < 1e-12);
    }
}
