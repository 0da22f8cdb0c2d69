//! Joint measurability of binary qubit POVMs: feasibility by semidefinite
//! programming, noise thresholds, marginal-surgery constructions of cycle and
//! Specker structures, and the pentagonal inequality.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::opt::{simplex_maximize, BlockSdp, Entry, LinearProgram, OptError, SdpOptions};
use crate::quantum::{c64, hermitian_eigenvalues, is_hermitian, CMatrix};
use crate::scenario::{JointMeasurabilityStructure, ScenarioError};

/// Most POVMs accepted by [`jm_feasible`] (the joint POVM has `2^N` effects).
pub const MAX_JM_POVMS: usize = 6;
/// A family is declared jointly measurable when the optimal smallest
/// eigenvalue shift is at least `-JM_TOL`.
pub const JM_TOL: f64 = 1e-7;
/// Bisection stops once the bracketing interval is narrower than this.
pub const THRESHOLD_WIDTH: f64 = 1e-4;
const EFFECT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JmError {
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("no POVMs given")]
    Empty,
    #[error("{actual} POVMs exceed the limit of {limit}")]
    TooMany { actual: usize, limit: usize },
    #[error("family is {} on the whole range", if *.feasible_everywhere { "compatible" } else { "incompatible" })]
    NoTransition { feasible_everywhere: bool },
    #[error("construction has the wrong pattern: subset {subset:?} is {}", if *.found { "compatible" } else { "incompatible" })]
    VerificationFailed { subset: Vec<String>, found: bool },
    #[error("pair table {pair:?} disagrees with the single-measurement marginal of {measurement} by {gap:.3e}")]
    InconsistentMarginals { pair: (usize, usize), measurement: usize, gap: f64 },
    #[error("table {0} is not a probability distribution")]
    BadTable(String),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

fn pauli(k: usize) -> CMatrix {
    let (o, z, i) = (c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0));
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Two-outcome qubit POVM `{E, I − E}`; outcome 0 is `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryQubitPovm {
    effect: CMatrix,
}

impl BinaryQubitPovm {
    pub fn new(effect: CMatrix) -> Result<Self, JmError> {
        if effect.nrows() != 2 || !is_hermitian(&effect, 1e-12) {
            return Err(JmError::InvalidEffect("effect must be a Hermitian 2×2 matrix".into()));
        }
        let ev = hermitian_eigenvalues(&effect);
        if ev[0] < -EFFECT_TOL || ev[1] > 1.0 + EFFECT_TOL {
            return Err(JmError::InvalidEffect(format!("eigenvalues {ev:?} outside [0, 1]")));
        }
        Ok(BinaryQubitPovm { effect })
    }

    /// `E = (I + η n·σ)/2` for a unit Bloch direction `n`.
    pub fn noisy(axis: [f64; 3], eta: f64) -> Result<Self, JmError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(JmError::OutOfRange { what: "eta", value: eta });
        }
        let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(JmError::OutOfRange { what: "axis norm", value: norm });
        }
        let mut e = pauli(0);
        for (k, a) in axis.iter().enumerate() {
            e += pauli(k + 1) * c64(eta * a, 0.0);
        }
        Self::new(e * c64(0.5, 0.0))
    }

    pub fn effect(&self) -> &CMatrix {
        &self.effect
    }

    /// Effect of outcome 0 or 1.
    pub fn outcome(&self, a: usize) -> CMatrix {
        if a == 0 {
            self.effect.clone()
        } else {
            pauli(0) - &self.effect
        }
    }
}

/// `(I ± η σ_k)/2` for `k ∈ {1, 2, 3}`.
pub fn noisy_pauli(k: usize, eta: f64) -> Result<BinaryQubitPovm, JmError> {
    let axis = match k {
        1 => [1.0, 0.0, 0.0],
        2 => [0.0, 1.0, 0.0],
        3 => [0.0, 0.0, 1.0],
        _ => return Err(JmError::OutOfRange { what: "axis", value: k as f64 }),
    };
    BinaryQubitPovm::noisy(axis, eta)
}

/// Effects `G(a)` indexed by outcome string `a`, bit `x` of the index being
/// the outcome of POVM `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPovm {
    pub effects: Vec<CMatrix>,
    pub num_povms: usize,
}

impl JointPovm {
    /// Effect of outcome `a` for POVM `x`, summing out the others.
    pub fn marginal(&self, x: usize, a: usize) -> CMatrix {
        self.effects
            .iter()
            .enumerate()
            .filter(|(k, _)| k >> x & 1 == a)
            .fold(CMatrix::zeros(2, 2), |acc, (_, g)| acc + g)
    }

    /// Largest Frobenius deviation of a marginal from its target.
    pub fn marginal_residual(&self, povms: &[BinaryQubitPovm]) -> f64 {
        povms
            .iter()
            .enumerate()
            .map(|(x, p)| (self.marginal(x, 0) - p.effect()).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.effects.iter().map(|g| hermitian_eigenvalues(g)[0]).fold(f64::INFINITY, f64::min)
    }

    /// `‖Σ_a G(a) − I‖`
    pub fn normalization_residual(&self) -> f64 {
        (self.effects.iter().fold(CMatrix::zeros(2, 2), |acc, g| acc + g) - pauli(0)).norm()
    }

    /// Effects as nested `[re, im]` pairs for serialization.
    pub fn effects_as_pairs(&self) -> Vec<Vec<Vec<[f64; 2]>>> {
        self.effects
            .iter()
            .map(|g| (0..2).map(|i| (0..2).map(|j| [g[(i, j)].re, g[(i, j)].im]).collect()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JmVerdict {
    pub feasible: bool,
    /// Optimal `t` in `G(a) ⪰ t·I`; the family is compatible iff `t ≥ 0`.
    pub min_eigenvalue_margin: f64,
    /// Dual upper bound on the same quantity.
    pub dual_bound: f64,
    pub marginal_residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub joint: Option<JointPovm>,
}

/// Real symmetric embedding `[[Re, −Im], [Im, Re]]`.
fn embed(h: &CMatrix) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let z = h[(i, j)];
            e[(i, j)] = z.re;
            e[(i + 2, j + 2)] = z.re;
            e[(i, j + 2)] = -z.im;
            e[(i + 2, j)] = z.im;
        }
    }
    e
}

/// Hermitian part carried by an embedded 4×4 block.
fn unembed(y: &DMatrix<f64>) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| {
        c64(0.5 * (y[(i, j)] + y[(i + 2, j + 2)]), 0.5 * (y[(i + 2, j)] - y[(i, j + 2)]))
    })
}

fn push_embedded(out: &mut Vec<Entry>, block: usize, h: &CMatrix) {
    let e = embed(h);
    for i in 0..4 {
        for j in i..4 {
            if e[(i, j)] != 0.0 {
                out.push(Entry::new(block, i, j, 0.5 * e[(i, j)]));
            }
        }
    }
}

/// Maximizes `t` over joint POVMs with `G(a) ⪰ t·I`, writing
/// `G(a) = P(a) + (u − 1)I` with `P(a) ⪰ 0` and `u ≥ 0`.
pub fn jm_feasible(povms: &[BinaryQubitPovm]) -> Result<JmVerdict, JmError> {
    let n = povms.len();
    if n == 0 {
        return Err(JmError::Empty);
    }
    if n > MAX_JM_POVMS {
        return Err(JmError::TooMany { actual: n, limit: MAX_JM_POVMS });
    }
    if n == 1 {
        let joint = JointPovm { effects: vec![povms[0].outcome(0), povms[0].outcome(1)], num_povms: 1 };
        let t = joint.min_eigenvalue();
        return Ok(JmVerdict {
            feasible: true,
            min_eigenvalue_margin: t,
            dual_bound: t,
            marginal_residual: 0.0,
            iterations: 0,
            joint: Some(joint),
        });
    }
    let k = 1usize << n;
    let u_block = k;
    let mut blocks = vec![4; k];
    blocks.push(1);
    let mut constraints = Vec::new();
    let basis: Vec<CMatrix> = (0..4).map(pauli).collect();
    for h in &basis {
        let tr = h.trace().re;
        let mut row = Vec::new();
        for a in 0..k {
            push_embedded(&mut row, a, h);
        }
        if tr != 0.0 {
            row.push(Entry::new(u_block, 0, 0, k as f64 * tr));
        }
        constraints.push((row, tr * (1.0 + k as f64)));
    }
    for (x, p) in povms.iter().enumerate() {
        for h in &basis {
            let tr = h.trace().re;
            let mut row = Vec::new();
            for a in (0..k).filter(|a| a >> x & 1 == 0) {
                push_embedded(&mut row, a, h);
            }
            if tr != 0.0 {
                row.push(Entry::new(u_block, 0, 0, 0.5 * k as f64 * tr));
            }
            let target = (h * p.effect()).trace().re + 0.5 * k as f64 * tr;
            constraints.push((row, target));
        }
    }
    let sdp = BlockSdp { blocks, objective: vec![Entry::new(u_block, 0, 0, 1.0)], constraints };
    let sol = sdp.solve(&SdpOptions::default())?;
    let u = sol.x[u_block][(0, 0)];
    let t = u - 1.0;
    let mut effects: Vec<CMatrix> = (0..k).map(|a| unembed(&sol.x[a]) + pauli(0) * c64(t, 0.0)).collect();
    restore_marginals(&mut effects, povms);
    let joint = JointPovm { effects, num_povms: n };
    let feasible = t >= -JM_TOL;
    Ok(JmVerdict {
        feasible,
        min_eigenvalue_margin: t,
        dual_bound: sol.dual_value - 1.0,
        marginal_residual: joint.marginal_residual(povms),
        iterations: sol.iterations,
        joint: feasible.then_some(joint),
    })
}

/// Smallest Frobenius-norm change of the effects that makes the
/// normalization and marginal constraints hold exactly. The constraints act
/// on each Pauli component separately with the same matrix `A`, so the
/// correction is `Aᵀ(AAᵀ)⁻¹(b − Ag)` per component.
fn restore_marginals(effects: &mut [CMatrix], povms: &[BinaryQubitPovm]) {
    let (n, k) = (povms.len(), effects.len());
    let a = DMatrix::from_fn(n + 1, k, |r, col| {
        if r == 0 || col >> (r - 1) & 1 == 0 {
            1.0
        } else {
            0.0
        }
    });
    let Some(gram_inv) = (&a * a.transpose()).try_inverse() else {
        return;
    };
    for c in 0..4 {
        let sigma = pauli(c);
        let comp = |m: &CMatrix| 0.5 * (&sigma * m).trace().re;
        let g = nalgebra::DVector::from_iterator(k, effects.iter().map(comp));
        let mut b = nalgebra::DVector::zeros(n + 1);
        b[0] = comp(&pauli(0));
        for (x, p) in povms.iter().enumerate() {
            b[x + 1] = comp(p.effect());
        }
        let delta = a.transpose() * (&gram_inv * (b - &a * g));
        for (e, d) in effects.iter_mut().zip(delta.iter()) {
            *e += &sigma * c64(*d, 0.0);
        }
    }
}

/// Unbiased noisy projective measurements along fixed Bloch directions,
/// sharing one visibility `η`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisyFamily {
    pub axes: Vec<[f64; 3]>,
}

impl NoisyFamily {
    pub fn paulis(ks: &[usize]) -> Self {
        NoisyFamily {
            axes: ks
                .iter()
                .map(|&k| {
                    let mut a = [0.0; 3];
                    a[(k - 1).min(2)] = 1.0;
                    a
                })
                .collect(),
        }
    }

    /// Directions at angles `kπ/N` in the x–z plane.
    pub fn planar(n: usize) -> Self {
        NoisyFamily {
            axes: (0..n)
                .map(|k| {
                    let t = PI * k as f64 / n as f64;
                    [t.sin(), 0.0, t.cos()]
                })
                .collect(),
        }
    }

    pub fn at(&self, eta: f64) -> Result<Vec<BinaryQubitPovm>, JmError> {
        self.axes.iter().map(|&a| BinaryQubitPovm::noisy(a, eta)).collect()
    }

    pub fn subfamily(&self, mask: u64) -> Self {
        NoisyFamily {
            axes: self.axes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| *a).collect(),
        }
    }

    pub fn feasible_at(&self, eta: f64) -> Result<bool, JmError> {
        Ok(jm_feasible(&self.at(eta)?)?.feasible)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    /// Midpoint of the final bracket.
    pub eta: f64,
    pub feasible_below: f64,
    pub infeasible_above: f64,
    pub evaluations: usize,
}

/// Bisection for the largest compatible `η`; compatibility is monotone
/// nonincreasing in `η` for depolarized families.
pub fn jm_threshold(family: &NoisyFamily) -> Result<Threshold, JmError> {
    if family.feasible_at(1.0)? {
        return Err(JmError::NoTransition { feasible_everywhere: true });
    }
    if !family.feasible_at(0.0)? {
        return Err(JmError::NoTransition { feasible_everywhere: false });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut evaluations = 2;
    while hi - lo >= THRESHOLD_WIDTH {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if family.feasible_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold { eta: 0.5 * (lo + hi), feasible_below: lo, infeasible_above: hi, evaluations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurgeryTarget {
    Cycle,
    Specker,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetCheck {
    pub subset: Vec<String>,
    pub expected: bool,
    pub feasible: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryResult {
    pub target: SurgeryTarget,
    pub family: NoisyFamily,
    pub eta: f64,
    pub povms: Vec<BinaryQubitPovm>,
    pub structure: JointMeasurabilityStructure,
    pub checks: Vec<SubsetCheck>,
}

/// Target structure on `M1..MN`.
pub fn surgery_target(target: SurgeryTarget, n: usize) -> Result<JointMeasurabilityStructure, JmError> {
    let names = povm_names(n);
    let full = (1u64 << n) - 1;
    Ok(JointMeasurabilityStructure::from_predicate(names, |m| match target {
        SurgeryTarget::Specker => m != full,
        SurgeryTarget::Cycle => {
            m.count_ones() == 1 || (0..n).any(|i| m == (1 << i) | (1 << ((i + 1) % n)))
        }
    })?)
}

fn povm_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("M{i}")).collect()
}

/// Realizes the N-cycle or N-Specker structure with noisy qubit
/// measurements and certifies every subset with [`jm_feasible`].
///
/// The 3-Specker case uses the three Pauli axes; the rest use planar axes at
/// `kπ/N`. The common `η` sits midway between the largest threshold among
/// subsets that must become incompatible and the smallest threshold among
/// maximal subsets that must stay compatible.
pub fn marginal_surgery(target: SurgeryTarget, n: usize) -> Result<SurgeryResult, JmError> {
    let min_n = 3;
    if n < min_n {
        return Err(JmError::OutOfRange { what: "N", value: n as f64 });
    }
    if n > MAX_JM_POVMS {
        return Err(JmError::TooMany { actual: n, limit: MAX_JM_POVMS });
    }
    let family = if n == 3 { NoisyFamily::paulis(&[1, 2, 3]) } else { NoisyFamily::planar(n) };
    let full = (1u64 << n) - 1;
    let (must_fail, must_pass): (Vec<u64>, Vec<u64>) = match (target, n) {
        (_, 3) => (vec![full], (0..3).map(|i| full & !(1 << i)).collect()),
        (SurgeryTarget::Specker, _) => (vec![full], (0..n).map(|i| full & !(1 << i)).collect()),
        (SurgeryTarget::Cycle, _) => {
            let fail = (0..n).map(|i| (1 << i) | (1 << ((i + 2) % n))).collect();
            let pass = (0..n).map(|i| (1 << i) | (1 << ((i + 1) % n))).collect();
            (fail, pass)
        }
    };
    let thr = |masks: &[u64]| -> Result<Vec<f64>, JmError> {
        masks.par_iter().map(|&m| jm_threshold(&family.subfamily(m)).map(|t| t.eta)).collect()
    };
    let upper = thr(&must_fail)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let lower = thr(&must_pass)?.into_iter().fold(f64::INFINITY, f64::min);
    let eta = 0.5 * (upper + lower);

    let expected = surgery_target(target, n)?;
    let masks: Vec<u64> = (1..=full).filter(|m| m.count_ones() >= 2).collect();
    let results: Vec<(u64, JmVerdict)> = masks
        .par_iter()
        .map(|&m| Ok((m, jm_feasible(&family.subfamily(m).at(eta)?)?)))
        .collect::<Result<_, JmError>>()?;
    let names = povm_names(n);
    let mut checks = Vec::new();
    for (m, v) in &results {
        let exp = expected.is_compatible_mask(*m);
        let subset: Vec<String> = (0..n).filter(|i| m >> i & 1 == 1).map(|i| names[i].clone()).collect();
        if exp != v.feasible {
            return Err(JmError::VerificationFailed { subset, found: v.feasible });
        }
        checks.push(SubsetCheck { subset, expected: exp, feasible: v.feasible, margin: v.min_eigenvalue_margin });
    }
    let structure = JointMeasurabilityStructure::from_predicate(names, |m| {
        m.count_ones() == 1 || results.iter().any(|(r, v)| *r == m && v.feasible)
    })?;
    Ok(SurgeryResult { target, povms: family.at(eta)?, family, eta, structure, checks })
}

/// Pairs of the pentagonal scenario in table order.
pub const PENTAGON_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
/// Sign of `⟨X_iX_j⟩` per pair, then of `⟨X_j⟩` per measurement.
const PAIR_SIGNS: [f64; 6] = [-1.0, -1.0, 1.0, -1.0, 1.0, 1.0];
const SINGLE_SIGNS: [f64; 4] = [1.0, 1.0, 1.0, -1.0];
const TABLE_TOL: f64 = 1e-9;

/// `pairs[k][2a_i + a_j] = p(a_i a_j | ij)` for the pairs in
/// [`PENTAGON_PAIRS`], and `singles[j][a_j] = p(a_j | j)`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct PentagonalModel {
    pub pairs: [[f64; 4]; 6],
    pub singles: [[f64; 2]; 4],
}

impl PentagonalModel {
    /// Model of a global deterministic assignment.
    pub fn deterministic(bits: [u8; 4]) -> Self {
        let mut pairs = [[0.0; 4]; 6];
        for (k, &(i, j)) in PENTAGON_PAIRS.iter().enumerate() {
            pairs[k][2 * bits[i] as usize + bits[j] as usize] = 1.0;
        }
        let mut singles = [[0.0; 2]; 4];
        for j in 0..4 {
            singles[j][bits[j] as usize] = 1.0;
        }
        PentagonalModel { pairs, singles }
    }

    pub fn uniform() -> Self {
        PentagonalModel { pairs: [[0.25; 4]; 6], singles: [[0.5; 2]; 4] }
    }

    pub fn mix(models: &[(f64, PentagonalModel)]) -> Self {
        let mut out = PentagonalModel { pairs: [[0.0; 4]; 6], singles: [[0.0; 2]; 4] };
        for (w, m) in models {
            for k in 0..6 {
                for a in 0..4 {
                    out.pairs[k][a] += w * m.pairs[k][a];
                }
            }
            for j in 0..4 {
                for a in 0..2 {
                    out.singles[j][a] += w * m.singles[j][a];
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), JmError> {
        let check = |name: String, t: &[f64]| {
            if t.iter().any(|&p| p < -TABLE_TOL) || (t.iter().sum::<f64>() - 1.0).abs() > TABLE_TOL {
                Err(JmError::BadTable(name))
            } else {
                Ok(())
            }
        };
        for (k, t) in self.pairs.iter().enumerate() {
            check(format!("pair {:?}", PENTAGON_PAIRS[k]), t)?;
        }
        for (j, t) in self.singles.iter().enumerate() {
            check(format!("single {j}"), t)?;
        }
        for (k, &(i, j)) in PENTAGON_PAIRS.iter().enumerate() {
            let t = &self.pairs[k];
            let gi = (t[0] + t[1] - self.singles[i][0]).abs();
            if gi > TABLE_TOL {
                return Err(JmError::InconsistentMarginals { pair: (i, j), measurement: i, gap: gi });
            }
            let gj = (t[0] + t[2] - self.singles[j][0]).abs();
            if gj > TABLE_TOL {
                return Err(JmError::InconsistentMarginals { pair: (i, j), measurement: j, gap: gj });
            }
        }
        Ok(())
    }
}

/// `I_pent` with `⟨X_iX_j⟩ = Σ (−1)^{a_i+a_j} p(a_i a_j|ij)`.
pub fn pentagonal_value(m: &PentagonalModel) -> Result<f64, JmError> {
    m.validate()?;
    let corr = |t: &[f64; 4]| t[0] - t[1] - t[2] + t[3];
    let pairs: f64 = m.pairs.iter().zip(PAIR_SIGNS).map(|(t, s)| s * corr(t)).sum();
    let singles: f64 = m.singles.iter().zip(SINGLE_SIGNS).map(|(t, s)| s * (t[0] - t[1])).sum();
    Ok(pairs + singles)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PentagonBounds {
    pub deterministic_max: f64,
    pub maximizing_assignments: Vec<[u8; 4]>,
    /// Maximum over every model with consistent pairwise marginals.
    pub general_max: f64,
    pub general_optimizer: PentagonalModel,
}

pub fn pentagon_bounds() -> Result<PentagonBounds, JmError> {
    let mut best = f64::NEG_INFINITY;
    let mut argmax = Vec::new();
    for code in 0u8..16 {
        let bits = [code & 1, code >> 1 & 1, code >> 2 & 1, code >> 3 & 1];
        let v = pentagonal_value(&PentagonalModel::deterministic(bits))?;
        if v > best + 1e-12 {
            best = v;
            argmax.clear();
        }
        if (v - best).abs() <= 1e-12 {
            argmax.push(bits);
        }
    }

    // variables: the 24 pair probabilities; singles follow from the first
    // pair containing each measurement
    let mut obj = vec![0.0; 24];
    let corr = [1.0, -1.0, -1.0, 1.0];
    for k in 0..6 {
        for a in 0..4 {
            obj[4 * k + a] += PAIR_SIGNS[k] * corr[a];
        }
    }
    let first_pair = |j: usize| PENTAGON_PAIRS.iter().position(|&(a, b)| a == j || b == j).expect("pair");
    let zero_of = |k: usize, j: usize| -> [usize; 2] {
        if PENTAGON_PAIRS[k].0 == j {
            [4 * k, 4 * k + 1]
        } else {
            [4 * k, 4 * k + 2]
        }
    };
    for j in 0..4 {
        // ⟨X_j⟩ = 2 p(a_j = 0) − 1
        for v in zero_of(first_pair(j), j) {
            obj[v] += 2.0 * SINGLE_SIGNS[j];
        }
    }
    let offset: f64 = -SINGLE_SIGNS.iter().sum::<f64>();
    let mut lp = LinearProgram::new(obj);
    for k in 0..6 {
        let mut row = vec![0.0; 24];
        row[4 * k..4 * k + 4].fill(1.0);
        lp.add_eq(row, 1.0);
    }
    for j in 0..4 {
        let ks: Vec<usize> = (0..6).filter(|&k| PENTAGON_PAIRS[k].0 == j || PENTAGON_PAIRS[k].1 == j).collect();
        for &k in &ks[1..] {
            let mut row = vec![0.0; 24];
            for v in zero_of(ks[0], j) {
                row[v] += 1.0;
            }
            for v in zero_of(k, j) {
                row[v] -= 1.0;
            }
            lp.add_eq(row, 0.0);
        }
    }
    let sol = simplex_maximize(&lp)?;
    let mut pairs = [[0.0; 4]; 6];
    for k in 0..6 {
        for a in 0..4 {
            pairs[k][a] = sol.x[4 * k + a].max(0.0);
        }
    }
    let mut singles = [[0.0; 2]; 4];
    for j in 0..4 {
        let p0: f64 = zero_of(first_pair(j), j).iter().map(|&v| pairs[v / 4][v % 4]).sum();
        singles[j] = [p0, 1.0 - p0];
    }
    Ok(PentagonBounds {
        deterministic_max: best,
        maximizing_assignments: argmax,
        general_max: sol.value + offset,
        general_optimizer: PentagonalModel { pairs, singles },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noisy_pauli_effects() {
        let z = noisy_pauli(3, 1.0).unwrap();
        assert!((z.effect()[(0, 0)].re - 1.0).abs() < 1e-15 && z.effect()[(1, 1)].norm() < 1e-15);
        let x = noisy_pauli(1, 0.0).unwrap();
        assert!((x.effect() - pauli(0) * c64(0.5, 0.0)).norm() < 1e-15);
        let ev = hermitian_eigenvalues(noisy_pauli(2, 0.5).unwrap().effect());
        assert!((ev[0] - 0.25).abs() < 1e-12 && (ev[1] - 0.75).abs() < 1e-12);
        assert!(noisy_pauli(2, 1.5).is_err());
        assert!(noisy_pauli(4, 0.5).is_err());
    }

    #[test]
    fn single_povm_is_compatible() {
        let v = jm_feasible(&[noisy_pauli(1, 1.0).unwrap()]).unwrap();
        assert!(v.feasible);
    }

    #[test]
    fn pauli_pair_feasibility() {
        let lo = NoisyFamily::paulis(&[1, 2]).at(0.6).unwrap();
        let v = jm_feasible(&lo).unwrap();
        assert!(v.feasible);
        let j = v.joint.unwrap();
        assert!(j.marginal_residual(&lo) < 1e-6);
        assert!(j.min_eigenvalue() > -1e-7);
        assert!(j.normalization_residual() < 1e-6);
        let hi = NoisyFamily::paulis(&[1, 2]).at(0.75).unwrap();
        let v = jm_feasible(&hi).unwrap();
        assert!(!v.feasible && v.dual_bound < 0.0);
    }

    #[test]
    fn pauli_triple_margin_matches_closed_form() {
        let eta = 0.5;
        let v = jm_feasible(&NoisyFamily::paulis(&[1, 2, 3]).at(eta).unwrap()).unwrap();
        assert!(v.feasible);
        assert!((v.min_eigenvalue_margin - (1.0 - 3f64.sqrt() * eta) / 8.0).abs() < 1e-6);
    }

    #[test]
    fn identical_axes_have_no_transition() {
        assert_eq!(jm_threshold(&NoisyFamily::paulis(&[1, 1])), Err(JmError::NoTransition { feasible_everywhere: true }));
    }

    #[test]
    fn pentagon_values() {
        assert!(pentagonal_value(&PentagonalModel::uniform()).unwrap().abs() < 1e-12);
        let b = pentagon_bounds().unwrap();
        assert!((b.deterministic_max - 2.0).abs() < 1e-12);
        assert!((b.general_max - 6.0).abs() < 1e-9);
        assert!((pentagonal_value(&b.general_optimizer).unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn pentagon_rejects_inconsistent_marginals() {
        let mut m = PentagonalModel::uniform();
        m.singles[0] = [0.7, 0.3];
        assert!(matches!(pentagonal_value(&m), Err(JmError::InconsistentMarginals { .. })));
    }
}
