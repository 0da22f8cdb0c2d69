//! Local discrimination of product bases assisted by a Boolean process
//! function: basis generation, the no-global-past condition and a
//! statevector simulation of the three-step protocol.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causality::{process_consistency, CausalError, ProcessFunction};
use crate::quantum::{c64, C64};

/// Orthogonality tolerance for generated bases.
pub const BASIS_TOL: f64 = 1e-12;
/// Largest party count simulated.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LopfError {
    #[error("process function is inconsistent")]
    InconsistentProcess,
    #[error("party {party} is in the global past")]
    NoGlobalPastViolated { party: usize },
    #[error("states {a} and {b} overlap by {overlap:.3e}")]
    NotOrthogonal { a: usize, b: usize, overlap: f64 },
    #[error("input is not an element of the basis; outcome distribution has {} atoms", .distribution.len())]
    NonBasisInput { distribution: Vec<ProtocolRecord> },
    #[error("state has dimension {actual}, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("{0} parties exceed the simulation limit")]
    TooLarge(usize),
    #[error(transparent)]
    Causal(#[from] CausalError),
}

/// Boolean process function: `tables[k][o⃗] = ω_k(o⃗)` with `o⃗` big-endian.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanProcessFunction {
    pub tables: Vec<Vec<u8>>,
}

impl BooleanProcessFunction {
    pub fn new(tables: Vec<Vec<u8>>) -> Result<Self, LopfError> {
        let n = tables.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(LopfError::TooLarge(n));
        }
        if tables.iter().any(|t| t.len() != 1 << n || t.iter().any(|&b| b > 1)) {
            return Err(CausalError::ShapeMismatch(format!("each table needs {} bits", 1 << n)).into());
        }
        Ok(BooleanProcessFunction { tables })
    }

    pub fn from_rule(n: usize, omega: impl Fn(&[u8]) -> Vec<u8>) -> Result<Self, LopfError> {
        let mut tables = vec![vec![0u8; 1 << n]; n];
        for o in 0..1usize << n {
            let bits: Vec<u8> = (0..n).map(|k| (o >> (n - 1 - k) & 1) as u8).collect();
            for (k, b) in omega(&bits).into_iter().enumerate() {
                tables[k][o] = b;
            }
        }
        Self::new(tables)
    }

    /// `i_1 = ō_2·o_3`, `i_2 = ō_3·o_1`, `i_3 = ō_1·o_2`.
    pub fn afbw() -> Self {
        Self::from_rule(3, |o| vec![(1 - o[1]) * o[2], (1 - o[2]) * o[0], (1 - o[0]) * o[1]]).expect("three parties")
    }

    pub fn parties(&self) -> usize {
        self.tables.len()
    }

    /// Joint input index `ω(o⃗)`.
    pub fn apply(&self, o: usize) -> usize {
        let n = self.parties();
        self.tables.iter().fold(0, |acc, t| acc << 1 | t[o] as usize) & ((1 << n) - 1)
    }

    pub fn to_process_function(&self) -> ProcessFunction {
        let n = self.parties();
        ProcessFunction {
            inputs: vec![2; n],
            outputs: vec![2; n],
            functions: self.tables.iter().map(|t| t.iter().map(|&b| b as usize).collect()).collect(),
        }
    }

    pub fn is_consistent(&self) -> Result<bool, LopfError> {
        Ok(process_consistency(&self.to_process_function().to_environment())?.consistent)
    }
}

/// Party `k` receives a signal from some other party when `ω_k` varies with
/// some `o_j`, `j ≠ k`. Returns the first party that does not, if any.
pub fn global_past_party(w: &BooleanProcessFunction) -> Result<Option<usize>, LopfError> {
    if !w.is_consistent()? {
        return Err(LopfError::InconsistentProcess);
    }
    let n = w.parties();
    Ok((0..n).find(|&k| {
        let t = &w.tables[k];
        !(0..1usize << n).any(|o| (0..n).filter(|&j| j != k).any(|j| t[o] != t[o ^ (1 << (n - 1 - j))]))
    }))
}

pub fn no_global_past(w: &BooleanProcessFunction) -> Result<bool, LopfError> {
    Ok(global_past_party(w)?.is_none())
}

/// Unit vector on `n` qubits, amplitudes big-endian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, LopfError> {
        if !amplitudes.len().is_power_of_two() || amplitudes.len() > 1 << MAX_QUBITS {
            return Err(LopfError::DimensionMismatch { expected: amplitudes.len().next_power_of_two(), actual: amplitudes.len() });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > BASIS_TOL {
            return Err(LopfError::NotNormalized(norm));
        }
        Ok(StateVector { amplitudes })
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut amplitudes = vec![c64(0.0, 0.0); 1 << n];
        amplitudes[k] = c64(1.0, 0.0);
        StateVector { amplitudes }
    }

    /// Product state from a label over `0 1 + -`.
    pub fn product(label: &str) -> Result<Self, LopfError> {
        let mut amp = vec![c64(1.0, 0.0)];
        for ch in label.chars() {
            let q = match ch {
                '0' => [1.0, 0.0],
                '1' => [0.0, 1.0],
                '+' => [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
                '-' => [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
                _ => return Err(CausalError::ShapeMismatch(format!("bad label `{label}`")).into()),
            };
            amp = amp.iter().flat_map(|a| q.iter().map(move |&x| a * x)).collect();
        }
        Self::new(amp)
    }

    pub fn qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn inner(&self, o: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&o.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `H` on every qubit `k` with bit `k` of `mask` set (big-endian).
    pub fn hadamards(&self, mask: usize) -> Self {
        let n = self.qubits();
        let mut amp = self.amplitudes.clone();
        for k in 0..n {
            if mask >> (n - 1 - k) & 1 == 0 {
                continue;
            }
            let bit = 1 << (n - 1 - k);
            for idx in 0..amp.len() {
                if idx & bit == 0 {
                    let (a, b) = (amp[idx], amp[idx | bit]);
                    amp[idx] = (a + b) * FRAC_1_SQRT_2;
                    amp[idx | bit] = (a - b) * FRAC_1_SQRT_2;
                }
            }
        }
        StateVector { amplitudes: amp }
    }

    /// Label over `0 1 + -` when the state is such a product, up to phase.
    pub fn product_label(&self) -> Option<String> {
        let n = self.qubits();
        for mask in 0..1usize << n {
            let h = self.hadamards(mask);
            if let Some(k) = h.amplitudes.iter().position(|a| (a.norm() - 1.0).abs() < 1e-9) {
                return Some(
                    (0..n)
                        .map(|q| {
                            let bit = k >> (n - 1 - q) & 1;
                            match (mask >> (n - 1 - q) & 1, bit) {
                                (0, 0) => '0',
                                (0, _) => '1',
                                (_, 0) => '+',
                                _ => '-',
                            }
                        })
                        .collect(),
                );
            }
        }
        None
    }
}

/// `S_ω = { H^{ω(o⃗)} |o⃗⟩ }` in order of `o⃗`, with orthonormality checked.
pub fn s_omega_basis(w: &BooleanProcessFunction) -> Result<Vec<StateVector>, LopfError> {
    if let Some(party) = global_past_party(w)? {
        return Err(LopfError::NoGlobalPastViolated { party });
    }
    let n = w.parties();
    let states: Vec<StateVector> = (0..1usize << n).map(|o| StateVector::basis(n, o).hadamards(w.apply(o))).collect();
    let (a, b, overlap) = gram_deviation(&states);
    if overlap > BASIS_TOL {
        return Err(LopfError::NotOrthogonal { a, b, overlap });
    }
    Ok(states)
}

/// Largest `|G_ab − δ_ab|` over the Gram matrix, with its position.
pub fn gram_deviation(states: &[StateVector]) -> (usize, usize, f64) {
    let mut worst = (0, 0, 0.0);
    for (a, sa) in states.iter().enumerate() {
        for (b, sb) in states.iter().enumerate().skip(a) {
            let target = if a == b { 1.0 } else { 0.0 };
            let dev = (sa.inner(sb) - c64(target, 0.0)).norm();
            if dev > worst.2 {
                worst = (a, b, dev);
            }
        }
    }
    worst
}

/// One branch of the protocol: inputs `i⃗ = ω(o⃗)`, outcomes `o⃗`, and the
/// basis element it identifies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRecord {
    pub inputs: String,
    pub outputs: String,
    pub probability: f64,
    pub identified: usize,
    /// Fidelity of the corrected post-measurement state with the identified
    /// basis element.
    pub fidelity: f64,
}

fn bits(v: usize, n: usize) -> String {
    (0..n).map(|k| if v >> (n - 1 - k) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Outcome distribution of the protocol: each party applies `H^{i_k}`,
/// measures in the computational basis (`|0⟩⟨0| ↦ o_k = 0`) and reapplies
/// `H^{i_k}`, with `i⃗ = ω(o⃗)`. Only pairs `(ω(o⃗), o⃗)` satisfy the wiring,
/// so each outcome string fixes its branch.
pub fn protocol_distribution(
    psi: &StateVector,
    w: &BooleanProcessFunction,
) -> Result<Vec<ProtocolRecord>, LopfError> {
    let n = w.parties();
    if psi.qubits() != n || psi.amplitudes.len() != 1 << n {
        return Err(LopfError::DimensionMismatch { expected: 1 << n, actual: psi.amplitudes.len() });
    }
    let basis = s_omega_basis(w)?;
    let mut out = Vec::new();
    for o in 0..1usize << n {
        let i = w.apply(o);
        let amp = psi.hadamards(i).amplitudes[o];
        let p = amp.norm_sqr();
        if p <= BASIS_TOL {
            continue;
        }
        let post = StateVector::basis(n, o).hadamards(i);
        out.push(ProtocolRecord {
            inputs: bits(i, n),
            outputs: bits(o, n),
            probability: p,
            identified: o,
            fidelity: basis[o].inner(&post).norm_sqr(),
        });
    }
    Ok(out)
}

/// The deterministic record for a basis element; other inputs are rejected
/// with their outcome distribution.
pub fn shift_protocol_sim(psi: &StateVector, w: &BooleanProcessFunction) -> Result<ProtocolRecord, LopfError> {
    let dist = protocol_distribution(psi, w)?;
    match dist.as_slice() {
        [only] if (only.probability - 1.0).abs() <= BASIS_TOL => Ok(only.clone()),
        _ => Err(LopfError::NonBasisInput { distribution: dist }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceRow {
    pub inputs: String,
    pub outputs: String,
    pub state: String,
}

/// `(i⃗, o⃗) ↦ ψ` for every element of `S_ω`, in order of `o⃗`.
pub fn correspondence_table(w: &BooleanProcessFunction) -> Result<Vec<CorrespondenceRow>, LopfError> {
    let basis = s_omega_basis(w)?;
    basis
        .iter()
        .map(|psi| {
            let r = shift_protocol_sim(psi, w)?;
            Ok(CorrespondenceRow {
                inputs: r.inputs,
                outputs: r.outputs,
                state: psi.product_label().unwrap_or_else(|| "?".into()),
            })
        })
        .collect()
}
