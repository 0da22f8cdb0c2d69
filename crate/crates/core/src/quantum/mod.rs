//! Dense complex linear algebra for rays, projectors and states, quantum
//! realizations of contextuality scenarios and the Born-rule models they
//! generate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::opt::{OptError, ProbabilisticModel};
use crate::scenario::{ContextualityScenario, ScenarioError};

pub mod builtin;
pub mod entanglement;
pub mod noise;
pub mod peres_mermin;

pub use builtin::{builtin_construction, Construction, BUILTIN_NAMES};
pub use entanglement::{entanglement_flags, EntanglementFlag};
pub use noise::{noisy_corr_crossing, simulate_noisy_corr, SpecialPreparation};
pub use peres_mermin::{peres24, peres_mermin_audit, PeresMerminAudit, ValuationProblem};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Orthogonality and completeness tolerance for realizations.
pub const RAY_TOL: f64 = 1e-10;
/// Largest Hilbert-space dimension handled by the dense kernels.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("ray has zero norm")]
    ZeroRay,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("rays {pair:?} in hyperedge {edge} are not orthogonal (overlap {overlap:.3e})")]
    NotOrthogonal { edge: usize, pair: (String, String), overlap: f64 },
    #[error("hyperedge {edge} is not complete (residual {residual:.3e})")]
    NotComplete { edge: usize, residual: f64 },
    #[error("expected {expected} rays, got {actual}")]
    IncompleteRealization { expected: usize, actual: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("noise parameter {0} outside [0, 1]")]
    InvalidNoise(f64),
    #[error("unknown construction `{0}`")]
    UnknownName(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Witness(#[from] crate::witness::WitnessError),
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).norm() <= tol
}

/// Eigenvalues of a Hermitian matrix via its real symmetric embedding
/// `[[Re, −Im], [Im, Re]]` (each eigenvalue appears twice).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut e = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            e[(i, j)] = z.re;
            e[(i + d, j + d)] = z.re;
            e[(i, j + d)] = -z.im;
            e[(i + d, j)] = z.im;
        }
    }
    let mut ev: Vec<f64> = e.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

/// Unit vector with canonical global phase: the first nonzero amplitude is
/// real and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    amplitudes: Vec<C64>,
}

impl Ray {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, QuantumError> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(QuantumError::ZeroRay);
        }
        let lead = amplitudes
            .iter()
            .find(|a| a.norm() > 1e-12 * norm)
            .copied()
            .ok_or(QuantumError::ZeroRay)?;
        let phase = lead.conj() / lead.norm();
        Ok(Ray { amplitudes: amplitudes.iter().map(|a| a * phase / norm).collect() })
    }

    pub fn real(v: &[f64]) -> Result<Self, QuantumError> {
        Self::new(v.iter().map(|&x| c64(x, 0.0)).collect())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ray) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn projector(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    /// `|⟨self|other⟩| ≈ 1`
    pub fn same_ray(&self, other: &Ray) -> bool {
        self.dim() == other.dim() && (self.inner(other).norm() - 1.0).abs() < 1e-9
    }
}

/// A density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    matrix: CMatrix,
}

impl State {
    pub const TOL: f64 = 1e-9;

    pub fn new(matrix: CMatrix) -> Result<Self, QuantumError> {
        if !is_hermitian(&matrix, Self::TOL) {
            return Err(QuantumError::InvalidState("not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TOL {
            return Err(QuantumError::InvalidState(format!("trace {}", tr.re)));
        }
        if hermitian_eigenvalues(&matrix).first().is_some_and(|&l| l < -Self::TOL) {
            return Err(QuantumError::InvalidState("not positive semidefinite".into()));
        }
        Ok(State { matrix })
    }

    pub fn pure(r: &Ray) -> Self {
        State { matrix: r.projector() }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        State { matrix: identity(d) / c64(d as f64, 0.0) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Tr(E ρ)`
    pub fn expectation(&self, e: &CMatrix) -> f64 {
        (e * &self.matrix).trace().re
    }
}

/// Rank-one projectors assigned to every vertex of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRealization {
    scenario: ContextualityScenario,
    rays: Vec<Ray>,
    dim: usize,
}

impl QuantumRealization {
    pub fn scenario(&self) -> &ContextualityScenario {
        &self.scenario
    }

    /// Rays in the scenario's canonical vertex order.
    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ray(&self, vertex: &str) -> Option<&Ray> {
        self.scenario.vertex_index(vertex).map(|i| &self.rays[i])
    }
}

/// Checks completeness `Σ_{v∈e} |r_v⟩⟨r_v| = I` and pairwise orthogonality
/// on every hyperedge. `rays` follows the scenario's vertex order.
pub fn validate_realization(
    h: &ContextualityScenario,
    rays: Vec<Ray>,
) -> Result<QuantumRealization, QuantumError> {
    if rays.len() != h.num_vertices() {
        return Err(QuantumError::IncompleteRealization {
            expected: h.num_vertices(),
            actual: rays.len(),
        });
    }
    let dim = rays[0].dim();
    if dim > MAX_DIM {
        return Err(QuantumError::DimensionMismatch { expected: MAX_DIM, actual: dim });
    }
    if let Some(r) = rays.iter().find(|r| r.dim() != dim) {
        return Err(QuantumError::DimensionMismatch { expected: dim, actual: r.dim() });
    }
    let id = identity(dim);
    for (k, e) in h.hyperedges().iter().enumerate() {
        let sum = e.iter().fold(CMatrix::zeros(dim, dim), |acc, &v| acc + rays[v].projector());
        let residual = (sum - &id).norm();
        if residual > RAY_TOL {
            return Err(QuantumError::NotComplete { edge: k, residual });
        }
        for (i, &a) in e.iter().enumerate() {
            for &b in &e[i + 1..] {
                let overlap = rays[a].inner(&rays[b]).norm();
                if overlap > RAY_TOL {
                    return Err(QuantumError::NotOrthogonal {
                        edge: k,
                        pair: (h.vertices()[a].clone(), h.vertices()[b].clone()),
                        overlap,
                    });
                }
            }
        }
    }
    Ok(QuantumRealization { scenario: h.clone(), rays, dim })
}

/// `p(v) = Tr(Π_v ρ)`.
pub fn born_model(r: &QuantumRealization, rho: &State) -> Result<ProbabilisticModel, QuantumError> {
    if rho.dim() != r.dim {
        return Err(QuantumError::DimensionMismatch { expected: r.dim, actual: rho.dim() });
    }
    let values = r.rays.iter().map(|ray| rho.expectation(&ray.projector()).clamp(0.0, 1.0)).collect();
    Ok(ProbabilisticModel::new(&r.scenario, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{validate_scenario, RawScenario};

    #[test]
    fn ray_phase_is_canonical() {
        let r = Ray::new(vec![c64(0.0, 0.0), c64(0.0, 2.0), c64(0.0, -2.0)]).unwrap();
        assert!(r.amplitudes()[1].im.abs() < 1e-15 && r.amplitudes()[1].re > 0.0);
        assert!((r.inner(&r).re - 1.0).abs() < 1e-15);
        assert!(Ray::real(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn state_checks() {
        assert!(State::new(identity(2) / c64(2.0, 0.0)).is_ok());
        assert!(State::new(identity(2)).is_err());
        let mut m = identity(2) / c64(2.0, 0.0);
        m[(0, 1)] = c64(0.0, 1.0);
        assert!(State::new(m).is_err());
    }

    #[test]
    fn eigenvalues_of_pauli_y() {
        let y = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)]);
        let ev = hermitian_eigenvalues(&y);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_state_concentrates_on_vertex() {
        let h = validate_scenario(&RawScenario::new(&["a", "b"], &[&["a", "b"]])).unwrap();
        let rays = vec![Ray::real(&[1.0, 1.0]).unwrap(), Ray::real(&[1.0, -1.0]).unwrap()];
        let r = validate_realization(&h, rays.clone()).unwrap();
        let p = born_model(&r, &State::pure(&rays[0])).unwrap();
        assert!((p.values[0] - 1.0).abs() < 1e-12 && p.values[1].abs() < 1e-12);
    }
}
