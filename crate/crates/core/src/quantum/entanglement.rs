//! Product/entangled classification of multipartite rays by the purity of
//! every single-factor reduced state.

use serde::Serialize;

use super::{CMatrix, QuantumError, Ray};

/// Purity deficit below which a reduced state counts as pure.
pub const PURITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementFlag {
    pub product: bool,
    /// `Tr ρ_k²` for each factor `k`.
    pub purities: Vec<f64>,
}

/// Reduced density matrix of factor `k` for a ray over `factors`.
pub fn reduced_state(ray: &Ray, factors: &[usize], k: usize) -> CMatrix {
    let dk = factors[k];
    let inner: usize = factors[k + 1..].iter().product();
    let outer: usize = factors[..k].iter().product();
    let amp = ray.amplitudes();
    let mut rho = CMatrix::zeros(dk, dk);
    for o in 0..outer {
        for i in 0..inner {
            for a in 0..dk {
                let xa = amp[(o * dk + a) * inner + i];
                for b in 0..dk {
                    let xb = amp[(o * dk + b) * inner + i];
                    rho[(a, b)] += xa * xb.conj();
                }
            }
        }
    }
    rho
}

pub fn entanglement_flags(
    rays: &[Ray],
    factors: &[usize],
) -> Result<Vec<EntanglementFlag>, QuantumError> {
    let d: usize = factors.iter().product();
    if factors.is_empty() || factors.contains(&0) {
        return Err(QuantumError::DimensionMismatch { expected: 1, actual: 0 });
    }
    rays.iter()
        .map(|r| {
            if r.dim() != d {
                return Err(QuantumError::DimensionMismatch { expected: d, actual: r.dim() });
            }
            let purities: Vec<f64> = (0..factors.len())
                .map(|k| {
                    let rho = reduced_state(r, factors, k);
                    (&rho * &rho).trace().re
                })
                .collect();
            let product = purities.iter().all(|p| (1.0 - p).abs() <= PURITY_TOL);
            Ok(EntanglementFlag { product, purities })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_flags() {
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        let f = entanglement_flags(&[Ray::real(&v).unwrap()], &[2, 2, 2]).unwrap();
        assert!(f[0].product);
        let bell = Ray::real(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        let f = entanglement_flags(&[bell], &[2, 2]).unwrap();
        assert!(!f[0].product);
        assert!(f[0].purities.iter().all(|p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn asymmetric_factors() {
        // |1⟩ ⊗ (|0⟩ + |2⟩)/√2 in 2 ⊗ 3
        let f = entanglement_flags(&[Ray::real(&[0.0, 0.0, 0.0, 1.0, 0.0, 1.0]).unwrap()], &[2, 3]).unwrap();
        assert!(f[0].product);
        assert!(entanglement_flags(&[Ray::real(&[1.0, 0.0]).unwrap()], &[2, 2]).is_err());
    }
}
