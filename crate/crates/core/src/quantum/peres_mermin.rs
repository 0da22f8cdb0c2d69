//! The Peres–Mermin square: exact operator identities, the valuation
//! contradiction, and the 24 rays of its row/column eigenbases.

use std::ops::{Add, Mul, Neg};

use serde::Serialize;

use super::{c64, CMatrix, Ray};

/// Gaussian integer `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GaussianInt {
    pub re: i64,
    pub im: i64,
}

impl GaussianInt {
    pub const ZERO: Self = GaussianInt { re: 0, im: 0 };
    pub const ONE: Self = GaussianInt { re: 1, im: 0 };
    pub const I: Self = GaussianInt { re: 0, im: 1 };
}

impl Add for GaussianInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GaussianInt { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Mul for GaussianInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        GaussianInt { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl Neg for GaussianInt {
    type Output = Self;
    fn neg(self) -> Self {
        GaussianInt { re: -self.re, im: -self.im }
    }
}

/// Square matrix over the Gaussian integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianMatrix {
    n: usize,
    data: Vec<GaussianInt>,
}

impl GaussianMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![GaussianInt::ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = GaussianInt::ONE;
        }
        GaussianMatrix { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> GaussianInt {
        self.data[i * self.n + j]
    }

    /// Single-qubit Pauli by letter.
    pub fn pauli(c: char) -> Option<Self> {
        use GaussianInt as G;
        let (z, o, i) = (G::ZERO, G::ONE, G::I);
        let data = match c {
            'I' => vec![o, z, z, o],
            'X' => vec![z, o, o, z],
            'Y' => vec![z, -i, i, z],
            'Z' => vec![o, z, z, -o],
            _ => return None,
        };
        Some(GaussianMatrix { n: 2, data })
    }

    /// Tensor product of single-qubit Paulis, e.g. `"XY"` for `X ⊗ Y`.
    pub fn word(w: &str) -> Option<Self> {
        w.chars().try_fold(GaussianMatrix::identity(1), |acc, c| Some(acc.kron(&Self::pauli(c)?)))
    }

    pub fn kron(&self, o: &Self) -> Self {
        let n = self.n * o.n;
        let mut data = vec![GaussianInt::ZERO; n * n];
        for a in 0..self.n {
            for b in 0..self.n {
                for c in 0..o.n {
                    for d in 0..o.n {
                        data[(a * o.n + c) * n + b * o.n + d] = self.get(a, b) * o.get(c, d);
                    }
                }
            }
        }
        GaussianMatrix { n, data }
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut data = vec![GaussianInt::ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == GaussianInt::ZERO {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = data[i * n + j] + a * o.get(k, j);
                }
            }
        }
        GaussianMatrix { n, data }
    }

    pub fn scaled(&self, s: i64) -> Self {
        GaussianMatrix {
            n: self.n,
            data: self.data.iter().map(|&x| x * GaussianInt { re: s, im: 0 }).collect(),
        }
    }

    pub fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| {
            let g = self.get(i, j);
            c64(g.re as f64, g.im as f64)
        })
    }
}

/// ±1-valued observables with product constraints on subsets of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationProblem {
    pub words: Vec<String>,
    pub constraints: Vec<(Vec<usize>, i8)>,
}

impl ValuationProblem {
    /// The nine words of the square; rows and columns multiply to `+I`
    /// except the last column, which multiplies to `−I`.
    pub fn peres_mermin() -> Self {
        let words = ["XI", "IX", "XX", "IY", "YI", "YY", "XY", "YX", "ZZ"];
        ValuationProblem {
            words: words.iter().map(|s| s.to_string()).collect(),
            constraints: vec![
                (vec![0, 1, 2], 1),
                (vec![3, 4, 5], 1),
                (vec![6, 7, 8], 1),
                (vec![0, 3, 6], 1),
                (vec![1, 4, 7], 1),
                (vec![2, 5, 8], -1),
            ],
        }
    }

    /// Assignments (bit `k` set ⇔ word `k` valued −1) meeting every constraint.
    pub fn satisfying(&self) -> Vec<u32> {
        let n = self.words.len();
        (0u32..1 << n)
            .filter(|&m| {
                self.constraints.iter().all(|(ws, sign)| {
                    let neg = ws.iter().filter(|&&w| m >> w & 1 == 1).count();
                    let prod = if neg % 2 == 0 { 1 } else { -1 };
                    prod == *sign
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub words: Vec<String>,
    pub expected_sign: i8,
    /// Product equals `sign · I` exactly over the Gaussian integers.
    pub exact: bool,
    /// Frobenius residual of the same identity in floating point.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeresMerminAudit {
    pub identities: Vec<IdentityCheck>,
    pub valuations_scanned: usize,
    pub satisfying_valuations: usize,
    /// Satisfying valuations with the last constraint removed.
    pub satisfying_without_last: usize,
    /// Satisfying valuations with the last constraint's sign flipped.
    pub satisfying_with_last_flipped: usize,
}

pub fn peres_mermin_audit() -> PeresMerminAudit {
    let problem = ValuationProblem::peres_mermin();
    let identities = problem
        .constraints
        .iter()
        .map(|(ws, sign)| {
            let mats: Vec<GaussianMatrix> =
                ws.iter().map(|&w| GaussianMatrix::word(&problem.words[w]).expect("pauli word")).collect();
            let prod = mats.iter().skip(1).fold(mats[0].clone(), |acc, m| acc.matmul(m));
            let target = GaussianMatrix::identity(4).scaled(i64::from(*sign));
            let fprod = mats
                .iter()
                .skip(1)
                .fold(mats[0].to_complex(), |acc, m| acc * m.to_complex());
            IdentityCheck {
                words: ws.iter().map(|&w| problem.words[w].clone()).collect(),
                expected_sign: *sign,
                exact: prod == target,
                residual: (fprod - target.to_complex()).norm(),
            }
        })
        .collect();

    let mut dropped = problem.clone();
    dropped.constraints.pop();
    let mut flipped = problem.clone();
    if let Some(last) = flipped.constraints.last_mut() {
        last.1 = -last.1;
    }
    PeresMerminAudit {
        identities,
        valuations_scanned: 1 << problem.words.len(),
        satisfying_valuations: problem.satisfying().len(),
        satisfying_without_last: dropped.satisfying().len(),
        satisfying_with_last_flipped: flipped.satisfying().len(),
    }
}

/// The 24 rays of the six row/column eigenbases together with every
/// orthonormal basis they contain.
#[derive(Debug, Clone, PartialEq)]
pub struct Peres24 {
    pub rays: Vec<Ray>,
    /// The six eigenbases of the square's rows and columns come first, in
    /// the order rows 1–3, columns 1–3; the remaining bases follow in
    /// lexicographic order.
    pub bases: Vec<Vec<usize>>,
}

pub fn peres24() -> Peres24 {
    let problem = ValuationProblem::peres_mermin();
    let id = GaussianMatrix::identity(4);
    let mut rays: Vec<Ray> = Vec::new();
    let mut square_bases = Vec::new();
    for (ws, _) in &problem.constraints {
        let a = GaussianMatrix::word(&problem.words[ws[0]]).expect("pauli word");
        let b = GaussianMatrix::word(&problem.words[ws[1]]).expect("pauli word");
        let mut basis = Vec::new();
        for s1 in [1i64, -1] {
            for s2 in [1i64, -1] {
                // (I + s1 A)(I + s2 B) is 4× a rank-one projector
                let pa = add(&id, &a.scaled(s1));
                let pb = add(&id, &b.scaled(s2));
                let p = pa.matmul(&pb).to_complex();
                let col = (0..4)
                    .max_by(|&i, &j| p.column(i).norm().total_cmp(&p.column(j).norm()))
                    .expect("four columns");
                let ray = Ray::new(p.column(col).iter().copied().collect()).expect("nonzero column");
                let idx = match rays.iter().position(|r| r.same_ray(&ray)) {
                    Some(i) => i,
                    None => {
                        rays.push(ray);
                        rays.len() - 1
                    }
                };
                basis.push(idx);
            }
        }
        basis.sort_unstable();
        square_bases.push(basis);
    }

    let n = rays.len();
    let orth = |a: usize, b: usize| rays[a].inner(&rays[b]).norm() < 1e-9;
    let mut extra = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !orth(a, b) {
                continue;
            }
            for c in b + 1..n {
                if !orth(a, c) || !orth(b, c) {
                    continue;
                }
                for d in c + 1..n {
                    if orth(a, d) && orth(b, d) && orth(c, d) {
                        let basis = vec![a, b, c, d];
                        if !square_bases.contains(&basis) {
                            extra.push(basis);
                        }
                    }
                }
            }
        }
    }
    let mut bases = square_bases;
    bases.extend(extra);
    Peres24 { rays, bases }
}

fn add(a: &GaussianMatrix, b: &GaussianMatrix) -> GaussianMatrix {
    GaussianMatrix { n: a.n, data: a.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::entanglement_flags;

    #[test]
    fn audit() {
        let a = peres_mermin_audit();
        assert!(a.identities.iter().all(|c| c.exact && c.residual < 1e-12));
        assert_eq!(a.valuations_scanned, 512);
        assert_eq!(a.satisfying_valuations, 0);
        assert!(a.satisfying_without_last > 0);
        assert!(a.satisfying_with_last_flipped > 0);
    }

    #[test]
    fn brute_force_dropped_constraint_count() {
        // five independent parity constraints on nine bits leave 2^4 solutions
        assert_eq!(peres_mermin_audit().satisfying_without_last, 16);
    }

    #[test]
    fn twenty_four_rays_and_bases() {
        let p = peres24();
        assert_eq!(p.rays.len(), 24);
        assert_eq!(p.bases.len(), 24);
        let flags = entanglement_flags(&p.rays, &[2, 2]).unwrap();
        assert_eq!(flags.iter().filter(|f| !f.product).count(), 8);
        // rows 1, 2 and columns 1, 2 consist of local Paulis only
        for b in [0, 1, 3, 4] {
            assert!(p.bases[b].iter().all(|&r| flags[r].product));
        }
        // the last column is the Bell basis
        assert!(p.bases[5].iter().all(|&r| !flags[r].product));
    }
}
