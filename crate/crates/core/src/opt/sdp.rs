//! Block-diagonal semidefinite programs solved by the alternating direction
//! augmented Lagrangian method on the dual (Wen, Goldfarb and Yin).
//!
//! Each sweep solves for the dual multipliers `y` against the Gram matrix of
//! the constraints, then splits `C − A*(y) − μX` into its PSD and NSD parts
//! by eigendecomposition: the positive part is the dual slack `S`, the
//! negative part (scaled by `1/μ`) the new primal iterate `X`. Both iterates
//! are therefore PSD at every step and complementary by construction.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::OptError;

/// Reported tolerance on the optimal value of SDP-backed quantities.
pub const SDP_TOL: f64 = 1e-5;

/// Largest matrix dimension accepted by [`SemidefiniteProgram`].
pub const MAX_SDP_DIM: usize = 64;

/// One symmetric coefficient: the matrix has `value` at `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

impl Entry {
    pub fn new(block: usize, i: usize, j: usize, value: f64) -> Self {
        Entry { block, i: i.min(j), j: i.max(j), value }
    }

    /// Multiplicity of the coefficient in a trace inner product.
    fn weight(&self) -> f64 {
        if self.i == self.j {
            1.0
        } else {
            2.0
        }
    }
}

/// `maximize ⟨C, X⟩` subject to `⟨A_k, X⟩ = b_k` and `X = diag(X_1, …) ⪰ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSdp {
    pub blocks: Vec<usize>,
    pub objective: Vec<Entry>,
    pub constraints: Vec<(Vec<Entry>, f64)>,
}

/// Dense single-block program: symmetric objective, equality constraints and
/// a set of entries forced to zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemidefiniteProgram {
    pub n: usize,
    pub objective: Vec<Vec<f64>>,
    pub constraints: Vec<(Vec<Vec<f64>>, f64)>,
    pub zero_pattern: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdpOptions {
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub gap_tol: f64,
    pub max_iterations: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { primal_tol: 1e-8, dual_tol: 1e-8, gap_tol: 1e-8, max_iterations: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpSolution {
    /// Primal objective `⟨C, X⟩`.
    pub value: f64,
    /// Dual objective `bᵀy`.
    pub dual_value: f64,
    #[serde(skip)]
    pub x: Vec<DMatrix<f64>>,
    #[serde(skip)]
    pub y: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

fn dense_entries(
    block: usize,
    m: &[Vec<f64>],
    n: usize,
    scale: f64,
    out: &mut Vec<Entry>,
) -> Result<(), OptError> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(OptError::DimensionMismatch { expected: n, actual: m.len() });
    }
    for i in 0..n {
        for j in i..n {
            if (m[i][j] - m[j][i]).abs() > 1e-12 * (1.0 + m[i][j].abs()) {
                return Err(OptError::NotSymmetric);
            }
            if m[i][j] != 0.0 {
                out.push(Entry::new(block, i, j, scale * m[i][j]));
            }
        }
    }
    Ok(())
}

impl SemidefiniteProgram {
    pub fn new(objective: Vec<Vec<f64>>) -> Self {
        SemidefiniteProgram {
            n: objective.len(),
            objective,
            constraints: Vec::new(),
            zero_pattern: Vec::new(),
        }
    }

    pub fn to_block(&self) -> Result<BlockSdp, OptError> {
        let n = self.n;
        if n > MAX_SDP_DIM {
            return Err(OptError::TooLarge { actual: n, limit: MAX_SDP_DIM });
        }
        let mut objective = Vec::new();
        dense_entries(0, &self.objective, n, 1.0, &mut objective)?;
        let mut constraints = Vec::new();
        for (a, b) in &self.constraints {
            let mut e = Vec::new();
            dense_entries(0, a, n, 1.0, &mut e)?;
            constraints.push((e, *b));
        }
        for &(i, j) in &self.zero_pattern {
            if i >= n || j >= n {
                return Err(OptError::DimensionMismatch { expected: n, actual: i.max(j) + 1 });
            }
            let v = if i == j { 1.0 } else { 0.5 };
            constraints.push((vec![Entry::new(0, i, j, v)], 0.0));
        }
        Ok(BlockSdp { blocks: vec![n], objective, constraints })
    }
}

pub fn sdp_maximize(sdp: &SemidefiniteProgram) -> Result<SdpSolution, OptError> {
    sdp.to_block()?.solve(&SdpOptions::default())
}

enum GramSolver {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Pseudo(DMatrix<f64>),
}

impl GramSolver {
    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        match self {
            GramSolver::Cholesky(c) => c.solve(r),
            GramSolver::Pseudo(p) => p * r,
        }
    }
}

impl BlockSdp {
    fn check(&self) -> Result<(), OptError> {
        let ok = |e: &Entry| e.block < self.blocks.len() && e.j < self.blocks[e.block];
        if let Some(e) = self.objective.iter().chain(self.constraints.iter().flat_map(|c| &c.0)).find(|e| !ok(e)) {
            let actual = self.blocks.get(e.block).copied().unwrap_or(0);
            return Err(OptError::DimensionMismatch { expected: e.j + 1, actual });
        }
        Ok(())
    }

    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints
                .iter()
                .map(|(es, _)| es.iter().map(|e| e.weight() * e.value * x[e.block][(e.i, e.j)]).sum()),
        )
    }

    fn adjoint(&self, y: &DVector<f64>, out: &mut [DMatrix<f64>]) {
        for m in out.iter_mut() {
            m.fill(0.0);
        }
        for (k, (es, _)) in self.constraints.iter().enumerate() {
            for e in es {
                let v = y[k] * e.value;
                out[e.block][(e.i, e.j)] += v;
                if e.i != e.j {
                    out[e.block][(e.j, e.i)] += v;
                }
            }
        }
    }

    fn gram(&self) -> DMatrix<f64> {
        let m = self.constraints.len();
        let mut by_key: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for (k, (es, _)) in self.constraints.iter().enumerate() {
            for e in es {
                by_key.entry((e.block, e.i, e.j)).or_default().push((k, e.weight() * e.value));
            }
        }
        let mut g = DMatrix::zeros(m, m);
        for ((_, i, j), list) in &by_key {
            let w = if i == j { 1.0 } else { 0.5 };
            for &(k, a) in list {
                for &(l, b) in list {
                    g[(k, l)] += w * a * b;
                }
            }
        }
        g
    }

    fn zeros(&self) -> Vec<DMatrix<f64>> {
        self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect()
    }

    /// Runs the solver; the result's `x` holds the primal blocks.
    pub fn solve(&self, opts: &SdpOptions) -> Result<SdpSolution, OptError> {
        self.check()?;
        let m = self.constraints.len();
        let b = DVector::from_iterator(m, self.constraints.iter().map(|c| c.1));
        // internal minimization of ⟨−C, X⟩
        let mut c = self.zeros();
        for e in &self.objective {
            c[e.block][(e.i, e.j)] -= e.value;
            if e.i != e.j {
                c[e.block][(e.j, e.i)] -= e.value;
            }
        }
        let norm_b = b.norm();
        let norm_c = c.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();

        let gram = self.gram();
        let solver = match gram.clone().cholesky() {
            Some(ch) if m > 0 => GramSolver::Cholesky(ch),
            _ => GramSolver::Pseudo(
                gram.pseudo_inverse(1e-12).map_err(|_| OptError::DimensionMismatch { expected: m, actual: 0 })?,
            ),
        };

        let mut x = self.zeros();
        let mut s = self.zeros();
        let mut work = self.zeros();
        let mut y;
        let mut mu = 1.0;
        let mut p_hist = 0.0;
        let mut d_hist = 0.0;
        let (mut pinf, mut dinf, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

        for it in 1..=opts.max_iterations {
            // y = (AA*)⁻¹ (A(C − S) − μ(A(X) − b))
            for (w, (cb, sb)) in work.iter_mut().zip(c.iter().zip(&s)) {
                w.copy_from(cb);
                *w -= sb;
            }
            let rhs = self.apply(&work) - (self.apply(&x) - &b) * mu;
            y = solver.solve(&rhs);
            self.adjoint(&y, &mut work);

            let mut dx2 = 0.0;
            for k in 0..self.blocks.len() {
                // V = C − A*(y) − μX
                let v = &c[k] - &work[k] - &x[k] * mu;
                let eig = SymmetricEigen::new(v.clone());
                let pos = eig.eigenvalues.map(|l| l.max(0.0));
                let q = &eig.eigenvectors;
                let s_new = q * DMatrix::from_diagonal(&pos) * q.transpose();
                let x_new = (&s_new - &v) / mu;
                dx2 += (&x_new - &x[k]).norm_squared();
                s[k] = s_new;
                x[k] = x_new;
            }

            pinf = (self.apply(&x) - &b).norm() / (1.0 + norm_b);
            dinf = mu * dx2.sqrt() / (1.0 + norm_c);
            let pobj: f64 = c.iter().zip(&x).map(|(a, b)| a.dot(b)).sum();
            let dobj = b.dot(&y);
            gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

            if !dobj.is_finite() || dobj > 1e10 * (1.0 + norm_c) {
                return Err(OptError::Infeasible);
            }
            if pinf <= opts.primal_tol && dinf <= opts.dual_tol && gap <= opts.gap_tol {
                return Ok(SdpSolution {
                    value: -pobj,
                    dual_value: -dobj,
                    x,
                    y: y.iter().map(|v| -v).collect(),
                    primal_residual: pinf,
                    dual_residual: dinf,
                    gap,
                    iterations: it,
                });
            }

            // balance the residuals by rescaling the penalty
            p_hist += pinf.max(1e-300).ln();
            d_hist += dinf.max(1e-300).ln();
            if it % 25 == 0 {
                let ratio = (p_hist - d_hist) / 25.0;
                if ratio > 1.0 {
                    mu = (mu * 1.6).min(1e6);
                } else if ratio < -1.0 {
                    mu = (mu / 1.6).max(1e-6);
                }
                p_hist = 0.0;
                d_hist = 0.0;
            }
        }
        Err(OptError::NotConverged {
            iterations: opts.max_iterations,
            primal_residual: pinf,
            dual_residual: dinf,
            gap,
        })
    }
}
