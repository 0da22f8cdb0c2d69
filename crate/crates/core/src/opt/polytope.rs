//! Exact vertex enumeration of the polytope of probabilistic models
//! `{p ≥ 0 : Σ_{v∈e} p(v) = 1 for every hyperedge e}`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::OptError;
use crate::rational::{self, Rational};
use crate::scenario::ContextualityScenario;

/// Largest scenario (vertex count) accepted by the basic-solution scan.
pub const MAX_POLYTOPE_VERTICES: usize = 24;

/// A map `V(H) → [0, 1]` normalized on every hyperedge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilisticModel {
    pub values: Vec<f64>,
}

impl ProbabilisticModel {
    pub const TOL: f64 = 1e-9;

    /// Checks bounds and per-hyperedge normalization.
    pub fn new(h: &ContextualityScenario, values: Vec<f64>) -> Result<Self, OptError> {
        if values.len() != h.num_vertices() {
            return Err(OptError::DimensionMismatch {
                expected: h.num_vertices(),
                actual: values.len(),
            });
        }
        for (v, &x) in values.iter().enumerate() {
            if !(-Self::TOL..=1.0 + Self::TOL).contains(&x) {
                return Err(OptError::OutOfRange { vertex: v, value: x });
            }
        }
        for (i, e) in h.hyperedges().iter().enumerate() {
            let sum: f64 = e.iter().map(|&v| values[v]).sum();
            if (sum - 1.0).abs() > Self::TOL {
                return Err(OptError::NotNormalized { edge: i, sum });
            }
        }
        Ok(ProbabilisticModel { values })
    }

    /// Whether the model is a KS-colouring (all values 0 or 1).
    pub fn is_deterministic(&self) -> bool {
        self.values.iter().all(|&x| x.abs() < Self::TOL || (x - 1.0).abs() < Self::TOL)
    }
}

/// An extreme point of the model polytope in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModelVertex {
    pub values: Vec<Rational>,
    pub deterministic: bool,
}

impl ModelVertex {
    pub fn to_model(&self) -> ProbabilisticModel {
        ProbabilisticModel { values: self.values.iter().map(rational::to_f64).collect() }
    }
}

/// All vertices of the model polytope of `h`, sorted by exact coordinates.
///
/// Every basic solution of the row-reduced equality system is visited once;
/// the scan is split across threads by the first basis column and merged
/// into an ordered set, so the output does not depend on the worker count.
pub fn enumerate_model_vertices(h: &ContextualityScenario) -> Result<Vec<ModelVertex>, OptError> {
    let n = h.num_vertices();
    if n > MAX_POLYTOPE_VERTICES {
        return Err(OptError::TooLarge { actual: n, limit: MAX_POLYTOPE_VERTICES });
    }
    let mut rows: Vec<Vec<Rational>> = h
        .hyperedges()
        .iter()
        .map(|e| {
            let mut r = vec![Rational::zero(); n + 1];
            for &v in e {
                r[v] = Rational::one();
            }
            r[n] = Rational::one();
            r
        })
        .collect();
    let rank = row_reduce(&mut rows, n);
    if rows[rank..].iter().any(|r| !r[n].is_zero()) {
        return Ok(Vec::new());
    }
    rows.truncate(rank);
    if rank == 0 {
        return Ok(Vec::new());
    }

    let dense: Vec<Vec<f64>> =
        rows.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect();

    let found: BTreeSet<Vec<Rational>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut local = BTreeSet::new();
            let mut cols = vec![first];
            scan_bases(&rows, &dense, n, rank, &mut cols, &mut local);
            local
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });

    Ok(found
        .into_iter()
        .map(|values| {
            let deterministic = values.iter().all(rational::is_zero_or_one);
            ModelVertex { values, deterministic }
        })
        .collect())
}

fn scan_bases(
    rows: &[Vec<Rational>],
    dense: &[Vec<f64>],
    n: usize,
    rank: usize,
    cols: &mut Vec<usize>,
    out: &mut BTreeSet<Vec<Rational>>,
) {
    if cols.len() == rank {
        if let Some(x) = basic_solution(rows, dense, n, cols) {
            out.insert(x);
        }
        return;
    }
    let last = *cols.last().expect("cols starts nonempty");
    let remaining = rank - cols.len();
    for c in last + 1..=n - remaining {
        cols.push(c);
        scan_bases(rows, dense, n, rank, cols, out);
        cols.pop();
    }
}

/// Solves the basis system in floating point first to discard singular or
/// negative candidates cheaply, then confirms survivors exactly.
fn basic_solution(
    rows: &[Vec<Rational>],
    dense: &[Vec<f64>],
    n: usize,
    cols: &[usize],
) -> Option<Vec<Rational>> {
    let r = cols.len();
    let mut a: Vec<Vec<f64>> = dense
        .iter()
        .map(|row| {
            let mut v: Vec<f64> = cols.iter().map(|&c| row[c]).collect();
            v.push(row[n]);
            v
        })
        .collect();
    for k in 0..r {
        let p = (k..r).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-9 {
            return None;
        }
        a.swap(k, p);
        for i in 0..r {
            if i != k {
                let f = a[i][k] / a[k][k];
                if f != 0.0 {
                    for j in k..=r {
                        a[i][j] -= f * a[k][j];
                    }
                }
            }
        }
    }
    if (0..r).any(|k| a[k][r] / a[k][k] < -1e-9) {
        return None;
    }

    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|row| {
            let mut v: Vec<Rational> = cols.iter().map(|&c| row[c]).collect();
            v.push(row[n]);
            v
        })
        .collect();
    if row_reduce(&mut m, r) < r {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (k, &c) in cols.iter().enumerate() {
        let v = m[k][r];
        if v.is_negative() {
            return None;
        }
        x[c] = v;
    }
    Some(x)
}

/// Reduced row echelon form over the first `ncols` columns (the remaining
/// columns are carried along). Returns the rank; pivot rows come first and
/// pivot `k` is normalized to 1 in column order.
fn row_reduce(m: &mut [Vec<Rational>], ncols: usize) -> usize {
    let nrows = m.len();
    let mut rank = 0;
    for c in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][c].recip();
        for x in m[rank].iter_mut() {
            *x *= inv;
        }
        let pivot = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && !row[c].is_zero() {
                let f = row[c];
                for (x, &pv) in row.iter_mut().zip(&pivot) {
                    *x -= f * pv;
                }
            }
        }
        rank += 1;
    }
    rank
}
