//! Convex-hull membership with separating-hyperplane certificates.
//!
//! The separation problem `max a·x − b` subject to `a·g ≤ b` on a working
//! set of generators and `‖a‖∞ ≤ 1` has the L1 distance from `x` to the
//! working hull as its optimum. Generators violating the current hyperplane
//! are added until either the distance vanishes (membership) or the
//! hyperplane separates `x` from every generator.

use rayon::prelude::*;
use serde::Serialize;

use super::lp::{simplex_maximize, LinearProgram};
use super::OptError;

/// Distance below which a point is declared a member.
pub const HULL_TOL: f64 = 1e-8;

const BATCH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum HullVerdict {
    /// Sparse convex weights `(generator index, λ)` with `Σλ = 1`.
    Member { weights: Vec<(usize, f64)>, residual: f64 },
    /// `normal·g ≤ offset` for every generator while
    /// `normal·point = offset + margin`.
    Separated { normal: Vec<f64>, offset: f64, margin: f64 },
}

impl HullVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, HullVerdict::Member { .. })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn hull_membership(point: &[f64], generators: &[Vec<f64>]) -> Result<HullVerdict, OptError> {
    if generators.is_empty() {
        return Err(OptError::NoGenerators);
    }
    let d = point.len();
    if let Some(g) = generators.iter().find(|g| g.len() != d) {
        return Err(OptError::DimensionMismatch { expected: d, actual: g.len() });
    }

    // seed with the generators nearest to the point in L1
    let mut order: Vec<(f64, usize)> = generators
        .par_iter()
        .enumerate()
        .map(|(i, g)| (g.iter().zip(point).map(|(a, b)| (a - b).abs()).sum::<f64>(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut working: Vec<usize> = order.iter().take(BATCH).map(|&(_, i)| i).collect();
    let mut in_working = vec![false; generators.len()];
    for &i in &working {
        in_working[i] = true;
    }

    loop {
        let (normal, b, dist) = separate(point, generators, &working)?;
        if dist <= HULL_TOL {
            return member_weights(point, generators, &working);
        }
        let mut scores: Vec<(f64, usize)> = generators
            .par_iter()
            .enumerate()
            .map(|(i, g)| (dot(&normal, g), i))
            .collect();
        let offset = scores.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        if offset <= b + 1e-12 {
            let margin = dot(&normal, point) - offset;
            if margin > HULL_TOL {
                return Ok(HullVerdict::Separated { normal, offset, margin });
            }
        }
        scores.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut added = 0;
        for &(s, i) in &scores {
            if added == BATCH || s <= b + 1e-12 {
                break;
            }
            if !in_working[i] {
                in_working[i] = true;
                working.push(i);
                added += 1;
            }
        }
        if added == 0 {
            // numerically stuck: the whole set is already in play
            if working.len() == generators.len() {
                return member_weights(point, generators, &working);
            }
            for (i, flag) in in_working.iter_mut().enumerate() {
                if !*flag {
                    *flag = true;
                    working.push(i);
                }
            }
        }
    }
}

/// Returns `(a, b, a·x − b)` for the optimal separating hyperplane of the
/// working set.
fn separate(
    point: &[f64],
    generators: &[Vec<f64>],
    working: &[usize],
) -> Result<(Vec<f64>, f64, f64), OptError> {
    let d = point.len();
    let mut obj = point.to_vec();
    obj.push(-1.0);
    let mut lp = LinearProgram::new(obj);
    for j in 0..d {
        lp.set_bounds(j, -1.0, 1.0);
    }
    lp.set_bounds(d, f64::NEG_INFINITY, f64::INFINITY);
    for &i in working {
        let mut row = generators[i].clone();
        row.push(-1.0);
        lp.add_le(row, 0.0);
    }
    let sol = simplex_maximize(&lp)?;
    let b = sol.x[d];
    let mut a = sol.x;
    a.truncate(d);
    Ok((a, b, sol.value))
}

/// Convex weights over the working set minimizing the L1 reconstruction
/// error.
fn member_weights(
    point: &[f64],
    generators: &[Vec<f64>],
    working: &[usize],
) -> Result<HullVerdict, OptError> {
    let d = point.len();
    let k = working.len();
    // variables: λ (k), s⁺ (d), s⁻ (d); maximize −Σ(s⁺ + s⁻)
    let mut obj = vec![0.0; k + 2 * d];
    for o in obj.iter_mut().skip(k) {
        *o = -1.0;
    }
    let mut lp = LinearProgram::new(obj);
    let mut sum = vec![0.0; k + 2 * d];
    sum[..k].fill(1.0);
    lp.add_eq(sum, 1.0);
    for j in 0..d {
        let mut row = vec![0.0; k + 2 * d];
        for (c, &i) in working.iter().enumerate() {
            row[c] = generators[i][j];
        }
        row[k + j] = 1.0;
        row[k + d + j] = -1.0;
        lp.add_eq(row, point[j]);
    }
    let sol = simplex_maximize(&lp)?;
    let mut weights: Vec<(usize, f64)> = working
        .iter()
        .zip(&sol.x[..k])
        .filter(|(_, &w)| w > 1e-14)
        .map(|(&i, &w)| (i, w))
        .collect();
    weights.sort_by_key(|w| w.0);
    let total: f64 = weights.iter().map(|w| w.1).sum();
    for w in weights.iter_mut() {
        w.1 /= total;
    }
    let mut recon = vec![0.0; d];
    for &(i, w) in &weights {
        for (r, g) in recon.iter_mut().zip(&generators[i]) {
            *r += w * g;
        }
    }
    let residual = recon.iter().zip(point).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(HullVerdict::Member { weights, residual })
}
