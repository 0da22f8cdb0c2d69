//! Dense two-phase simplex.
//!
//! Entering columns follow Dantzig's rule; ties, and any run of degenerate
//! pivots, fall back to Bland's smallest-index rule, which guarantees
//! termination.

use serde::{Deserialize, Serialize};

use super::OptError;

/// Feasibility / optimality tolerance of the simplex kernel.
pub const LP_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;
const DEGENERATE_SWITCH: usize = 25;

/// Sparse constraint row `(coefficients, relation, bound)`.
type SparseRow = (Vec<(usize, f64)>, Relation, f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub bound: f64,
}

/// `maximize objective·x` subject to the constraints and per-variable
/// bounds `lo ≤ x ≤ hi` (infinite values allowed; default `[0, ∞)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    /// Largest constraint or bound violation of `x`.
    pub max_violation: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram { objective, constraints: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, relation: Relation, bound: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, bound });
        self
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, bound: f64) -> &mut Self {
        self.constrain(coeffs, Relation::Le, bound)
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, bound: f64) -> &mut Self {
        self.constrain(coeffs, Relation::Eq, bound)
    }

    pub fn add_ge(&mut self, coeffs: Vec<f64>, bound: f64) -> &mut Self {
        self.constrain(coeffs, Relation::Ge, bound)
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    fn check_dims(&self) -> Result<(), OptError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(OptError::DimensionMismatch { expected: n, actual: self.bounds.len() });
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(OptError::DimensionMismatch { expected: n, actual: c.coeffs.len() });
            }
        }
        for &(lo, hi) in &self.bounds {
            if lo > hi {
                return Err(OptError::Infeasible);
            }
        }
        Ok(())
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.bound,
                Relation::Ge => c.bound - lhs,
                Relation::Eq => (lhs - c.bound).abs(),
            };
            worst = worst.max(v);
        }
        for (&(lo, hi), &xi) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - xi).max(xi - hi);
        }
        worst
    }
}

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = lo + y
    Shift { col: usize, lo: f64 },
    /// x = hi - y
    Mirror { col: usize, hi: f64 },
    /// x = y⁺ - y⁻
    Split { pos: usize, neg: usize },
}

pub fn simplex_maximize(lp: &LinearProgram) -> Result<LpSolution, OptError> {
    lp.check_dims()?;
    let n = lp.num_vars();

    // standard form: columns y ≥ 0, rows with relation and rhs
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut extra_rows: Vec<SparseRow> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ncols, lo });
            if hi.is_finite() {
                extra_rows.push((vec![(ncols, 1.0)], Relation::Le, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirror { col: ncols, hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    let mut rows: Vec<SparseRow> = Vec::new();
    for c in &lp.constraints {
        let mut rhs = c.bound;
        let mut entries = Vec::new();
        for (j, &a) in c.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    rhs -= a * lo;
                    entries.push((col, a));
                }
                VarMap::Mirror { col, hi } => {
                    rhs -= a * hi;
                    entries.push((col, -a));
                }
                VarMap::Split { pos, neg } => {
                    entries.push((pos, a));
                    entries.push((neg, -a));
                }
            }
        }
        rows.push((entries, c.relation, rhs));
    }
    rows.extend(extra_rows);

    let mut cost = vec![0.0; ncols];
    let mut offset = 0.0;
    for (j, &c) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, lo } => {
                cost[col] += c;
                offset += c * lo;
            }
            VarMap::Mirror { col, hi } => {
                cost[col] -= c;
                offset += c * hi;
            }
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let (y, value, pivots) = solve_standard(ncols, &rows, &cost)?;

    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + y[col],
            VarMap::Mirror { col, hi } => hi - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let max_violation = lp.max_violation(&x);
    Ok(LpSolution { value: value + offset, x, max_violation, pivots })
}

/// Maximizes `cost·y` over `y ≥ 0` and the given rows.
fn solve_standard(
    ncols: usize,
    rows: &[SparseRow],
    cost: &[f64],
) -> Result<(Vec<f64>, f64, usize), OptError> {
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows
        .iter()
        .filter(|(_, rel, rhs)| {
            let flip = *rhs < 0.0;
            match rel {
                Relation::Eq => true,
                Relation::Le => flip,
                Relation::Ge => !flip,
            }
        })
        .count();
    let total = ncols + n_slack + n_art;
    let width = total + 1;
    let mut t = Tableau {
        m,
        width,
        data: vec![0.0; (m + 1) * width],
        basis: vec![0; m],
        pivots: 0,
    };

    let mut slack = ncols;
    let mut art = ncols + n_slack;
    let art_start = art;
    for (i, (entries, rel, rhs)) in rows.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        for &(j, a) in entries {
            *t.at(i, j) += sign * a;
        }
        *t.at(i, total) = sign * rhs;
        let rel = match (rel, sign < 0.0) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => *r,
        };
        match rel {
            Relation::Le => {
                *t.at(i, slack) = 1.0;
                t.basis[i] = slack;
                slack += 1;
            }
            Relation::Ge => {
                *t.at(i, slack) = -1.0;
                slack += 1;
                *t.at(i, art) = 1.0;
                t.basis[i] = art;
                art += 1;
            }
            Relation::Eq => {
                *t.at(i, art) = 1.0;
                t.basis[i] = art;
                art += 1;
            }
        }
    }

    // phase 1: maximize -Σ artificials
    if n_art > 0 {
        let mut obj = vec![0.0; total];
        for o in obj.iter_mut().skip(art_start) {
            *o = -1.0;
        }
        t.set_objective(&obj);
        t.optimize(total)?;
        if t.objective_value() < -LP_TOL * (1.0 + rows.len() as f64) {
            return Err(OptError::Infeasible);
        }
        // drive remaining artificials out of the basis
        for i in 0..m {
            if t.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| t.get(i, j).abs() > 1e-9) {
                    t.pivot(i, j);
                }
            }
        }
    }

    // phase 2: artificial columns are barred from entering
    let mut obj = vec![0.0; total];
    obj[..ncols].copy_from_slice(cost);
    t.set_objective(&obj);
    t.optimize(art_start)?;

    let mut y = vec![0.0; ncols];
    for i in 0..m {
        if t.basis[i] < ncols {
            y[t.basis[i]] = t.get(i, total);
        }
    }
    Ok((y, t.objective_value(), t.pivots))
}

struct Tableau {
    m: usize,
    width: usize,
    /// rows 0..m are constraints, row m is the reduced-cost row
    /// (stored as -reduced cost so that positive entries improve)
    data: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.width + j]
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    /// Objective row holds `c_j - z_j` for maximization.
    fn set_objective(&mut self, obj: &[f64]) {
        let m = self.m;
        let w = self.width;
        for j in 0..w {
            self.data[m * w + j] = if j < obj.len() { obj[j] } else { 0.0 };
        }
        for i in 0..m {
            let cb = obj[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.data[m * w + j] -= cb * self.data[i * w + j];
                }
            }
        }
    }

    fn objective_value(&self) -> f64 {
        -self.get(self.m, self.rhs_col())
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for j in 0..w {
            self.data[r * w + j] /= p;
        }
        self.data[r * w + c] = 1.0;
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, &pv) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs primal simplex; only columns `< allowed` may enter.
    fn optimize(&mut self, allowed: usize) -> Result<(), OptError> {
        let m = self.m;
        let rhs = self.rhs_col();
        let mut degenerate_run = 0usize;
        let max_pivots = 50_000 + 200 * (m + allowed);
        loop {
            if self.pivots > max_pivots {
                return Err(OptError::NotConverged {
                    iterations: self.pivots,
                    primal_residual: f64::NAN,
                    dual_residual: f64::NAN,
                    gap: f64::NAN,
                });
            }
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let mut enter = None;
            let mut best = LP_TOL;
            for j in 0..allowed {
                let d = self.get(m, j);
                if d > LP_TOL {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if d > best + PIVOT_EPS {
                        best = d;
                        enter = Some(j);
                    }
                }
            }
            let Some(c) = enter else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.get(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.get(i, rhs).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else { return Err(OptError::Unbounded) };
            if ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_bound() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![1.0], 1.0);
        let s = simplex_maximize(&lp).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![1.0], -1.0).add_ge(vec![1.0], 0.0);
        assert_eq!(simplex_maximize(&lp), Err(OptError::Infeasible));
    }

    #[test]
    fn unbounded_system() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_ge(vec![1.0, -1.0], 0.0);
        assert_eq!(simplex_maximize(&lp), Err(OptError::Unbounded));
    }

    #[test]
    fn free_and_boxed_variables() {
        // max x - y, -2 ≤ x ≤ 3, y free, y ≥ x - 10 ... => y ≥ -7 at x = 3
        let mut lp = LinearProgram::new(vec![1.0, -1.0]);
        lp.set_bounds(0, -2.0, 3.0).set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_ge(vec![-1.0, 1.0], -10.0);
        let s = simplex_maximize(&lp).unwrap();
        assert!((s.value - 10.0).abs() < 1e-9, "{s:?}");
        assert!(s.max_violation < 1e-9);
    }

    #[test]
    fn upper_bounded_only() {
        // max -x with x ≤ 5 and x free below => x ≥ 1 from constraint
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, 5.0);
        lp.add_ge(vec![1.0], 1.0);
        let s = simplex_maximize(&lp).unwrap();
        assert!((s.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_eq(vec![1.0, 1.0], 1.0).add_eq(vec![2.0, 2.0], 2.0);
        let s = simplex_maximize(&lp).unwrap();
        assert!((s.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn kcbs_equalities_give_five_halves() {
        // variables ordered v1,u1,v2,u2,...; maximize Σ v_i
        let mut obj = vec![0.0; 10];
        for i in 0..5 {
            obj[2 * i] = 1.0;
        }
        let mut lp = LinearProgram::new(obj);
        for i in 0..5 {
            let mut row = vec![0.0; 10];
            row[2 * i] = 1.0;
            row[2 * i + 1] = 1.0;
            row[(2 * i + 2) % 10] = 1.0;
            lp.add_eq(row, 1.0);
        }
        let s = simplex_maximize(&lp).unwrap();
        assert!((s.value - 2.5).abs() < 1e-9);
    }
}
