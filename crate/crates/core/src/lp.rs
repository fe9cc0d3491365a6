//! Dense two-phase simplex over a generic ordered field.
//!
//! Used exactly (over ℚ) for the vertex-weight feasibility problems of divergence
//! graphs and in floating point for polytope boundedness and Chebyshev centres.
//! Bland's rule keeps degenerate problems from cycling; all problems here are small.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::arith::Q;

pub trait LpNum:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Treated as zero (exact for ℚ, tolerance for floats).
    fn near_zero(&self) -> bool;
    fn positive(&self) -> bool {
        !self.near_zero() && *self > Self::zero()
    }
    fn negative(&self) -> bool {
        !self.near_zero() && *self < Self::zero()
    }
}

impl LpNum for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn near_zero(&self) -> bool {
        self.is_zero()
    }
}

impl LpNum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn near_zero(&self) -> bool {
        self.abs() < 1e-10
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rel: Relation,
    pub rhs: T,
}

/// maximize `objective · x` subject to the constraints, all variables free.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: LpNum> LinearProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![T::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn maximize(mut self, objective: Vec<T>) -> Self {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<T>, rel: Relation, rhs: T) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> LpOutcome<T> {
        Tableau::build(self).run(self)
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>, // constraint rows, last entry is rhs
    basis: Vec<usize>,
    width: usize, // number of columns excluding rhs
    artificial_start: usize,
}

impl<T: LpNum> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let n = lp.num_vars;
        let m = lp.constraints.len();
        let slack_count = lp
            .constraints
            .iter()
            .filter(|c| c.rel != Relation::Eq)
            .count();
        // columns: x⁺ (n), x⁻ (n), slacks, artificials (m)
        let artificial_start = 2 * n + slack_count;
        let width = artificial_start + m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = 2 * n;
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![T::zero(); width + 1];
            for j in 0..n {
                row[j] = c.coeffs[j].clone();
                row[n + j] = -c.coeffs[j].clone();
            }
            match c.rel {
                Relation::Le => {
                    row[slack] = T::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -T::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[width] = c.rhs.clone();
            if row[width] < T::zero() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[artificial_start + i] = T::one();
            rows.push(row);
            basis.push(artificial_start + i);
        }
        Tableau {
            rows,
            basis,
            width,
            artificial_start,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.near_zero() {
                row[c] = T::zero();
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            row[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost` over allowed columns; returns false when unbounded.
    fn optimize(&mut self, cost: &[T], allowed: usize) -> bool {
        loop {
            // reduced cost of column j: cost_j − Σ_i cost_{basis_i} row_i[j]
            let reduced = |j: usize, t: &Self| {
                t.rows
                    .iter()
                    .zip(&t.basis)
                    .fold(cost[j].clone(), |acc, (row, &b)| acc - cost[b].clone() * row[j].clone())
            };
            let entering = (0..allowed)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| reduced(j, self).positive());
            let Some(c) = entering else {
                return true;
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].positive() {
                    let ratio = row[self.width].clone() / row[c].clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            let d = ratio.clone() - br.clone();
                            d.negative() || (d.near_zero() && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn run(mut self, lp: &LinearProgram<T>) -> LpOutcome<T> {
        let n = lp.num_vars;
        // phase one: minimize the sum of artificials
        let mut phase1 = vec![T::zero(); self.width];
        for c in phase1.iter_mut().skip(self.artificial_start) {
            *c = -T::one();
        }
        self.optimize(&phase1, self.width);
        let infeasibility = self
            .rows
            .iter()
            .zip(&self.basis)
            .filter(|(_, &b)| b >= self.artificial_start)
            .fold(T::zero(), |acc, (row, _)| acc + row[self.width].clone());
        if infeasibility.positive() {
            return LpOutcome::Infeasible;
        }
        // drive remaining (zero-valued) artificials out of the basis
        for r in 0..self.rows.len() {
            if self.basis[r] >= self.artificial_start {
                if let Some(c) = (0..self.artificial_start).find(|&c| !self.rows[r][c].near_zero()) {
                    self.pivot(r, c);
                }
            }
        }
        let mut phase2 = vec![T::zero(); self.width];
        for j in 0..n {
            phase2[j] = lp.objective[j].clone();
            phase2[n + j] = -lp.objective[j].clone();
        }
        if !self.optimize(&phase2, self.artificial_start) {
            return LpOutcome::Unbounded;
        }
        let mut full = vec![T::zero(); self.width];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            full[b] = row[self.width].clone();
        }
        let x: Vec<T> = (0..n).map(|j| full[j].clone() - full[n + j].clone()).collect();
        let value = x
            .iter()
            .zip(&lp.objective)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
        LpOutcome::Optimal { x, value }
    }
}

/// Absolute value helper for rationals used by callers that audit LP output.
pub fn q_abs(x: &Q) -> Q {
    x.abs()
}
