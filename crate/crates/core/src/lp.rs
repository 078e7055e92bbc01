//! Exact linear programming over the rationals.
//!
//! Problems are stated as `min c·x` subject to `A x ≤ b` with `x` free.
//! Internally the solver splits `x = x⁺ − x⁻`, adds slacks, and runs a
//! two-phase tableau simplex with Bland's smallest-index rule, which
//! terminates on the degenerate data that polyhedral losses routinely
//! produce. All arithmetic is exact, so the reported optimum, witness, and
//! improving ray are certificates rather than approximations.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};

use crate::polyhedra::{Constraint, Polyhedron};
use crate::rational::{dot, Point, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Point,
    pub constraints: Vec<Point>,
    pub rhs: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Point },
    Infeasible,
    /// `point` is feasible and `point + t·ray` stays feasible for all `t ≥ 0`
    /// while the objective decreases without bound.
    Unbounded { point: Point, ray: Point },
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded { .. } => LpStatus::Unbounded,
        }
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&Point> {
        match self {
            LpOutcome::Optimal { point, .. } | LpOutcome::Unbounded { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpError {
    /// Objective, constraint rows, and right-hand side disagree in length.
    DimensionMismatch { expected: usize, found: usize, what: &'static str },
    EmptyObjective,
    /// `optimal_face` was asked for the optimizers of a problem without any.
    NotOptimal(LpStatus),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::DimensionMismatch { expected, found, what } => {
                write!(f, "malformed linear program: {what} has length {found}, expected {expected}")
            }
            LpError::EmptyObjective => f.write_str("malformed linear program: no variables"),
            LpError::NotOptimal(status) => {
                write!(f, "linear program has no optimal face (status {status:?})")
            }
        }
    }
}

impl core::error::Error for LpError {}

impl LinearProgram {
    pub fn new(objective: Point) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    /// Adds `a·x ≤ b`.
    pub fn le(mut self, a: Point, b: Rational) -> Self {
        self.constraints.push(a);
        self.rhs.push(b);
        self
    }

    /// Adds `a·x = b` as a pair of inequalities.
    pub fn eq(self, a: Point, b: Rational) -> Self {
        let neg_a = a.iter().map(|x| -x).collect();
        self.le(a, b.clone()).le(neg_a, -b)
    }

    pub fn feasible_set(&self) -> Polyhedron {
        let mut p = Polyhedron::new(self.dim());
        for (a, b) in self.constraints.iter().zip(&self.rhs) {
            p.ineqs.push(Constraint::new(a.clone(), b.clone()));
        }
        p
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if n == 0 {
            return Err(LpError::EmptyObjective);
        }
        if self.rhs.len() != self.constraints.len() {
            return Err(LpError::DimensionMismatch {
                expected: self.constraints.len(),
                found: self.rhs.len(),
                what: "right-hand side",
            });
        }
        for row in &self.constraints {
            if row.len() != n {
                return Err(LpError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                    what: "constraint row",
                });
            }
        }
        Ok(())
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs for the current phase.
    reduced: Vec<Rational>,
    /// Columns allowed to enter the basis.
    eligible: Vec<bool>,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut() {
            *x *= &inv;
        }
        self.rhs[row] *= &inv;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for (x, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !self.reduced[col].is_zero() {
            let f = self.reduced[col].clone();
            for (x, p) in self.reduced.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[row] = col;
    }

    fn set_costs(&mut self, costs: &[Rational]) {
        let mut reduced = costs.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            if costs[b].is_zero() {
                continue;
            }
            for (r, t) in reduced.iter_mut().zip(&self.rows[i]) {
                if !t.is_zero() {
                    *r -= &costs[b] * t;
                }
            }
        }
        self.reduced = reduced;
    }

    /// Bland's rule: smallest eligible improving column enters, ratio ties
    /// go to the smallest basic index.
    fn run(&mut self) -> PhaseEnd {
        loop {
            let entering = (0..self.reduced.len())
                .find(|&j| self.eligible[j] && self.reduced[j].is_negative());
            let Some(e) = entering else {
                return PhaseEnd::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let t = &self.rows[i][e];
                if !t.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / t;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, e),
                None => return PhaseEnd::Unbounded(e),
            }
        }
    }

    fn values(&self, cols: usize) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); cols];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < cols {
                y[b] = self.rhs[i].clone();
            }
        }
        y
    }
}

/// Solves `min c·x` s.t. `A x ≤ b` exactly. Deterministic for identical
/// input.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let n = lp.dim();
    let m = lp.constraints.len();
    let art_rows: Vec<usize> = (0..m).filter(|&i| lp.rhs[i].is_negative()).collect();
    let structural = 2 * n + m;
    let cols = structural + art_rows.len();

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = structural;
    for i in 0..m {
        let flip = lp.rhs[i].is_negative();
        let mut row = vec![Rational::zero(); cols];
        for j in 0..n {
            let a = &lp.constraints[i][j];
            if a.is_zero() {
                continue;
            }
            let a = if flip { -a.clone() } else { a.clone() };
            row[n + j] = -a.clone();
            row[j] = a;
        }
        row[2 * n + i] = if flip { -Rational::from_integer(1.into()) } else { Rational::from_integer(1.into()) };
        if flip {
            row[next_art] = Rational::from_integer(1.into());
            basis.push(next_art);
            next_art += 1;
            rhs.push(-lp.rhs[i].clone());
        } else {
            basis.push(2 * n + i);
            rhs.push(lp.rhs[i].clone());
        }
        rows.push(row);
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        reduced: Vec::new(),
        eligible: vec![true; cols],
    };

    if !art_rows.is_empty() {
        let mut costs = vec![Rational::zero(); cols];
        for c in costs.iter_mut().skip(structural) {
            *c = Rational::from_integer(1.into());
        }
        tab.set_costs(&costs);
        // phase one is bounded below by zero
        let _ = tab.run();
        let infeas: Rational = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(b, _)| **b >= structural)
            .fold(Rational::zero(), |acc, (_, v)| acc + v);
        if infeas.is_positive() {
            return Ok(LpOutcome::Infeasible);
        }
        // drive zero-valued artificials out of the basis, drop redundant rows
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= structural {
                match (0..structural).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for e in tab.eligible.iter_mut().skip(structural) {
            *e = false;
        }
    }

    let mut costs = vec![Rational::zero(); cols];
    for j in 0..n {
        costs[j] = lp.objective[j].clone();
        costs[n + j] = -lp.objective[j].clone();
    }
    tab.set_costs(&costs);
    let end = tab.run();
    let y = tab.values(cols);
    let point: Point = (0..n).map(|j| &y[j] - &y[n + j]).collect();
    match end {
        PhaseEnd::Optimal => {
            let value = dot(&lp.objective, &point);
            Ok(LpOutcome::Optimal { value, point })
        }
        PhaseEnd::Unbounded(e) => {
            let mut dir = vec![Rational::zero(); cols];
            dir[e] = Rational::from_integer(1.into());
            for (i, &b) in tab.basis.iter().enumerate() {
                dir[b] = -tab.rows[i][e].clone();
            }
            let ray = (0..n).map(|j| &dir[j] - &dir[n + j]).collect();
            Ok(LpOutcome::Unbounded { point, ray })
        }
    }
}

/// `max c·x` s.t. `A x ≤ b`; the reported value is the maximum.
pub fn maximize(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    let neg = LinearProgram {
        objective: lp.objective.iter().map(|x| -x).collect(),
        constraints: lp.constraints.clone(),
        rhs: lp.rhs.clone(),
    };
    Ok(match solve_lp(&neg)? {
        LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
        other => other,
    })
}

/// The set of all optimizers: the feasible set cut by `c·x = optimum`.
pub fn optimal_face(lp: &LinearProgram) -> Result<Polyhedron, LpError> {
    match solve_lp(lp)? {
        LpOutcome::Optimal { value, .. } => {
            let mut face = lp.feasible_set();
            face.eqs.push(Constraint::new(lp.objective.clone(), value));
            Ok(face)
        }
        other => Err(LpError::NotOptimal(other.status())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, int_point, ratio};

    fn feasible(lp: &LinearProgram, x: &[Rational]) -> bool {
        lp.constraints
            .iter()
            .zip(&lp.rhs)
            .all(|(a, b)| dot(a, x) <= *b)
    }

    #[test]
    fn one_variable_bound() {
        let lp = LinearProgram::new(int_point(&[-1]))
            .le(int_point(&[1]), int(3))
            .le(int_point(&[-1]), int(0));
        let out = solve_lp(&lp).unwrap();
        assert_eq!(
            out,
            LpOutcome::Optimal {
                value: int(-3),
                point: int_point(&[3])
            }
        );
    }

    #[test]
    fn contradictory_bounds() {
        let lp = LinearProgram::new(int_point(&[0]))
            .le(int_point(&[1]), int(-1))
            .le(int_point(&[-1]), int(-2));
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn improving_ray() {
        let lp = LinearProgram::new(int_point(&[-1])).le(int_point(&[-1]), int(0));
        match solve_lp(&lp).unwrap() {
            LpOutcome::Unbounded { point, ray } => {
                assert!(feasible(&lp, &point));
                assert_eq!(ray, int_point(&[1]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unconstrained_free_variables() {
        let lp = LinearProgram::new(int_point(&[0, 0]));
        assert_eq!(solve_lp(&lp).unwrap().value(), Some(&int(0)));
        let lp = LinearProgram::new(int_point(&[1, 0]));
        assert_eq!(solve_lp(&lp).unwrap().status(), LpStatus::Unbounded);
    }

    #[test]
    fn dimension_mismatch() {
        let lp = LinearProgram::new(int_point(&[1, 1])).le(int_point(&[1]), int(0));
        assert!(matches!(solve_lp(&lp), Err(LpError::DimensionMismatch { .. })));
        assert_eq!(solve_lp(&LinearProgram::new(Vec::new())), Err(LpError::EmptyObjective));
    }

    #[test]
    fn equality_point_face() {
        let lp = LinearProgram::new(int_point(&[1]))
            .le(int_point(&[1]), int(0))
            .le(int_point(&[-1]), int(0));
        let face = optimal_face(&lp).unwrap();
        assert!(face.contains_point(&int_point(&[0])));
        assert!(!face.contains_point(&int_point(&[1])));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook largest-coefficient rule
        let lp = LinearProgram::new(alloc::vec![ratio(-3, 4), int(150), ratio(-1, 50), int(6)])
            .le(alloc::vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], int(0))
            .le(alloc::vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], int(0))
            .le(int_point(&[0, 0, 1, 0]), int(1))
            .le(int_point(&[-1, 0, 0, 0]), int(0))
            .le(int_point(&[0, -1, 0, 0]), int(0))
            .le(int_point(&[0, 0, -1, 0]), int(0))
            .le(int_point(&[0, 0, 0, -1]), int(0));
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.value(), Some(&ratio(-1, 20)));
        assert!(feasible(&lp, out.point().unwrap()));
    }

    #[test]
    fn maximize_flips_sign() {
        let lp = LinearProgram::new(int_point(&[1, 1]))
            .le(int_point(&[1, 2]), int(4))
            .le(int_point(&[3, 1]), int(6))
            .le(int_point(&[-1, 0]), int(0))
            .le(int_point(&[0, -1]), int(0));
        let out = maximize(&lp).unwrap();
        assert_eq!(out.value(), Some(&ratio(14, 5)));
        assert_eq!(out.point().unwrap(), &alloc::vec![ratio(8, 5), ratio(6, 5)]);
    }
}
