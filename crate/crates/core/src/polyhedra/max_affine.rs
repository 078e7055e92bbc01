use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{PolyError, Polyhedron};
use crate::linalg::{for_each_subset, solve_unique};
use crate::lp::{maximize, LinearProgram, LpOutcome};
use crate::rational::{dot, Point, Rational};

/// The affine function `x ↦ w·x + z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffinePiece {
    pub w: Point,
    pub z: Rational,
}

impl AffinePiece {
    pub fn new(w: Point, z: Rational) -> Self {
        AffinePiece { w, z }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.w, x) + &self.z
    }
}

/// Pointwise maximum of finitely many affine pieces; convex and polyhedral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxAffine {
    pub dim: usize,
    pub pieces: Vec<AffinePiece>,
}

impl MaxAffine {
    pub fn new(dim: usize, pieces: Vec<AffinePiece>) -> Self {
        assert!(!pieces.is_empty(), "a max-affine function needs at least one piece");
        debug_assert!(pieces.iter().all(|p| p.w.len() == dim));
        MaxAffine { dim, pieces }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .max()
            .expect("pieces are nonempty")
    }

    /// Index of the first piece attaining the maximum at `x`.
    pub fn active_piece(&self, x: &[Rational]) -> usize {
        let v = self.eval(x);
        self.pieces
            .iter()
            .position(|p| p.eval(x) == v)
            .expect("maximum is attained")
    }

    /// Region where piece `k` attains the maximum.
    pub fn active_region(&self, k: usize) -> Polyhedron {
        let mut region = Polyhedron::new(self.dim);
        let pk = &self.pieces[k];
        for (j, pj) in self.pieces.iter().enumerate() {
            if j == k {
                continue;
            }
            // w_j·x + z_j ≤ w_k·x + z_k
            let a: Point = pj.w.iter().zip(&pk.w).map(|(a, b)| a - b).collect();
            if a.iter().all(|x| x.is_zero()) {
                if pj.z > pk.z {
                    region.ineqs.push(super::Constraint::new(a, -Rational::one()));
                }
                continue;
            }
            region.ineqs.push(super::Constraint::new(a, &pk.z - &pj.z));
        }
        region
    }

    /// Canonical form: sorted pieces with every piece strictly maximal
    /// somewhere. Evaluation is unchanged.
    pub fn simplify(&self) -> Result<MaxAffine, PolyError> {
        let mut pieces = self.pieces.clone();
        pieces.sort();
        pieces.dedup();
        let mut i = 0;
        while i < pieces.len() && pieces.len() > 1 {
            if strictly_maximal_somewhere(&pieces, i)? {
                i += 1;
            } else {
                pieces.remove(i);
            }
        }
        Ok(MaxAffine {
            dim: self.dim,
            pieces,
        })
    }
}

/// `max s` s.t. `w_k·x + z_k ≥ w_j·x + z_j + s` for all `j ≠ k`, `s ≤ 1`.
fn strictly_maximal_somewhere(pieces: &[AffinePiece], k: usize) -> Result<bool, PolyError> {
    let dim = pieces[k].w.len();
    let mut obj = vec![Rational::zero(); dim + 1];
    obj[dim] = Rational::one();
    let mut lp = LinearProgram::new(obj.clone());
    lp = lp.le(obj, Rational::one());
    for (j, pj) in pieces.iter().enumerate() {
        if j == k {
            continue;
        }
        let mut a: Point = pj.w.iter().zip(&pieces[k].w).map(|(a, b)| a - b).collect();
        a.push(Rational::one());
        lp = lp.le(a, &pieces[k].z - &pj.z);
    }
    Ok(match maximize(&lp)? {
        LpOutcome::Optimal { value, .. } => value.is_positive(),
        LpOutcome::Unbounded { .. } => true,
        LpOutcome::Infeasible => false,
    })
}

/// The function `u ↦ d∞(u, S)` as an explicit max-affine function.
///
/// With `S = {v : A v ≤ b, E v = e}` the distance LP `min t` s.t. `v ∈ S`,
/// `|u_i − v_i| ≤ t` has the dual
///
/// ```text
/// max (α − β)·u − b·λ − e·(μ⁺ − μ⁻)
/// s.t. Aᵀλ + Eᵀ(μ⁺ − μ⁻) − α + β = 0,  Σα + Σβ = 1,  all ≥ 0
/// ```
///
/// whose feasible region does not depend on `u`. Its basic feasible
/// solutions give the pieces.
pub fn distance_as_max_affine(s: &Polyhedron) -> Result<MaxAffine, PolyError> {
    let s = s.remove_redundant()?;
    if s.is_empty()? {
        return Err(PolyError::Empty);
    }
    let d = s.dim;
    let m = s.ineqs.len();
    let k = s.eqs.len();
    // column layout: λ (m) | μ⁺ (k) | μ⁻ (k) | α (d) | β (d)
    let ncols = m + 2 * k + 2 * d;
    let mut columns: Vec<Point> = Vec::with_capacity(ncols);
    let mut costs: Vec<(Point, Rational)> = Vec::with_capacity(ncols);
    let unit = |i: usize, sign: i64| {
        let mut c = vec![Rational::zero(); d + 1];
        c[i] = Rational::from_integer(sign.into());
        c
    };
    for c in &s.ineqs {
        let mut col = c.a.clone();
        col.push(Rational::zero());
        columns.push(col);
        costs.push((vec![Rational::zero(); d], -c.b.clone()));
    }
    for sign in [1i64, -1] {
        let sg = Rational::from_integer(sign.into());
        for c in &s.eqs {
            let mut col: Point = c.a.iter().map(|x| x * &sg).collect();
            col.push(Rational::zero());
            columns.push(col);
            costs.push((vec![Rational::zero(); d], -(&c.b * &sg)));
        }
    }
    for (sign, wsign) in [(-1i64, 1i64), (1, -1)] {
        for i in 0..d {
            let mut col = unit(i, sign);
            col[d] = Rational::one();
            columns.push(col);
            let mut w = vec![Rational::zero(); d];
            w[i] = Rational::from_integer(wsign.into());
            costs.push((w, Rational::zero()));
        }
    }
    let mut rhs = vec![Rational::zero(); d + 1];
    rhs[d] = Rational::one();

    let mut pieces = Vec::new();
    for_each_subset(ncols, d + 1, |basis| {
        // rows of the square system are the d+1 dual equations
        let rows: Vec<Point> = (0..=d)
            .map(|r| basis.iter().map(|&c| columns[c][r].clone()).collect())
            .collect();
        let Some(x) = solve_unique(&rows, &rhs, d + 1) else {
            return;
        };
        if x.iter().any(|v| v.is_negative()) {
            return;
        }
        let mut w = vec![Rational::zero(); d];
        let mut z = Rational::zero();
        for (&c, xc) in basis.iter().zip(&x) {
            if xc.is_zero() {
                continue;
            }
            for (wi, ci) in w.iter_mut().zip(&costs[c].0) {
                *wi += ci * xc;
            }
            z += &costs[c].1 * xc;
        }
        pieces.push(AffinePiece::new(w, z));
    });
    MaxAffine::new(d, pieces).simplify()
}
