//! Exact polyhedral geometry in H-representation.

mod arrangement;
mod max_affine;
mod vertex;

pub use arrangement::{arrangement_cells, ArrangementCell, MAX_ARRANGEMENT_DIM};
pub use max_affine::{distance_as_max_affine, AffinePiece, MaxAffine};
pub use vertex::{vertices, VertexDescription};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::linalg::rank;
use crate::lp::{maximize, solve_lp, LinearProgram, LpError, LpOutcome};
use crate::rational::{dot, Point, Rational};

/// The constraint `a·x ≤ b` (or `a·x = b` when stored as an equality).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub a: Point,
    pub b: Rational,
}

impl Constraint {
    pub fn new(a: Point, b: Rational) -> Self {
        Constraint { a, b }
    }

    pub fn slack(&self, x: &[Rational]) -> Rational {
        &self.b - dot(&self.a, x)
    }

    fn negated(&self) -> Constraint {
        Constraint {
            a: self.a.iter().map(|x| -x).collect(),
            b: -self.b.clone(),
        }
    }
}

/// `{x ∈ ℚ^dim : a·x ≤ b for ineqs, a·x = b for eqs}`. The representation
/// may be redundant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    pub dim: usize,
    pub ineqs: Vec<Constraint>,
    pub eqs: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    Empty,
    /// The polyhedron contains a line, so it has no vertex.
    NoVertex,
    DimensionMismatch { expected: usize, found: usize },
    /// Arrangement enumeration is limited to small ambient dimensions.
    UnsupportedScale { dim: usize, max: usize },
    Lp(LpError),
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::Empty => f.write_str("polyhedron is empty"),
            PolyError::NoVertex => f.write_str("polyhedron contains a line and has no vertex"),
            PolyError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            PolyError::UnsupportedScale { dim, max } => {
                write!(f, "dimension {dim} exceeds the supported maximum {max}")
            }
            PolyError::Lp(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for PolyError {}

impl From<LpError> for PolyError {
    fn from(e: LpError) -> Self {
        PolyError::Lp(e)
    }
}

impl Polyhedron {
    /// The whole space `ℚ^dim`.
    pub fn new(dim: usize) -> Self {
        Polyhedron {
            dim,
            ineqs: Vec::new(),
            eqs: Vec::new(),
        }
    }

    pub fn le(mut self, a: Point, b: Rational) -> Self {
        debug_assert_eq!(a.len(), self.dim);
        self.ineqs.push(Constraint::new(a, b));
        self
    }

    pub fn eq(mut self, a: Point, b: Rational) -> Self {
        debug_assert_eq!(a.len(), self.dim);
        self.eqs.push(Constraint::new(a, b));
        self
    }

    /// `{x}`.
    pub fn singleton(x: &[Rational]) -> Self {
        let dim = x.len();
        let mut p = Polyhedron::new(dim);
        for (i, xi) in x.iter().enumerate() {
            let mut e = vec![Rational::zero(); dim];
            e[i] = Rational::one();
            p.eqs.push(Constraint::new(e, xi.clone()));
        }
        p
    }

    /// Axis-aligned box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: &Rational, hi: &Rational) -> Self {
        let mut p = Polyhedron::new(dim);
        for i in 0..dim {
            let mut e = vec![Rational::zero(); dim];
            e[i] = Rational::one();
            p.ineqs.push(Constraint::new(e.clone(), hi.clone()));
            e[i] = -Rational::one();
            p.ineqs.push(Constraint::new(e, -lo.clone()));
        }
        p
    }

    /// The probability simplex over `n` labels in `ℚ^n`.
    pub fn simplex(n: usize) -> Self {
        let mut p = Polyhedron::new(n);
        for i in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[i] = -Rational::one();
            p.ineqs.push(Constraint::new(e, Rational::zero()));
        }
        p.eqs.push(Constraint::new(vec![Rational::one(); n], Rational::one()));
        p
    }

    pub fn contains_point(&self, x: &[Rational]) -> bool {
        x.len() == self.dim
            && self.ineqs.iter().all(|c| !c.slack(x).is_negative())
            && self.eqs.iter().all(|c| c.slack(x).is_zero())
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        debug_assert_eq!(self.dim, other.dim);
        let mut p = self.clone();
        p.ineqs.extend(other.ineqs.iter().cloned());
        p.eqs.extend(other.eqs.iter().cloned());
        p
    }

    /// All constraints as inequalities (equalities become pairs).
    pub fn inequality_rows(&self) -> Vec<Constraint> {
        let mut rows = self.ineqs.clone();
        for e in &self.eqs {
            rows.push(e.clone());
            rows.push(e.negated());
        }
        rows
    }

    /// Re-embeds the constraints into a `total`-dimensional space starting
    /// at coordinate `offset`.
    pub(crate) fn embedded_rows(&self, offset: usize, total: usize) -> Vec<Constraint> {
        self.inequality_rows()
            .into_iter()
            .map(|c| {
                let mut a = vec![Rational::zero(); total];
                a[offset..offset + self.dim].clone_from_slice(&c.a);
                Constraint::new(a, c.b)
            })
            .collect()
    }

    fn lp_with_objective(&self, objective: Point) -> LinearProgram {
        let mut lp = LinearProgram::new(objective);
        for c in self.inequality_rows() {
            lp = lp.le(c.a, c.b);
        }
        lp
    }

    pub fn feasible_point(&self) -> Result<Option<Point>, PolyError> {
        if self.dim == 0 {
            return Ok(Some(Vec::new()));
        }
        let lp = self.lp_with_objective(vec![Rational::zero(); self.dim]);
        Ok(solve_lp(&lp)?.point().cloned())
    }

    pub fn is_empty(&self) -> Result<bool, PolyError> {
        Ok(self.feasible_point()?.is_none())
    }

    /// Maximizes `c·x` over the polyhedron.
    pub fn maximize(&self, c: &[Rational]) -> Result<LpOutcome, PolyError> {
        Ok(maximize(&self.lp_with_objective(c.to_vec()))?)
    }

    /// Minimizes `c·x` over the polyhedron.
    pub fn minimize(&self, c: &[Rational]) -> Result<LpOutcome, PolyError> {
        Ok(solve_lp(&self.lp_with_objective(c.to_vec()))?)
    }

    /// True when the inequalities admit a strictly feasible point inside the
    /// affine hull cut out by the equalities, i.e. the polyhedron is
    /// full-dimensional relative to its equality constraints.
    pub fn is_full_dimensional(&self) -> Result<bool, PolyError> {
        Ok(self.strictly_feasible_point()?.is_some())
    }

    /// A point satisfying every equality and every inequality strictly,
    /// chosen to maximize the smallest slack up to 1. Inequalities that are
    /// constant on the affine hull of the equalities only need to hold.
    /// `None` when no such point exists.
    pub fn strictly_feasible_point(&self) -> Result<Option<Point>, PolyError> {
        let n = self.dim;
        let mut obj = vec![Rational::zero(); n + 1];
        obj[n] = Rational::one();
        let mut lp = LinearProgram::new(obj);
        let eq_rows: Vec<Point> = self.eqs.iter().map(|c| c.a.clone()).collect();
        let eq_rank = rank(&eq_rows, n);
        for c in &self.ineqs {
            // normals in the span of the equalities are constant on the
            // affine hull and cannot be strict there
            let mut with_row = eq_rows.clone();
            with_row.push(c.a.clone());
            let constant = rank(&with_row, n) == eq_rank;
            let mut a = c.a.clone();
            a.push(if constant { Rational::zero() } else { Rational::one() });
            lp = lp.le(a, c.b.clone());
        }
        for c in &self.eqs {
            let mut a = c.a.clone();
            a.push(Rational::zero());
            lp = lp.eq(a, c.b.clone());
        }
        let mut cap = vec![Rational::zero(); n + 1];
        cap[n] = Rational::one();
        lp = lp.le(cap, Rational::one());
        Ok(match maximize(&lp)? {
            LpOutcome::Optimal { value, mut point } if value.is_positive() => {
                point.truncate(n);
                Some(point)
            }
            _ => None,
        })
    }

    /// Drops inequalities implied by the others. Duplicates collapse to one.
    pub fn remove_redundant(&self) -> Result<Polyhedron, PolyError> {
        let mut p = self.clone();
        p.ineqs.sort();
        p.ineqs.dedup();
        let mut i = 0;
        while i < p.ineqs.len() {
            let target = p.ineqs.remove(i);
            let redundant = match p.maximize(&target.a)? {
                LpOutcome::Optimal { value, .. } => value <= target.b,
                LpOutcome::Unbounded { .. } => false,
                // empty: everything is redundant, keep the representation
                LpOutcome::Infeasible => false,
            };
            if !redundant {
                p.ineqs.insert(i, target);
                i += 1;
            }
        }
        Ok(p)
    }

    /// Mutual containment.
    pub fn same_set(&self, other: &Polyhedron) -> Result<bool, PolyError> {
        Ok(contains(self, other)?.holds() && contains(other, self)?.holds())
    }
}

/// Outcome of a containment test `Q ⊆ P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment {
    Contained,
    /// A point of `Q` outside `P`.
    NotContained { witness: Point },
}

impl Containment {
    pub fn holds(&self) -> bool {
        matches!(self, Containment::Contained)
    }
}

/// Decides `Q ⊆ P` by maximizing each constraint of `P` over `Q`.
pub fn contains(p: &Polyhedron, q: &Polyhedron) -> Result<Containment, PolyError> {
    if p.dim != q.dim {
        return Err(PolyError::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    for c in p.inequality_rows() {
        match q.maximize(&c.a)? {
            LpOutcome::Infeasible => return Ok(Containment::Contained),
            LpOutcome::Optimal { value, point } => {
                if value > c.b {
                    return Ok(Containment::NotContained { witness: point });
                }
            }
            LpOutcome::Unbounded { point, ray } => {
                // step far enough along the ray to violate a·x ≤ b
                let rate = dot(&c.a, &ray);
                let gap = c.slack(&point);
                let t = if gap.is_negative() {
                    Rational::zero()
                } else {
                    gap / rate + Rational::one()
                };
                let witness = point.iter().zip(&ray).map(|(x, r)| x + &t * r).collect();
                return Ok(Containment::NotContained { witness });
            }
        }
    }
    Ok(Containment::Contained)
}

/// Closest pair realizing an ℓ∞ distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinfDistance {
    pub value: Rational,
    pub from: Point,
    pub to: Point,
}

/// `inf { ‖u − v‖∞ : u ∈ P, v ∈ Q }` as a single linear program.
pub fn linf_distance_witness(p: &Polyhedron, q: &Polyhedron) -> Result<LinfDistance, PolyError> {
    if p.dim != q.dim {
        return Err(PolyError::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    let d = p.dim;
    let total = 2 * d + 1;
    let mut obj = vec![Rational::zero(); total];
    obj[2 * d] = Rational::one();
    let mut lp = LinearProgram::new(obj);
    for c in p.embedded_rows(0, total).into_iter().chain(q.embedded_rows(d, total)) {
        lp = lp.le(c.a, c.b);
    }
    for i in 0..d {
        let mut a = vec![Rational::zero(); total];
        a[i] = Rational::one();
        a[d + i] = -Rational::one();
        a[2 * d] = -Rational::one();
        lp = lp.le(a.clone(), Rational::zero());
        a[i] = -Rational::one();
        a[d + i] = Rational::one();
        lp = lp.le(a, Rational::zero());
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal { value, point } => Ok(LinfDistance {
            value,
            from: point[..d].to_vec(),
            to: point[d..2 * d].to_vec(),
        }),
        LpOutcome::Infeasible => Err(PolyError::Empty),
        // t ≥ 0 is implied whenever d ≥ 1
        LpOutcome::Unbounded { .. } => Err(PolyError::Empty),
    }
}

pub fn linf_distance(p: &Polyhedron, q: &Polyhedron) -> Result<Rational, PolyError> {
    if p.dim == 0 && q.dim == 0 {
        return Ok(Rational::zero());
    }
    Ok(linf_distance_witness(p, q)?.value)
}

/// A relative-interior point: the vertex centroid shifted by the sum of the
/// extreme rays.
pub fn interior_point(p: &Polyhedron) -> Result<Point, PolyError> {
    let desc = vertices(p)?;
    let k = Rational::from_integer((desc.vertices.len() as i64).into());
    let mut x = vec![Rational::zero(); p.dim];
    for v in &desc.vertices {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += vi;
        }
    }
    for xi in x.iter_mut() {
        *xi /= &k;
    }
    for r in &desc.rays {
        for (xi, ri) in x.iter_mut().zip(r) {
            *xi += ri;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, int_point, ratio};

    fn interval(lo: Rational, hi: Rational) -> Polyhedron {
        Polyhedron::new(1).le(int_point(&[1]), hi).le(int_point(&[-1]), -lo)
    }

    #[test]
    fn interval_gap() {
        let left = Polyhedron::new(1).le(int_point(&[1]), int(0));
        let right = Polyhedron::new(1).le(int_point(&[-1]), int(-1));
        assert_eq!(linf_distance(&left, &right).unwrap(), int(1));
        assert_eq!(linf_distance(&right, &left).unwrap(), int(1));
    }

    #[test]
    fn overlapping_distance_is_zero() {
        let a = interval(int(0), int(2));
        let b = interval(int(1), int(3));
        assert_eq!(linf_distance(&a, &b).unwrap(), int(0));
    }

    #[test]
    fn distance_to_empty_is_an_error() {
        let empty = interval(int(1), int(0));
        assert_eq!(linf_distance(&empty, &interval(int(0), int(1))), Err(PolyError::Empty));
    }

    #[test]
    fn containment() {
        let unit = interval(int(0), int(1));
        let half = interval(int(0), ratio(1, 2));
        assert!(contains(&unit, &half).unwrap().holds());
        assert_eq!(
            contains(&half, &unit).unwrap(),
            Containment::NotContained {
                witness: int_point(&[1])
            }
        );
        let empty = interval(int(2), int(1));
        assert!(contains(&half, &empty).unwrap().holds());
    }

    #[test]
    fn unbounded_containment_witness() {
        let half_line = Polyhedron::new(1).le(int_point(&[-1]), int(0));
        let unit = interval(int(0), int(1));
        match contains(&unit, &half_line).unwrap() {
            Containment::NotContained { witness } => {
                assert!(half_line.contains_point(&witness));
                assert!(!unit.contains_point(&witness));
            }
            Containment::Contained => panic!("half line is not inside [0,1]"),
        }
    }

    #[test]
    fn interior_points() {
        assert_eq!(interior_point(&interval(int(0), int(1))).unwrap(), alloc::vec![ratio(1, 2)]);
        let triangle = Polyhedron::new(2)
            .le(int_point(&[-1, 0]), int(0))
            .le(int_point(&[0, -1]), int(0))
            .le(int_point(&[1, 1]), int(1));
        assert_eq!(interior_point(&triangle).unwrap(), alloc::vec![ratio(1, 3), ratio(1, 3)]);
        let half_line = Polyhedron::new(1).le(int_point(&[-1]), int(0));
        assert_eq!(interior_point(&half_line).unwrap(), int_point(&[1]));
        assert_eq!(interior_point(&interval(int(1), int(0))), Err(PolyError::Empty));
    }

    #[test]
    fn full_dimensionality() {
        assert!(interval(int(0), int(1)).is_full_dimensional().unwrap());
        assert!(!interval(int(1), int(1)).is_full_dimensional().unwrap());
        assert!(Polyhedron::simplex(3).is_full_dimensional().unwrap());
        let edge = Polyhedron::simplex(3).le(int_point(&[0, 0, 1]), int(0));
        assert!(!edge.is_full_dimensional().unwrap());
    }

    #[test]
    fn redundancy_removal() {
        let p = interval(int(0), int(1))
            .le(int_point(&[1]), int(5))
            .le(int_point(&[2]), int(2));
        let q = p.remove_redundant().unwrap();
        assert_eq!(q.ineqs.len(), 2);
        assert!(q.same_set(&p).unwrap());
    }
}
