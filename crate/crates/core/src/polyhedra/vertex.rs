use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use super::{PolyError, Polyhedron};
use crate::linalg::{for_each_subset, null_space, rank, solve_unique};
use crate::rational::{linf_norm, Point, Rational};

/// V-representation of a pointed polyhedron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexDescription {
    /// Sorted lexicographically.
    pub vertices: Vec<Point>,
    /// Extreme rays normalized to unit ℓ∞ norm, sorted.
    pub rays: Vec<Point>,
    pub is_bounded: bool,
}

/// Enumerates vertices and extreme rays by trying every basis of tight
/// constraints. Exponential in the number of constraints, exact, and meant
/// for small dimensions.
pub fn vertices(p: &Polyhedron) -> Result<VertexDescription, PolyError> {
    if p.is_empty()? {
        return Err(PolyError::Empty);
    }
    let dim = p.dim;
    let eq_rows: Vec<Point> = p.eqs.iter().map(|c| c.a.clone()).collect();
    let eq_rhs: Vec<Rational> = p.eqs.iter().map(|c| c.b.clone()).collect();
    let all_rows: Vec<Point> = p
        .ineqs
        .iter()
        .map(|c| c.a.clone())
        .chain(eq_rows.iter().cloned())
        .collect();
    if rank(&all_rows, dim) < dim {
        return Err(PolyError::NoVertex);
    }
    let eq_rank = rank(&eq_rows, dim);

    let mut verts = Vec::new();
    for_each_subset(p.ineqs.len(), dim - eq_rank, |subset| {
        let mut rows = eq_rows.clone();
        let mut rhs = eq_rhs.clone();
        for &i in subset {
            rows.push(p.ineqs[i].a.clone());
            rhs.push(p.ineqs[i].b.clone());
        }
        if let Some(x) = solve_unique(&rows, &rhs, dim) {
            if p.contains_point(&x) {
                verts.push(x);
            }
        }
    });
    verts.sort();
    verts.dedup();

    let mut rays = Vec::new();
    if eq_rank < dim {
        for_each_subset(p.ineqs.len(), dim - 1 - eq_rank, |subset| {
            let mut rows = eq_rows.clone();
            rows.extend(subset.iter().map(|&i| p.ineqs[i].a.clone()));
            let kernel = null_space(&rows, dim);
            if kernel.len() != 1 {
                return;
            }
            let dir = &kernel[0];
            let norm = linf_norm(dir);
            for sign in [Rational::from_integer(1.into()), Rational::from_integer((-1).into())] {
                let r: Point = dir.iter().map(|x| x * &sign / &norm).collect();
                let in_cone = p
                    .ineqs
                    .iter()
                    .all(|c| !crate::rational::dot(&c.a, &r).is_positive());
                if in_cone {
                    rays.push(r);
                }
            }
        });
    }
    rays.retain(|r| !r.iter().all(|x| x.is_zero()));
    rays.sort();
    rays.dedup();

    let is_bounded = rays.is_empty();
    Ok(VertexDescription {
        vertices: verts,
        rays,
        is_bounded,
    })
}
