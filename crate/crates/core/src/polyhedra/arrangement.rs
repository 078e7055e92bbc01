use alloc::vec::Vec;

use super::{MaxAffine, PolyError, Polyhedron};
use crate::lp::LpOutcome;
use crate::rational::{sub, Point, Rational};

/// Largest ambient dimension accepted by [`arrangement_cells`].
pub const MAX_ARRANGEMENT_DIM: usize = 3;

/// A full-dimensional closed cell on which every function is affine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrangementCell {
    pub cell: Polyhedron,
    /// Index of the active piece of each input function.
    pub active: Vec<usize>,
    /// A point of the relative interior.
    pub interior: Point,
}

/// Common refinement of `region` by the linearity regions of `functions`.
///
/// Cells are closed, full-dimensional relative to the equalities of
/// `region`, and have disjoint relative interiors. When two pieces agree on
/// a whole cell, the lower index keeps it.
pub fn arrangement_cells(
    functions: &[MaxAffine],
    region: &Polyhedron,
) -> Result<Vec<ArrangementCell>, PolyError> {
    if region.dim > MAX_ARRANGEMENT_DIM {
        return Err(PolyError::UnsupportedScale {
            dim: region.dim,
            max: MAX_ARRANGEMENT_DIM,
        });
    }
    for f in functions {
        if f.dim != region.dim {
            return Err(PolyError::DimensionMismatch {
                expected: region.dim,
                found: f.dim,
            });
        }
    }
    if region.is_empty()? {
        return Err(PolyError::Empty);
    }
    let Some(interior) = region.strictly_feasible_point()? else {
        return Ok(Vec::new());
    };
    let mut cells = alloc::vec![ArrangementCell {
        cell: region.remove_redundant()?,
        active: Vec::new(),
        interior,
    }];
    for f in functions {
        let mut refined = Vec::new();
        for parent in &cells {
            for k in 0..f.pieces.len() {
                let candidate = parent.cell.intersect(&f.active_region(k));
                let Some(interior) = candidate.strictly_feasible_point()? else {
                    continue;
                };
                if shadowed_by_earlier(f, k, &candidate)? {
                    continue;
                }
                let mut active = parent.active.clone();
                active.push(k);
                refined.push(ArrangementCell {
                    cell: candidate.remove_redundant()?,
                    active,
                    interior,
                });
            }
        }
        cells = refined;
    }
    Ok(cells)
}

/// True when some earlier piece coincides with piece `k` on all of `cell`.
fn shadowed_by_earlier(f: &MaxAffine, k: usize, cell: &Polyhedron) -> Result<bool, PolyError> {
    let pk = &f.pieces[k];
    for pj in &f.pieces[..k] {
        let w = sub(&pj.w, &pk.w);
        let gap: Rational = &pk.z - &pj.z;
        let hi = match cell.maximize(&w)? {
            LpOutcome::Optimal { value, .. } => value,
            _ => continue,
        };
        let lo = match cell.minimize(&w)? {
            LpOutcome::Optimal { value, .. } => value,
            _ => continue,
        };
        if hi == gap && lo == gap {
            return Ok(true);
        }
    }
    Ok(false)
}
