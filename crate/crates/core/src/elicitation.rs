//! Bayes risks, level sets, and structural checks on the simplex.
//!
//! Distributions live in `ℚ^n` with the explicit constraint `Σp = 1`, so
//! loss rows are directly usable as inequality data.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::linalg::{for_each_subset, rank, solve_unique};
use crate::lp::{maximize, solve_lp, LinearProgram, LpOutcome};
use crate::model::{DiscreteLoss, Distribution, ModelError, PolyhedralLink, PolyhedralLoss};
use crate::polyhedra::{
    contains, vertices, AffinePiece, Containment, MaxAffine, PolyError, Polyhedron,
    MAX_ARRANGEMENT_DIM,
};
use crate::rational::{dot, format_rational, sub, Point, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElicitationError {
    Geometry(PolyError),
    Model(ModelError),
    /// The epigraph program of a nonnegative loss cannot be unbounded.
    UnboundedRisk,
    UnsupportedDimension { dim: usize, max: usize },
    TooManyLabels { labels: usize, max: usize },
    /// Some distribution has no minimizer among the arrangement vertices.
    NoVertexMinimizer { witness: Distribution },
    /// A cell of the decomposition is not uniform where it should be.
    CellNotConstant { witness: Distribution },
}

impl fmt::Display for ElicitationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElicitationError::Geometry(e) => write!(f, "{e}"),
            ElicitationError::Model(e) => write!(f, "{e}"),
            ElicitationError::UnboundedRisk => {
                f.write_str("Bayes risk program is unbounded; surrogate is not bounded below")
            }
            ElicitationError::UnsupportedDimension { dim, max } => {
                write!(f, "surrogate dimension {dim} exceeds the supported maximum {max}")
            }
            ElicitationError::TooManyLabels { labels, max } => {
                write!(f, "{labels} labels exceed the supported maximum {max}")
            }
            ElicitationError::NoVertexMinimizer { witness } => write!(
                f,
                "no vertex-representable minimizer at p = {}",
                format_point(witness.probs())
            ),
            ElicitationError::CellNotConstant { witness } => write!(
                f,
                "optimal sets change inside a cell at p = {}",
                format_point(witness.probs())
            ),
        }
    }
}

impl core::error::Error for ElicitationError {}

impl From<PolyError> for ElicitationError {
    fn from(e: PolyError) -> Self {
        ElicitationError::Geometry(e)
    }
}

impl From<crate::lp::LpError> for ElicitationError {
    fn from(e: crate::lp::LpError) -> Self {
        ElicitationError::Geometry(e.into())
    }
}

impl From<ModelError> for ElicitationError {
    fn from(e: ModelError) -> Self {
        ElicitationError::Model(e)
    }
}

pub(crate) fn format_point(x: &[Rational]) -> alloc::string::String {
    let parts: Vec<_> = x.iter().map(format_rational).collect();
    alloc::format!("({})", parts.join(", "))
}

/// Largest label count handled by [`cell_decomposition`].
pub const MAX_LABELS: usize = 5;

/// `⟨p, L(u)⟩`.
pub fn expected_loss(loss: &PolyhedralLoss, p: &Distribution, u: &[Rational]) -> Rational {
    p.support()
        .map(|y| &p.probs()[y] * loss.label(y).eval(u))
        .sum()
}

/// `u ↦ ⟨p, L(u)⟩` expanded into one affine piece per choice of active
/// piece for every label in the support of `p`.
pub fn expected_loss_function(loss: &PolyhedralLoss, p: &Distribution) -> MaxAffine {
    let d = loss.dim();
    let mut acc = vec![AffinePiece::new(vec![Rational::zero(); d], Rational::zero())];
    for y in p.support() {
        let py = &p.probs()[y];
        let mut next = Vec::with_capacity(acc.len() * loss.label(y).pieces.len());
        for partial in &acc {
            for piece in &loss.label(y).pieces {
                let w = partial.w.iter().zip(&piece.w).map(|(a, b)| a + py * b).collect();
                next.push(AffinePiece::new(w, &partial.z + py * &piece.z));
            }
        }
        next.sort();
        next.dedup();
        acc = next;
    }
    MaxAffine::new(d, acc)
}

/// Bayes risk of the surrogate and the optimal set `Γ(p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurrogateRisk {
    pub value: Rational,
    pub optimal_set: Polyhedron,
    /// One minimizer.
    pub minimizer: Point,
}

/// `min_u ⟨p, L(u)⟩` through the epigraph program
/// `min Σ p_y t_y` s.t. `a_{y,j}·u + c_{y,j} ≤ t_y`.
pub fn bayes_risk_value(
    loss: &PolyhedralLoss,
    p: &Distribution,
) -> Result<(Rational, Point), ElicitationError> {
    match min_expected_loss_on(loss, p, &Polyhedron::new(loss.dim()))? {
        Some(found) => Ok(found),
        None => unreachable!("epigraph programs over all of u-space are feasible"),
    }
}

/// `min_{u ∈ region} ⟨p, L(u)⟩` with a minimizer; `None` when `region` is
/// empty.
pub fn min_expected_loss_on(
    loss: &PolyhedralLoss,
    p: &Distribution,
    region: &Polyhedron,
) -> Result<Option<(Rational, Point)>, ElicitationError> {
    let d = loss.dim();
    let support: Vec<usize> = p.support().collect();
    let total = d + support.len();
    let mut obj = vec![Rational::zero(); total];
    for (k, &y) in support.iter().enumerate() {
        obj[d + k] = p.probs()[y].clone();
    }
    let mut lp = LinearProgram::new(obj);
    for (k, &y) in support.iter().enumerate() {
        for piece in &loss.label(y).pieces {
            let mut a = piece.w.clone();
            a.resize(total, Rational::zero());
            a[d + k] = -Rational::one();
            lp = lp.le(a, -piece.z.clone());
        }
    }
    for c in region.embedded_rows(0, total) {
        lp = lp.le(c.a, c.b);
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal { value, mut point } => {
            point.truncate(d);
            Ok(Some((value, point)))
        }
        LpOutcome::Unbounded { .. } => Err(ElicitationError::UnboundedRisk),
        LpOutcome::Infeasible => Ok(None),
    }
}

/// Bayes risk with the full optimal set
/// `Γ(p) = {u : every expanded piece of ⟨p, L(u)⟩ is at most the risk}`.
pub fn bayes_risk_surrogate(
    loss: &PolyhedralLoss,
    p: &Distribution,
) -> Result<SurrogateRisk, ElicitationError> {
    let (value, minimizer) = bayes_risk_value(loss, p)?;
    let set = optimal_set_unreduced(loss, p, &value);
    Ok(SurrogateRisk {
        value,
        optimal_set: set.remove_redundant()?,
        minimizer,
    })
}

/// `Γ(p)` given its risk, keeping only the tightest row per normal.
pub(crate) fn optimal_set_unreduced(
    loss: &PolyhedralLoss,
    p: &Distribution,
    risk: &Rational,
) -> Polyhedron {
    let f = expected_loss_function(loss, p);
    let mut rows: Vec<(Point, Rational)> = f
        .pieces
        .into_iter()
        // constant pieces never exceed the risk
        .filter(|piece| piece.w.iter().any(|x| !x.is_zero()))
        .map(|piece| (piece.w, risk - piece.z))
        .collect();
    rows.sort();
    rows.dedup_by(|later, earlier| later.0 == earlier.0);
    let mut set = Polyhedron::new(loss.dim());
    for (w, b) in rows {
        set = set.le(w, b);
    }
    set
}

pub fn regret_surrogate(
    loss: &PolyhedralLoss,
    u: &[Rational],
    p: &Distribution,
) -> Result<Rational, ElicitationError> {
    let (risk, _) = bayes_risk_value(loss, p)?;
    Ok(expected_loss(loss, p, u) - risk)
}

/// Minimum expected target loss and every report attaining it.
pub fn bayes_risk_target(target: &DiscreteLoss, p: &Distribution) -> (Rational, Vec<usize>) {
    let values: Vec<Rational> = (0..target.reports().len())
        .map(|r| target.expected(r, p))
        .collect();
    let best = values.iter().min().expect("reports are nonempty").clone();
    let argmin = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == best)
        .map(|(r, _)| r)
        .collect();
    (best, argmin)
}

pub fn regret_target(target: &DiscreteLoss, r: usize, p: &Distribution) -> Rational {
    target.expected(r, p) - bayes_risk_target(target, p).0
}

/// `γ_r = {p ∈ Δ : r is optimal at p}`.
pub fn target_level_set(target: &DiscreteLoss, r: usize) -> Polyhedron {
    let n = target.row(r).len();
    let mut set = Polyhedron::simplex(n);
    for r2 in 0..target.reports().len() {
        if r2 != r {
            set = set.le(sub(target.row(r), target.row(r2)), Rational::zero());
        }
    }
    set
}

/// Finite family of level sets covering the simplex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSetAtlas {
    /// Representatives `U`, sorted, with pairwise distinct loss vectors.
    pub representatives: Vec<Point>,
    /// `L(u)` for each representative.
    pub losses: Vec<Point>,
    /// `Γ_u` in probability coordinates, full-dimensional in the simplex.
    pub level_sets: Vec<Polyhedron>,
    /// Vertices of each `Γ_u`.
    pub level_set_vertices: Vec<Vec<Distribution>>,
    /// All level-set vertices, deduplicated and sorted.
    pub vertex_pool: Vec<Distribution>,
}

impl LevelSetAtlas {
    /// Index of the first representative optimal at `p`.
    pub fn best(&self, p: &Distribution) -> usize {
        let values: Vec<Rational> = self.losses.iter().map(|l| dot(l, p.probs())).collect();
        let best = values.iter().min().expect("atlas is nonempty");
        values.iter().position(|v| v == best).expect("minimum is attained")
    }

    /// Surrogate Bayes risk, exact because the atlas is certified.
    pub fn risk(&self, p: &Distribution) -> Rational {
        dot(&self.losses[self.best(p)], p.probs())
    }

    /// Indices of the level sets containing `p`.
    pub fn containing(&self, p: &Distribution) -> Vec<usize> {
        (0..self.level_sets.len())
            .filter(|&i| self.level_sets[i].contains_point(p.probs()))
            .collect()
    }
}

/// Tie hyperplanes `(a_j − a_k)·u = c_k − c_j` of each label's pieces,
/// scaled so the first nonzero coefficient is 1.
fn tie_hyperplanes(loss: &PolyhedralLoss) -> Vec<(Point, Rational)> {
    let mut planes = Vec::new();
    for f in loss.labels() {
        for (j, pj) in f.pieces.iter().enumerate() {
            for pk in &f.pieces[j + 1..] {
                let a = sub(&pj.w, &pk.w);
                let Some(lead) = a.iter().find(|x| !x.is_zero()).cloned() else {
                    continue;
                };
                let a: Point = a.iter().map(|x| x / &lead).collect();
                let b = (&pk.z - &pj.z) / &lead;
                planes.push((a, b));
            }
        }
    }
    planes.sort();
    planes.dedup();
    planes
}

/// Builds the level-set atlas and certifies that it covers the simplex with
/// exact Bayes risks.
///
/// Candidates are the vertices of the arrangement of tie hyperplanes. Each
/// level set `Γ_u` is where `u` beats every other candidate. The surrogate
/// risk is concave and `⟨p, L(u)⟩` is linear, so agreement at the vertices
/// of `Γ_u` implies agreement on all of `Γ_u`.
pub fn level_set_atlas(loss: &PolyhedralLoss) -> Result<LevelSetAtlas, ElicitationError> {
    let d = loss.dim();
    let n = loss.num_labels();
    if d > MAX_ARRANGEMENT_DIM {
        return Err(ElicitationError::UnsupportedDimension {
            dim: d,
            max: MAX_ARRANGEMENT_DIM,
        });
    }
    let planes = tie_hyperplanes(loss);
    let mut candidates: Vec<Point> = Vec::new();
    for_each_subset(planes.len(), d, |idx| {
        let rows: Vec<Point> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<Rational> = idx.iter().map(|&i| planes[i].1.clone()).collect();
        if rank(&rows, d) == d {
            if let Some(u) = solve_unique(&rows, &rhs, d) {
                candidates.push(u);
            }
        }
    });
    candidates.sort();
    candidates.dedup();
    let mut reps: Vec<Point> = Vec::new();
    let mut losses: Vec<Point> = Vec::new();
    for u in candidates {
        let l = loss.eval(&u);
        if !losses.contains(&l) {
            reps.push(u);
            losses.push(l);
        }
    }
    if reps.is_empty() {
        return Err(ElicitationError::NoVertexMinimizer {
            witness: Distribution::uniform(n),
        });
    }

    let mut atlas = LevelSetAtlas {
        representatives: Vec::new(),
        losses: Vec::new(),
        level_sets: Vec::new(),
        level_set_vertices: Vec::new(),
        vertex_pool: Vec::new(),
    };
    for (i, u) in reps.iter().enumerate() {
        let mut set = Polyhedron::simplex(n);
        for (k, other) in losses.iter().enumerate() {
            if k != i {
                set = set.le(sub(&losses[i], other), Rational::zero());
            }
        }
        if !set.is_full_dimensional()? {
            continue;
        }
        let set = set.remove_redundant()?;
        let verts: Vec<Distribution> = vertices(&set)?
            .vertices
            .into_iter()
            .map(|v| Distribution::new(v).map_err(ElicitationError::Model))
            .collect::<Result<_, _>>()?;
        atlas.representatives.push(u.clone());
        atlas.losses.push(losses[i].clone());
        atlas.level_sets.push(set);
        atlas.level_set_vertices.push(verts);
    }
    for (i, verts) in atlas.level_set_vertices.iter().enumerate() {
        for q in verts {
            let (risk, _) = bayes_risk_value(loss, q)?;
            if dot(&atlas.losses[i], q.probs()) != risk {
                return Err(ElicitationError::NoVertexMinimizer { witness: q.clone() });
            }
        }
    }
    let mut pool: Vec<Distribution> = atlas.level_set_vertices.iter().flatten().cloned().collect();
    pool.sort();
    pool.dedup();
    atlas.vertex_pool = pool;
    Ok(atlas)
}

/// For each report, whether it is the unique optimum for some `p`. Decided
/// by maximizing `min_{r' ≠ r} ⟨p, ℓ(r') − ℓ(r)⟩` over the simplex.
pub fn check_nonredundant(target: &DiscreteLoss) -> Result<Vec<bool>, ElicitationError> {
    let m = target.reports().len();
    let n = target.row(0).len();
    let mut verdicts = Vec::with_capacity(m);
    for r in 0..m {
        let mut obj = vec![Rational::zero(); n + 1];
        obj[n] = Rational::one();
        let mut lp = LinearProgram::new(obj.clone()).le(obj, Rational::one());
        for y in 0..n {
            let mut a = vec![Rational::zero(); n + 1];
            a[y] = -Rational::one();
            lp = lp.le(a, Rational::zero());
        }
        let mut sum = vec![Rational::one(); n + 1];
        sum[n] = Rational::zero();
        lp = lp.eq(sum, Rational::one());
        for r2 in (0..m).filter(|&r2| r2 != r) {
            // s ≤ ⟨p, ℓ(r2) − ℓ(r)⟩
            let mut a = sub(target.row(r), target.row(r2));
            a.push(Rational::one());
            lp = lp.le(a, Rational::zero());
        }
        let positive = match maximize(&lp)? {
            LpOutcome::Optimal { value, .. } => value.is_positive(),
            _ => false,
        };
        verdicts.push(positive);
    }
    Ok(verdicts)
}

/// Outcome of the refinement test `Γ_u ⊆ γ_{ψ(u)}` over the atlas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refinement {
    Holds,
    Fails {
        representative: Point,
        report: usize,
        witness: Distribution,
    },
}

impl Refinement {
    pub fn holds(&self) -> bool {
        matches!(self, Refinement::Holds)
    }
}

pub fn check_refinement(
    atlas: &LevelSetAtlas,
    target: &DiscreteLoss,
    link: &PolyhedralLink,
) -> Result<Refinement, ElicitationError> {
    for (u, gamma_u) in atlas.representatives.iter().zip(&atlas.level_sets) {
        let name = link.eval(u);
        let report = target.report_index(name).ok_or_else(|| ModelError::UnknownReport {
            name: name.into(),
            context: "link".into(),
        })?;
        if let Containment::NotContained { witness } = contains(&target_level_set(target, report), gamma_u)? {
            return Ok(Refinement::Fails {
                representative: u.clone(),
                report,
                witness: Distribution::new(witness)?,
            });
        }
    }
    Ok(Refinement::Holds)
}

/// A full-dimensional piece `Γ_u ∩ γ_r` of the simplex on whose relative
/// interior both optimal sets are constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexCell {
    pub region: Polyhedron,
    pub representative: usize,
    pub report: usize,
    pub interior: Distribution,
    pub surrogate_optimal_face: Polyhedron,
    pub target_optimal_set: Vec<usize>,
}

/// Common refinement of the surrogate and target level sets.
///
/// Distinct loss vectors tie only on a hyperplane of the simplex, so the
/// cells have disjoint relative interiors. Constancy of both optimal sets is
/// spot-checked at three interior points per cell.
pub fn cell_decomposition(
    loss: &PolyhedralLoss,
    target: &DiscreteLoss,
    atlas: &LevelSetAtlas,
) -> Result<Vec<SimplexCell>, ElicitationError> {
    let n = loss.num_labels();
    if n > MAX_LABELS {
        return Err(ElicitationError::TooManyLabels {
            labels: n,
            max: MAX_LABELS,
        });
    }
    let mut distinct_reports: Vec<usize> = Vec::new();
    for r in 0..target.reports().len() {
        if !distinct_reports.iter().any(|&s| target.row(s) == target.row(r)) {
            distinct_reports.push(r);
        }
    }
    let mut cells = Vec::new();
    for (i, gamma_u) in atlas.level_sets.iter().enumerate() {
        for &r in &distinct_reports {
            let region = gamma_u.intersect(&target_level_set(target, r));
            let Some(center) = region.strictly_feasible_point()? else {
                continue;
            };
            let region = region.remove_redundant()?;
            let interior = Distribution::new(center)?;
            let face = bayes_risk_surrogate(loss, &interior)?.optimal_set;
            let (_, gamma) = bayes_risk_target(target, &interior);
            let verts = vertices(&region)?.vertices;
            let half = Rational::new(1.into(), 2.into());
            for v in [verts.first(), verts.last()].into_iter().flatten() {
                let probe = Distribution::mix(&interior, &Distribution::new(v.clone())?, &half);
                let probe_face = bayes_risk_surrogate(loss, &probe)?.optimal_set;
                if !probe_face.same_set(&face)? || bayes_risk_target(target, &probe).1 != gamma {
                    return Err(ElicitationError::CellNotConstant { witness: probe });
                }
            }
            cells.push(SimplexCell {
                region,
                representative: i,
                report: r,
                interior,
                surrogate_optimal_face: face,
                target_optimal_set: gamma,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LabelSet;
    use crate::rational::{int, int_point, ratio};
    use crate::zoo;
    use alloc::string::ToString;

    /// Hinge risk `2·min(p, 1 − p)` at `p = p(+1)`.
    fn hinge_risk(p: &Rational) -> Rational {
        let q = Rational::one() - p;
        int(2) * p.clone().min(q)
    }

    fn binary(p_plus: Rational) -> Distribution {
        Distribution::new(vec![Rational::one() - &p_plus, p_plus]).unwrap()
    }

    #[test]
    fn hinge_expected_loss() {
        let problem = zoo::hinge_zero_one();
        let loss = problem.polyhedral().unwrap();
        assert_eq!(expected_loss(loss, &binary(ratio(1, 2)), &int_point(&[0])), int(1));
        assert_eq!(
            expected_loss(loss, &Distribution::point_mass(2, 1), &int_point(&[-2])),
            int(3)
        );
    }

    #[test]
    fn hinge_bayes_risk_matches_closed_form() {
        let problem = zoo::hinge_zero_one();
        let loss = problem.polyhedral().unwrap();
        for k in 0..=12 {
            let p = ratio(k, 12);
            let risk = bayes_risk_surrogate(loss, &binary(p.clone())).unwrap();
            assert_eq!(risk.value, hinge_risk(&p));
        }
        let quarter = bayes_risk_surrogate(loss, &binary(ratio(1, 4))).unwrap();
        assert_eq!(quarter.value, ratio(1, 2));
        assert!(quarter.optimal_set.same_set(&Polyhedron::singleton(&int_point(&[-1]))).unwrap());
        let half = bayes_risk_surrogate(loss, &binary(ratio(1, 2))).unwrap();
        assert!(half.optimal_set.same_set(&Polyhedron::cube(1, &int(-1), &int(1))).unwrap());
        let delta = bayes_risk_surrogate(loss, &Distribution::point_mass(2, 1)).unwrap();
        assert_eq!(delta.value, int(0));
        let d = vertices(&delta.optimal_set).unwrap();
        assert_eq!(d.vertices, vec![int_point(&[1])]);
        assert_eq!(d.rays, vec![int_point(&[1])]);
    }

    #[test]
    fn regrets() {
        let problem = zoo::hinge_zero_one();
        let loss = problem.polyhedral().unwrap();
        let p = binary(ratio(3, 4));
        assert_eq!(regret_surrogate(loss, &int_point(&[0]), &p).unwrap(), ratio(1, 2));
        assert_eq!(regret_surrogate(loss, &int_point(&[1]), &p).unwrap(), int(0));
        let minus = problem.target.report_index("-1").unwrap();
        assert_eq!(regret_target(&problem.target, minus, &p), ratio(1, 2));
        let (v, argmin) = bayes_risk_target(&problem.target, &p);
        assert_eq!(v, ratio(1, 4));
        assert_eq!(argmin, vec![problem.target.report_index("+1").unwrap()]);
    }

    #[test]
    fn abstain_target_risks() {
        let problem = zoo::bep_abstain_4();
        let (v, argmin) = bayes_risk_target(&problem.target, &Distribution::uniform(4));
        assert_eq!(v, ratio(1, 2));
        assert_eq!(argmin, vec![problem.target.report_index("⊥").unwrap()]);
        let (v, argmin) = bayes_risk_target(&problem.target, &Distribution::point_mass(4, 2));
        assert_eq!(v, int(0));
        assert_eq!(argmin, vec![2]);
    }

    #[test]
    fn hinge_atlas() {
        let problem = zoo::hinge_zero_one();
        let atlas = level_set_atlas(problem.polyhedral().unwrap()).unwrap();
        assert_eq!(atlas.representatives, vec![int_point(&[-1]), int_point(&[1])]);
        assert_eq!(
            atlas.vertex_pool,
            vec![
                Distribution::point_mass(2, 1),
                binary(ratio(1, 2)),
                Distribution::point_mass(2, 0),
            ]
        );
        let low = Polyhedron::simplex(2).le(int_point(&[0, 1]), ratio(1, 2));
        assert!(atlas.level_sets[0].same_set(&low).unwrap());
    }

    #[test]
    fn label_independent_atlas() {
        let labels = LabelSet::new(vec!["a".to_string(), "b".to_string(), "c".to_string()]).unwrap();
        let abs = vec![
            AffinePiece::new(int_point(&[1]), int(0)),
            AffinePiece::new(int_point(&[-1]), int(0)),
        ];
        let loss = PolyhedralLoss::new(&labels, 1, vec![abs.clone(), abs.clone(), abs]).unwrap();
        let atlas = level_set_atlas(&loss).unwrap();
        assert_eq!(atlas.representatives, vec![int_point(&[0])]);
        assert!(atlas.level_sets[0].same_set(&Polyhedron::simplex(3)).unwrap());
    }

    #[test]
    fn flat_loss_has_no_vertex_minimizer() {
        let labels = LabelSet::new(vec!["a".to_string(), "b".to_string()]).unwrap();
        // depends on u₁ only, so every optimal set contains a vertical line
        let pieces = vec![
            AffinePiece::new(int_point(&[1, 0]), int(0)),
            AffinePiece::new(int_point(&[-1, 0]), int(0)),
        ];
        let loss = PolyhedralLoss::new(&labels, 2, vec![pieces.clone(), pieces]).unwrap();
        assert!(matches!(
            level_set_atlas(&loss),
            Err(ElicitationError::NoVertexMinimizer { .. })
        ));
    }

    #[test]
    fn bep_atlas_vertices() {
        let problem = zoo::bep_abstain_4();
        let atlas = level_set_atlas(problem.polyhedral().unwrap()).unwrap();
        assert_eq!(atlas.representatives.len(), 5);
        for y in 0..4 {
            assert!(atlas.vertex_pool.contains(&Distribution::point_mass(4, y)));
            for y2 in y + 1..4 {
                let mid = Distribution::mix(
                    &Distribution::point_mass(4, y),
                    &Distribution::point_mass(4, y2),
                    &ratio(1, 2),
                );
                assert!(atlas.vertex_pool.contains(&mid));
            }
        }
    }

    #[test]
    fn nonredundancy() {
        let hinge = zoo::hinge_zero_one();
        assert_eq!(check_nonredundant(&hinge.target).unwrap(), vec![true, true]);
        let bep = zoo::bep_abstain_4();
        assert_eq!(check_nonredundant(&bep.target).unwrap(), vec![true; 5]);
        let labels = LabelSet::new(vec!["a".to_string(), "b".to_string()]).unwrap();
        let dup = DiscreteLoss::new(
            &labels,
            vec!["x".to_string(), "y".to_string(), "z".to_string()],
            vec![int_point(&[0, 1]), int_point(&[1, 0]), int_point(&[1, 0])],
        )
        .unwrap();
        assert_eq!(check_nonredundant(&dup).unwrap(), vec![true, false, false]);
    }

    #[test]
    fn refinement() {
        let hinge = zoo::hinge_zero_one();
        let atlas = level_set_atlas(hinge.polyhedral().unwrap()).unwrap();
        assert!(check_refinement(&atlas, &hinge.target, &hinge.link).unwrap().holds());
        let flipped = zoo::flip_link(&hinge).unwrap();
        match check_refinement(&atlas, &flipped.target, &flipped.link).unwrap() {
            Refinement::Fails { representative, report, witness } => {
                let i = atlas.representatives.iter().position(|u| *u == representative).unwrap();
                assert!(atlas.level_sets[i].contains_point(witness.probs()));
                assert!(!bayes_risk_target(&flipped.target, &witness).1.contains(&report));
                assert!(witness == Distribution::point_mass(2, 0) || witness == Distribution::point_mass(2, 1));
            }
            Refinement::Holds => panic!("flipped link must fail"),
        }
    }

    #[test]
    fn hinge_cells() {
        let hinge = zoo::hinge_zero_one();
        let loss = hinge.polyhedral().unwrap();
        let atlas = level_set_atlas(loss).unwrap();
        let cells = cell_decomposition(loss, &hinge.target, &atlas).unwrap();
        assert_eq!(cells.len(), 2);
        let low = Polyhedron::simplex(2).le(int_point(&[0, 1]), ratio(1, 2));
        assert!(cells[0].region.same_set(&low).unwrap());
    }

    #[test]
    fn single_report_cells_are_level_sets() {
        let hinge = zoo::hinge_zero_one();
        let loss = hinge.polyhedral().unwrap();
        let atlas = level_set_atlas(loss).unwrap();
        let trivial = DiscreteLoss::new(&hinge.labels, vec!["r".to_string()], vec![int_point(&[1, 1])])
            .unwrap();
        let cells = cell_decomposition(loss, &trivial, &atlas).unwrap();
        assert_eq!(cells.len(), atlas.level_sets.len());
    }
}
