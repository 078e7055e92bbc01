//! Hoffman constants, separation, and linear transfer constants.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::elicitation::{
    bayes_risk_surrogate, bayes_risk_target, bayes_risk_value, check_refinement,
    min_expected_loss_on, optimal_set_unreduced, regret_surrogate, regret_target, ElicitationError,
    LevelSetAtlas, Refinement, SimplexCell,
};
use crate::lp::{maximize, LinearProgram, LpOutcome};
use crate::model::{Distribution, DiscreteLoss, LinkPiece, PolyhedralLoss, Problem};
use crate::polyhedra::{arrangement_cells, distance_as_max_affine, linf_distance_witness, vertices, Polyhedron};
use crate::rational::{add, dot, scale, sub, Extended, Point, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstantsError {
    Elicitation(ElicitationError),
    /// The distance to `Γ(p)` outgrows the regret along some ray.
    UnboundedHoffman { p: Distribution },
    /// A bad link piece touches an optimal set; run the consistency check.
    Inconsistent { p: Distribution },
}

impl fmt::Display for ConstantsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantsError::Elicitation(e) => write!(f, "{e}"),
            ConstantsError::UnboundedHoffman { p } => write!(
                f,
                "no global error bound: distance to the optimal set is not bounded by a multiple of regret at {}",
                crate::elicitation::format_point(p.probs())
            ),
            ConstantsError::Inconsistent { p } => write!(
                f,
                "a badly linked region touches the optimal set at {}; the pair is inconsistent",
                crate::elicitation::format_point(p.probs())
            ),
        }
    }
}

impl core::error::Error for ConstantsError {}

impl<E: Into<ElicitationError>> From<E> for ConstantsError {
    fn from(e: E) -> Self {
        ConstantsError::Elicitation(e.into())
    }
}

/// Smallest `H` with `d∞(u, Γ(p)) ≤ H·R_L(u, p)` for all `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoffmanConstant {
    pub value: Rational,
    /// A point attaining the ratio, when the supremum is not only approached
    /// along a ray.
    pub witness: Option<Point>,
}

/// Exact Hoffman constant of the expected loss at `p`.
///
/// On every cell of the joint arrangement of the per-label losses and of
/// `u ↦ d∞(u, Γ(p))`, both the distance and the regret are affine, so the
/// supremum of their ratio is a linear-fractional program, solved exactly
/// after the Charnes–Cooper substitution `y = t·u`.
pub fn hoffman_constant(loss: &PolyhedralLoss, p: &Distribution) -> Result<HoffmanConstant, ConstantsError> {
    let d = loss.dim();
    let risk = bayes_risk_surrogate(loss, p)?;
    let g = distance_as_max_affine(&risk.optimal_set)?;
    let support: Vec<usize> = p.support().collect();
    let mut functions: Vec<_> = support.iter().map(|&y| loss.label(y).clone()).collect();
    functions.push(g.clone());
    let cells = arrangement_cells(&functions, &Polyhedron::new(d))?;

    let mut best = HoffmanConstant {
        value: Rational::zero(),
        witness: None,
    };
    for cell in &cells {
        // regret n·u + n0 on this cell
        let mut n = vec![Rational::zero(); d];
        let mut n0 = -risk.value.clone();
        for (k, &y) in support.iter().enumerate() {
            let piece = &loss.label(y).pieces[cell.active[k]];
            let py = &p.probs()[y];
            n = add(&n, &scale(&piece.w, py));
            n0 += py * &piece.z;
        }
        let num = &g.pieces[cell.active[support.len()]];

        let mut obj = num.w.clone();
        obj.push(num.z.clone());
        let mut lp = LinearProgram::new(obj.clone());
        for c in cell.cell.inequality_rows() {
            let mut a = c.a;
            a.push(-c.b);
            lp = lp.le(a, Rational::zero());
        }
        let mut t_row = vec![Rational::zero(); d + 1];
        t_row[d] = -Rational::one();
        lp = lp.le(t_row, Rational::zero());
        let mut norm = n.clone();
        norm.push(n0.clone());
        lp = lp.eq(norm, Rational::one());

        let value = match maximize(&lp).map_err(ElicitationError::from)? {
            LpOutcome::Optimal { value, .. } => value,
            LpOutcome::Unbounded { .. } => return Err(ConstantsError::UnboundedHoffman { p: p.clone() }),
            // the regret vanishes on the whole cell
            LpOutcome::Infeasible => continue,
        };
        if value < best.value || (value == best.value && best.witness.is_some()) {
            continue;
        }
        // among optimal solutions prefer one with t > 0, which is a real point
        let mut t_obj = vec![Rational::zero(); d + 1];
        t_obj[d] = Rational::one();
        let neg_obj: Point = obj.iter().map(|x| -x).collect();
        let mut face = lp.clone().le(neg_obj, -value.clone());
        face.objective = t_obj.clone();
        let witness = match maximize(&face).map_err(ElicitationError::from)? {
            LpOutcome::Optimal { point, .. } if point[d].is_positive() => {
                Some(point[..d].iter().map(|x| x / &point[d]).collect())
            }
            LpOutcome::Unbounded { .. } => {
                // t can grow along the face; any point with t = 1 will do
                let fixed = face.clone().eq(t_obj, Rational::one());
                maximize(&fixed)
                    .map_err(ElicitationError::from)?
                    .point()
                    .map(|pt| pt[..d].to_vec())
            }
            _ => None,
        };
        if value > best.value || witness.is_some() {
            best = HoffmanConstant { value, witness };
        }
    }
    Ok(best)
}

/// Report indices of the link pieces that are not optimal at `q`.
fn bad_pieces(problem: &Problem, pieces: &[LinkPiece], q: &Distribution) -> Vec<usize> {
    let (_, good) = bayes_risk_target(&problem.target, q);
    (0..pieces.len())
        .filter(|&i| !good.contains(&problem.report_index(&pieces[i].report)))
        .collect()
}

/// Closest approach of a bad link piece to `Γ(q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationWitness {
    pub piece: usize,
    pub report: usize,
    /// Point of the piece's closure.
    pub from: Point,
    /// Point of `Γ(q)`.
    pub to: Point,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    pub value: Extended,
    pub witness: Option<SeparationWitness>,
}

/// ℓ∞ distance from `Γ(q)` to the nearest link piece whose report is not
/// optimal at `q`; `+∞` when every report in use is optimal.
pub fn separation_at(problem: &Problem, pieces: &[LinkPiece], q: &Distribution) -> Result<Separation, ConstantsError> {
    let loss = problem.polyhedral()?;
    let (risk, _) = bayes_risk_value(loss, q)?;
    let gamma = optimal_set_unreduced(loss, q, &risk);
    separation_against(problem, pieces, q, &gamma)
}

fn separation_against(
    problem: &Problem,
    pieces: &[LinkPiece],
    q: &Distribution,
    gamma: &Polyhedron,
) -> Result<Separation, ConstantsError> {
    let mut best = Separation {
        value: Extended::Infinite,
        witness: None,
    };
    for i in bad_pieces(problem, pieces, q) {
        let w = linf_distance_witness(&pieces[i].region, gamma)?;
        if Extended::Finite(w.value.clone()) < best.value {
            best = Separation {
                value: Extended::Finite(w.value),
                witness: Some(SeparationWitness {
                    piece: i,
                    report: problem.report_index(&pieces[i].report),
                    from: w.from,
                    to: w.to,
                }),
            };
        }
    }
    Ok(best)
}

/// `inf` of the surrogate regret at `q` over all badly linked reports.
pub fn bad_regret_inf(problem: &Problem, pieces: &[LinkPiece], q: &Distribution) -> Result<Extended, ConstantsError> {
    let loss = problem.polyhedral()?;
    let (risk, _) = bayes_risk_value(loss, q)?;
    let mut best = Extended::Infinite;
    for i in bad_pieces(problem, pieces, q) {
        if let Some((value, _)) = min_expected_loss_on(loss, q, &pieces[i].region)? {
            best = best.min(Extended::Finite(value - &risk));
        }
    }
    Ok(best)
}

/// `max_{r, r', y} ℓ(r)_y − ℓ(r')_y`.
pub fn c_ell(target: &DiscreteLoss) -> Rational {
    let n = target.row(0).len();
    (0..n)
        .map(|y| {
            let col = target.matrix().iter().map(|row| &row[y]);
            let hi = col.clone().max().expect("reports are nonempty");
            let lo = col.min().expect("reports are nonempty");
            hi - lo
        })
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Largest Hoffman constant over the atlas vertices.
pub fn h_l(loss: &PolyhedralLoss, atlas: &LevelSetAtlas) -> Result<Rational, ConstantsError> {
    let mut best = Rational::zero();
    for q in &atlas.vertex_pool {
        best = best.max(hoffman_constant(loss, q)?.value);
    }
    Ok(best)
}

/// `C_ℓ·H_L/ε`, and `0` when no report is ever badly linked.
pub fn paper_bound(c_ell: &Rational, h: &Rational, eps: &Extended, at: &Distribution) -> Result<Rational, ConstantsError> {
    match eps {
        Extended::Infinite => Ok(Rational::zero()),
        Extended::Finite(e) if e.is_positive() => Ok(c_ell * h / e),
        Extended::Finite(_) => Err(ConstantsError::Inconsistent { p: at.clone() }),
    }
}

/// `C_ℓ·H_L/ε_min` with `ε_min` the smallest separation over the atlas
/// vertices.
pub fn paper_alpha(problem: &Problem, atlas: &LevelSetAtlas) -> Result<Rational, ConstantsError> {
    let loss = problem.polyhedral()?;
    let pieces = problem.link.pieces(problem.dim())?;
    let mut eps = Extended::Infinite;
    let mut at = atlas.vertex_pool[0].clone();
    for q in &atlas.vertex_pool {
        let s = separation_at(problem, &pieces, q)?.value;
        if s < eps {
            eps = s;
            at = q.clone();
        }
    }
    paper_bound(&c_ell(&problem.target), &h_l(loss, atlas)?, &eps, &at)
}

/// The piece attaining `α*_q` and a point where the ratio nearly attains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaWitness {
    pub piece: usize,
    pub report: usize,
    /// Minimizer of the regret over the piece's closure.
    pub closest: Point,
    /// A point the link sends to `report` with ratio within `10⁻⁴` of `α*_q`,
    /// when one was found.
    pub inside: Option<Point>,
}

/// `α*_q = max over bad pieces of R_ℓ(report, q) / min R_L(·, q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexAlpha {
    pub value: Rational,
    pub witness: Option<AlphaWitness>,
}

pub fn vertex_alpha(problem: &Problem, pieces: &[LinkPiece], q: &Distribution) -> Result<VertexAlpha, ConstantsError> {
    let loss = problem.polyhedral()?;
    let (risk, _) = bayes_risk_value(loss, q)?;
    let mut best = VertexAlpha {
        value: Rational::zero(),
        witness: None,
    };
    for i in bad_pieces(problem, pieces, q) {
        let Some((value, closest)) = min_expected_loss_on(loss, q, &pieces[i].region)? else {
            continue;
        };
        let denom = value - &risk;
        if !denom.is_positive() {
            return Err(ConstantsError::Inconsistent { p: q.clone() });
        }
        let report = problem.report_index(&pieces[i].report);
        let ratio = regret_target(&problem.target, report, q) / denom;
        if ratio > best.value {
            best = VertexAlpha {
                value: ratio,
                witness: Some(AlphaWitness {
                    piece: i,
                    report,
                    closest,
                    inside: None,
                }),
            };
        }
    }
    if let Some(w) = best.witness.as_mut() {
        w.inside = nudge_inside(problem, &pieces[w.piece], &w.closest, q, &best.value)?;
    }
    Ok(best)
}

/// Walks from `closest` toward the piece's inner point by halving steps
/// until the link agrees and the ratio is within `10⁻⁴` of `alpha`.
fn nudge_inside(
    problem: &Problem,
    piece: &LinkPiece,
    closest: &[Rational],
    q: &Distribution,
    alpha: &Rational,
) -> Result<Option<Point>, ConstantsError> {
    let loss = problem.polyhedral()?;
    let report = problem.report_index(&piece.report);
    let target = alpha * (Rational::one() - Rational::new(1.into(), 10_000.into()));
    let numer = regret_target(&problem.target, report, q);
    let dir = sub(&piece.inner, closest);
    let mut eta = Rational::new(1.into(), 2.into());
    for _ in 0..80 {
        let u = add(closest, &scale(&dir, &eta));
        if problem.link_report(&u) == report {
            let r = regret_surrogate(loss, &u, q)?;
            if r.is_positive() && &numer / &r >= target {
                return Ok(Some(u));
            }
        }
        eta /= Rational::from_integer(2.into());
    }
    Ok(None)
}

/// `α* = max_q α*_q` over the atlas vertices.
pub fn exact_alpha(problem: &Problem, atlas: &LevelSetAtlas) -> Result<Rational, ConstantsError> {
    let pieces = problem.link.pieces(problem.dim())?;
    let mut best = Rational::zero();
    for q in &atlas.vertex_pool {
        best = best.max(vertex_alpha(problem, &pieces, q)?.value);
    }
    Ok(best)
}

/// All constants at one atlas vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexConstants {
    pub q: Distribution,
    pub hoffman: HoffmanConstant,
    pub separation: Separation,
    pub bad_regret_inf: Extended,
    pub alpha: VertexAlpha,
    /// `C_ℓ·H_{L,q}/ε_q`.
    pub bound: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InconsistencyKind {
    /// Some level set is not inside the target level set of its link.
    Refinement,
    /// A bad link piece touches the optimal set.
    Separation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InconsistencyWitness {
    pub kind: InconsistencyKind,
    pub p: Distribution,
    /// A surrogate report in `Γ(p)` (or at distance 0 from it) that links to
    /// `report`, which is not optimal at `p`.
    pub u: Point,
    pub report: usize,
}

/// Consistency verdict with every transfer constant.
///
/// When the pair is inconsistent only `c_ell` and the witness are filled;
/// the other numbers are zero and `per_vertex` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferCertificate {
    pub consistent: bool,
    pub witness: Option<InconsistencyWitness>,
    pub per_vertex: Vec<VertexConstants>,
    pub c_ell: Rational,
    pub h_l: Rational,
    /// Smallest separation over the atlas vertices.
    pub eps_min: Extended,
    /// Smallest separation over every face of the cell decomposition, which
    /// is the infimum over the whole simplex.
    pub eps_global: Extended,
    /// Smallest separation at the full-dimensional cells.
    pub eps_cells: Extended,
    pub faces_checked: usize,
    /// `C_ℓ·H_L/ε_min`.
    pub paper_alpha: Rational,
    /// `max_q C_ℓ·H_{L,q}/ε_q`.
    pub tightened_alpha: Rational,
    pub exact_alpha: Rational,
    /// Index into `per_vertex` of the first vertex attaining `exact_alpha`.
    pub alpha_vertex: Option<usize>,
}

impl TransferCertificate {
    fn inconsistent(c_ell: Rational, witness: InconsistencyWitness, faces_checked: usize) -> Self {
        TransferCertificate {
            consistent: false,
            witness: Some(witness),
            per_vertex: Vec::new(),
            c_ell,
            h_l: Rational::zero(),
            eps_min: Extended::Finite(Rational::zero()),
            eps_global: Extended::Finite(Rational::zero()),
            eps_cells: Extended::Finite(Rational::zero()),
            faces_checked,
            paper_alpha: Rational::zero(),
            tightened_alpha: Rational::zero(),
            exact_alpha: Rational::zero(),
            alpha_vertex: None,
        }
    }
}

/// Vertex sets of every nonempty face of every cell, as indices into a
/// shared vertex list.
fn cell_faces(cells: &[SimplexCell]) -> Result<(Vec<Point>, BTreeSet<Vec<usize>>), ConstantsError> {
    let mut pool: Vec<Point> = Vec::new();
    let mut faces = BTreeSet::new();
    for cell in cells {
        let verts = vertices(&cell.region)?.vertices;
        let ids: Vec<usize> = verts
            .iter()
            .map(|v| match pool.iter().position(|w| w == v) {
                Some(i) => i,
                None => {
                    pool.push(v.clone());
                    pool.len() - 1
                }
            })
            .collect();
        let facets: Vec<Vec<usize>> = cell
            .region
            .ineqs
            .iter()
            .map(|c| {
                let mut f: Vec<usize> = verts
                    .iter()
                    .zip(&ids)
                    .filter(|(v, _)| dot(&c.a, v) == c.b)
                    .map(|(_, &i)| i)
                    .collect();
                f.sort();
                f
            })
            .filter(|f| !f.is_empty())
            .collect();
        let mut all = ids.clone();
        all.sort();
        let mut stack = vec![all];
        while let Some(face) = stack.pop() {
            if !faces.insert(face.clone()) {
                continue;
            }
            for facet in &facets {
                let sub: Vec<usize> = face.iter().copied().filter(|i| facet.contains(i)).collect();
                if !sub.is_empty() && sub.len() < face.len() {
                    stack.push(sub);
                }
            }
        }
    }
    Ok((pool, faces))
}

fn centroid(pool: &[Point], face: &[usize]) -> Result<Distribution, ConstantsError> {
    let k = Rational::from_integer((face.len() as i64).into());
    let mut x = vec![Rational::zero(); pool[face[0]].len()];
    for &i in face {
        x = add(&x, &pool[i]);
    }
    let x: Point = x.iter().map(|xi| xi / &k).collect();
    Ok(Distribution::new(x).map_err(ElicitationError::from)?)
}

/// Decides consistency and, when it holds, computes every constant.
///
/// The pair is consistent iff the level sets refine the target and at one
/// relative-interior point of every face of the cell decomposition no bad
/// link piece touches the optimal set. Both optimal sets are constant on
/// each relative interior, so these finitely many checks cover the simplex.
pub fn check_consistency(
    problem: &Problem,
    atlas: &LevelSetAtlas,
    cells: &[SimplexCell],
) -> Result<TransferCertificate, ConstantsError> {
    let loss = problem.polyhedral()?;
    let c = c_ell(&problem.target);
    if let Refinement::Fails {
        representative,
        report,
        witness,
    } = check_refinement(atlas, &problem.target, &problem.link)?
    {
        return Ok(TransferCertificate::inconsistent(
            c,
            InconsistencyWitness {
                kind: InconsistencyKind::Refinement,
                p: witness,
                u: representative,
                report,
            },
            0,
        ));
    }

    let pieces = problem.link.pieces(problem.dim())?;
    let fail = |p: &Distribution, s: &Separation, checked: usize| {
        let w = s.witness.as_ref().expect("finite separation has a witness");
        TransferCertificate::inconsistent(
            c.clone(),
            InconsistencyWitness {
                kind: InconsistencyKind::Separation,
                p: p.clone(),
                u: w.from.clone(),
                report: w.report,
            },
            checked,
        )
    };
    let zero = Extended::Finite(Rational::zero());

    let mut eps_cells = Extended::Infinite;
    let mut checked = 0;
    for cell in cells {
        let s = separation_against(problem, &pieces, &cell.interior, &cell.surrogate_optimal_face)?;
        checked += 1;
        if s.value == zero {
            return Ok(fail(&cell.interior, &s, checked));
        }
        eps_cells = eps_cells.min(s.value);
    }
    let (pool, faces) = cell_faces(cells)?;
    let mut eps_global = eps_cells.clone();
    for face in &faces {
        let p = centroid(&pool, face)?;
        let s = separation_at(problem, &pieces, &p)?;
        checked += 1;
        if s.value == zero {
            return Ok(fail(&p, &s, checked));
        }
        eps_global = eps_global.min(s.value);
    }

    let mut per_vertex = Vec::new();
    for q in &atlas.vertex_pool {
        let hoffman = hoffman_constant(loss, q)?;
        let separation = separation_at(problem, &pieces, q)?;
        let bad = bad_regret_inf(problem, &pieces, q)?;
        let alpha = vertex_alpha(problem, &pieces, q)?;
        let bound = paper_bound(&c, &hoffman.value, &separation.value, q)?;
        per_vertex.push(VertexConstants {
            q: q.clone(),
            hoffman,
            separation,
            bad_regret_inf: bad,
            alpha,
            bound,
        });
    }
    let h = per_vertex
        .iter()
        .map(|v| v.hoffman.value.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let mut eps_min = Extended::Infinite;
    let mut eps_at = &atlas.vertex_pool[0];
    for v in &per_vertex {
        if v.separation.value < eps_min {
            eps_min = v.separation.value.clone();
            eps_at = &v.q;
        }
    }
    let paper = paper_bound(&c, &h, &eps_min, eps_at)?;
    let tightened = per_vertex
        .iter()
        .map(|v| v.bound.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let exact = per_vertex
        .iter()
        .map(|v| v.alpha.value.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let alpha_vertex = per_vertex
        .iter()
        .position(|v| v.alpha.value == exact && v.alpha.witness.is_some());
    Ok(TransferCertificate {
        consistent: true,
        witness: None,
        per_vertex,
        c_ell: c,
        h_l: h,
        eps_min,
        eps_global,
        eps_cells,
        faces_checked: checked,
        paper_alpha: paper,
        tightened_alpha: tightened,
        exact_alpha: exact,
        alpha_vertex,
    })
}
