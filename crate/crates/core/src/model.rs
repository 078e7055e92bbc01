//! Target losses, polyhedral surrogates, links, and data distributions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::lp::{solve_lp, LinearProgram, LpOutcome};
use crate::polyhedra::{AffinePiece, Constraint, MaxAffine, PolyError, Polyhedron};
use crate::rational::{dot, format_rational, Point, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    TooFewLabels(usize),
    DuplicateName { kind: &'static str, name: String },
    LengthMismatch { what: String, expected: usize, found: usize },
    NegativeProbability { index: usize, value: Rational },
    NotOnSimplex { sum: Rational },
    NegativeLoss { report: String, label: String, value: Rational },
    NoReports,
    NoPieces { label: String },
    /// The surrogate dips below zero; `minimum` is `None` when unbounded below.
    NegativeSurrogate { label: String, minimum: Option<Rational> },
    UnknownReport { name: String, context: String },
    EmptyLinkCell { index: usize },
    NotPolyhedral,
    UnknownFeature(String),
    NegativeWeight { feature: String },
    WeightsNotNormalized { sum: Rational },
    Geometry(PolyError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::TooFewLabels(n) => write!(f, "need at least 2 labels, found {n}"),
            ModelError::DuplicateName { kind, name } => write!(f, "duplicate {kind} name `{name}`"),
            ModelError::LengthMismatch { what, expected, found } => {
                write!(f, "{what}: expected length {expected}, found {found}")
            }
            ModelError::NegativeProbability { index, value } => {
                write!(f, "probability {index} is negative ({})", format_rational(value))
            }
            ModelError::NotOnSimplex { sum } => {
                write!(f, "probabilities sum to {}, not 1", format_rational(sum))
            }
            ModelError::NegativeLoss { report, label, value } => write!(
                f,
                "negative loss {} for report `{report}`, label `{label}`",
                format_rational(value)
            ),
            ModelError::NoReports => f.write_str("target loss has no reports"),
            ModelError::NoPieces { label } => write!(f, "label `{label}` has no affine pieces"),
            ModelError::NegativeSurrogate { label, minimum } => match minimum {
                Some(m) => write!(
                    f,
                    "surrogate for label `{label}` is negative somewhere (minimum {})",
                    format_rational(m)
                ),
                None => write!(f, "surrogate for label `{label}` is unbounded below"),
            },
            ModelError::UnknownReport { name, context } => {
                write!(f, "unknown report `{name}` in {context}")
            }
            ModelError::EmptyLinkCell { index } => write!(f, "link cell {index} is empty"),
            ModelError::NotPolyhedral => f.write_str("operation needs a polyhedral surrogate"),
            ModelError::UnknownFeature(x) => write!(f, "feature `{x}` has no hypothesis value"),
            ModelError::NegativeWeight { feature } => {
                write!(f, "feature `{feature}` has a negative weight")
            }
            ModelError::WeightsNotNormalized { sum } => {
                write!(f, "feature weights sum to {}, not 1", format_rational(sum))
            }
            ModelError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ModelError {}

impl From<PolyError> for ModelError {
    fn from(e: PolyError) -> Self {
        ModelError::Geometry(e)
    }
}

fn check_unique(kind: &'static str, names: &[String]) -> Result<(), ModelError> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(ModelError::DuplicateName {
                kind,
                name: n.clone(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new(labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() < 2 {
            return Err(ModelError::TooFewLabels(labels.len()));
        }
        check_unique("label", &labels)?;
        Ok(LabelSet { labels })
    }

    pub fn names(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }
}

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution {
    probs: Point,
}

impl Distribution {
    pub fn new(probs: Point) -> Result<Self, ModelError> {
        for (index, value) in probs.iter().enumerate() {
            if value.is_negative() {
                return Err(ModelError::NegativeProbability {
                    index,
                    value: value.clone(),
                });
            }
        }
        let sum: Rational = probs.iter().sum();
        if !sum.is_one() {
            return Err(ModelError::NotOnSimplex { sum });
        }
        Ok(Distribution { probs })
    }

    pub fn point_mass(n: usize, y: usize) -> Self {
        let mut probs = vec![Rational::zero(); n];
        probs[y] = Rational::one();
        Distribution { probs }
    }

    pub fn uniform(n: usize) -> Self {
        let w = Rational::new(1.into(), (n as i64).into());
        Distribution {
            probs: vec![w; n],
        }
    }

    /// `β·a + (1 − β)·b` for `β ∈ [0, 1]`.
    pub fn mix(a: &Distribution, b: &Distribution, beta: &Rational) -> Self {
        let rest = Rational::one() - beta;
        Distribution {
            probs: a
                .probs
                .iter()
                .zip(&b.probs)
                .map(|(x, y)| beta * x + &rest * y)
                .collect(),
        }
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Labels with positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
            .map(|(y, _)| y)
    }
}

/// `ℓ(r)_y ≥ 0` over finitely many reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteLoss {
    reports: Vec<String>,
    matrix: Vec<Vec<Rational>>,
}

impl DiscreteLoss {
    pub fn new(
        labels: &LabelSet,
        reports: Vec<String>,
        matrix: Vec<Vec<Rational>>,
    ) -> Result<Self, ModelError> {
        check_unique("report", &reports)?;
        if reports.is_empty() {
            return Err(ModelError::NoReports);
        }
        if matrix.len() != reports.len() {
            return Err(ModelError::LengthMismatch {
                what: String::from("target loss rows"),
                expected: reports.len(),
                found: matrix.len(),
            });
        }
        for (r, row) in matrix.iter().enumerate() {
            if row.len() != labels.len() {
                return Err(ModelError::LengthMismatch {
                    what: alloc::format!("target loss row `{}`", reports[r]),
                    expected: labels.len(),
                    found: row.len(),
                });
            }
            for (y, v) in row.iter().enumerate() {
                if v.is_negative() {
                    return Err(ModelError::NegativeLoss {
                        report: reports[r].clone(),
                        label: labels.names()[y].clone(),
                        value: v.clone(),
                    });
                }
            }
        }
        Ok(DiscreteLoss { reports, matrix })
    }

    pub fn reports(&self) -> &[String] {
        &self.reports
    }

    pub fn report_index(&self, name: &str) -> Option<usize> {
        self.reports.iter().position(|r| r == name)
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.matrix[r]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    /// `⟨p, ℓ(r)⟩`.
    pub fn expected(&self, r: usize, p: &Distribution) -> Rational {
        dot(&self.matrix[r], p.probs())
    }

    /// `k·ℓ` for `k > 0`.
    pub fn scaled(&self, k: &Rational) -> Self {
        DiscreteLoss {
            reports: self.reports.clone(),
            matrix: self
                .matrix
                .iter()
                .map(|row| row.iter().map(|x| x * k).collect())
                .collect(),
        }
    }
}

/// `L(u)_y = max_j (a_{y,j}·u + c_{y,j})`, certified nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyhedralLoss {
    dim: usize,
    per_label: Vec<MaxAffine>,
}

impl PolyhedralLoss {
    pub fn new(
        labels: &LabelSet,
        dim: usize,
        pieces: Vec<Vec<AffinePiece>>,
    ) -> Result<Self, ModelError> {
        if pieces.len() != labels.len() {
            return Err(ModelError::LengthMismatch {
                what: String::from("surrogate pieces per label"),
                expected: labels.len(),
                found: pieces.len(),
            });
        }
        let mut per_label = Vec::with_capacity(pieces.len());
        for (y, ps) in pieces.into_iter().enumerate() {
            let label = labels.names()[y].clone();
            if ps.is_empty() {
                return Err(ModelError::NoPieces { label });
            }
            for p in &ps {
                if p.w.len() != dim {
                    return Err(ModelError::LengthMismatch {
                        what: alloc::format!("surrogate piece for label `{label}`"),
                        expected: dim,
                        found: p.w.len(),
                    });
                }
            }
            let f = MaxAffine::new(dim, ps);
            match minimum_of(&f)? {
                Some(m) if !m.is_negative() => {}
                minimum => return Err(ModelError::NegativeSurrogate { label, minimum }),
            }
            per_label.push(f);
        }
        Ok(PolyhedralLoss { dim, per_label })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_labels(&self) -> usize {
        self.per_label.len()
    }

    pub fn label(&self, y: usize) -> &MaxAffine {
        &self.per_label[y]
    }

    pub fn labels(&self) -> &[MaxAffine] {
        &self.per_label
    }

    /// The loss vector `L(u)`.
    pub fn eval(&self, u: &[Rational]) -> Point {
        self.per_label.iter().map(|f| f.eval(u)).collect()
    }
}

/// `min_u max_j (a_j·u + c_j)` via its epigraph; `None` when unbounded.
fn minimum_of(f: &MaxAffine) -> Result<Option<Rational>, ModelError> {
    let d = f.dim;
    let mut obj = vec![Rational::zero(); d + 1];
    obj[d] = Rational::one();
    let mut lp = LinearProgram::new(obj);
    for p in &f.pieces {
        let mut a = p.w.clone();
        a.push(-Rational::one());
        lp = lp.le(a, -p.z.clone());
    }
    match solve_lp(&lp).map_err(PolyError::from)? {
        LpOutcome::Optimal { value, .. } => Ok(Some(value)),
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkCell {
    pub region: Polyhedron,
    pub report: String,
}

/// `ψ(u)` is the report of the first cell containing `u`, else the fallback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyhedralLink {
    cells: Vec<LinkCell>,
    fallback: String,
}

/// A closed polyhedron on whose relative interior (relative to the
/// decomposition) the link takes a single value. The pieces of one link
/// jointly cover every point whose link value is `report`, and their union
/// over all reports is the whole space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkPiece {
    pub region: Polyhedron,
    pub report: String,
    /// Index of the originating cell; `None` for the fallback.
    pub cell: Option<usize>,
    /// A point where the link really takes the value `report`, strictly
    /// inside every exit halfspace.
    pub inner: Point,
}

impl PolyhedralLink {
    pub fn new(dim: usize, cells: Vec<LinkCell>, fallback: String) -> Result<Self, ModelError> {
        for (index, c) in cells.iter().enumerate() {
            if c.region.dim != dim {
                return Err(ModelError::LengthMismatch {
                    what: alloc::format!("link cell {index}"),
                    expected: dim,
                    found: c.region.dim,
                });
            }
            if c.region.is_empty()? {
                return Err(ModelError::EmptyLinkCell { index });
            }
        }
        Ok(PolyhedralLink { cells, fallback })
    }

    pub fn cells(&self) -> &[LinkCell] {
        &self.cells
    }

    pub fn fallback(&self) -> &str {
        &self.fallback
    }

    /// First matching cell wins.
    pub fn eval(&self, u: &[Rational]) -> &str {
        self.cells
            .iter()
            .find(|c| c.region.contains_point(u))
            .map_or(self.fallback.as_str(), |c| c.report.as_str())
    }

    /// Every report name mentioned by the link.
    pub fn reports(&self) -> impl Iterator<Item = &str> {
        self.cells
            .iter()
            .map(|c| c.report.as_str())
            .chain(core::iter::once(self.fallback.as_str()))
    }

    /// Same cells with each report replaced by `rename(report)`.
    pub fn map_reports(&self, mut rename: impl FnMut(&str) -> String) -> Self {
        PolyhedralLink {
            cells: self
                .cells
                .iter()
                .map(|c| LinkCell {
                    region: c.region.clone(),
                    report: rename(&c.report),
                })
                .collect(),
            fallback: rename(&self.fallback),
        }
    }

    /// Closed polyhedral pieces of the effective link regions.
    ///
    /// The points linked through cell `i` are `C_i` minus the earlier cells.
    /// Leaving a polyhedron means violating one of its constraints, so the
    /// region splits into `C_i ∩ {one violated halfspace per earlier cell}`.
    /// Each choice is kept only when the strict version is nonempty, in
    /// which case its closure is `C_i` intersected with the closed
    /// halfspaces. `dim` is needed for links without cells.
    pub fn pieces(&self, dim: usize) -> Result<Vec<LinkPiece>, ModelError> {
        let mut out = Vec::new();
        for i in 0..=self.cells.len() {
            let (base, report, cell) = match self.cells.get(i) {
                Some(c) => (c.region.clone(), c.report.clone(), Some(i)),
                None => (Polyhedron::new(dim), self.fallback.clone(), None),
            };
            // partial choices: closed region plus the strict halfspaces chosen
            let mut partial: Vec<(Polyhedron, Vec<Constraint>)> = vec![(base, Vec::new())];
            for earlier in &self.cells[..i.min(self.cells.len())] {
                let exits = exit_halfspaces(&earlier.region);
                let mut next = Vec::new();
                for (closed, strict) in &partial {
                    for h in &exits {
                        let mut strict2 = strict.clone();
                        strict2.push(h.clone());
                        if point_with_strict(closed, &strict2)?.is_some() {
                            let mut closed2 = closed.clone();
                            closed2.ineqs.push(h.clone());
                            next.push((closed2, strict2));
                        }
                    }
                }
                partial = next;
            }
            for (closed, strict) in partial {
                let Some(inner) = point_with_strict(&closed, &strict)? else {
                    continue;
                };
                out.push(LinkPiece {
                    region: closed.remove_redundant()?,
                    report: report.clone(),
                    cell,
                    inner,
                });
            }
        }
        Ok(out)
    }
}

/// Halfspaces `a·x ≥ b` (stored as `−a·x ≤ −b`) whose strict versions
/// together make up the complement of `p`.
fn exit_halfspaces(p: &Polyhedron) -> Vec<Constraint> {
    let mut out: Vec<Constraint> = p
        .ineqs
        .iter()
        .map(|c| Constraint::new(c.a.iter().map(|x| -x).collect(), -c.b.clone()))
        .collect();
    for e in &p.eqs {
        out.push(Constraint::new(e.a.iter().map(|x| -x).collect(), -e.b.clone()));
        out.push(e.clone());
    }
    out
}

/// A point of `closed` satisfying every `strict` row with strict
/// inequality, if one exists.
fn point_with_strict(closed: &Polyhedron, strict: &[Constraint]) -> Result<Option<Point>, ModelError> {
    let n = closed.dim;
    let mut obj = vec![Rational::zero(); n + 1];
    obj[n] = Rational::one();
    let mut lp = LinearProgram::new(obj.clone()).le(obj, Rational::one());
    for c in closed.inequality_rows() {
        let mut a = c.a;
        a.push(Rational::zero());
        lp = lp.le(a, c.b);
    }
    for c in strict {
        let mut a = c.a.clone();
        a.push(Rational::one());
        lp = lp.le(a, c.b.clone());
    }
    if n == 0 {
        return Ok(None);
    }
    Ok(match crate::lp::maximize(&lp).map_err(PolyError::from)? {
        LpOutcome::Optimal { value, mut point } if value.is_positive() => {
            point.truncate(n);
            Some(point)
        }
        _ => None,
    })
}

/// Moduli of a smooth surrogate near a reference report.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothModuli {
    /// Strong convexity modulus on the neighborhood.
    pub alpha: f64,
    /// Gradient Lipschitz constant on the compact set used by the envelope.
    pub beta: Option<f64>,
    pub delta: f64,
    pub center: Vec<f64>,
}

/// A differentiable surrogate given by callbacks.
pub trait SmoothLoss: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn num_labels(&self) -> usize;
    fn value(&self, u: &[f64], y: usize) -> f64;
    fn gradient(&self, u: &[f64], y: usize) -> Vec<f64>;
    fn moduli(&self) -> Option<SmoothModuli> {
        None
    }
}

#[derive(Clone)]
pub enum Surrogate {
    Polyhedral(PolyhedralLoss),
    Smooth(Arc<dyn SmoothLoss>),
}

impl fmt::Debug for Surrogate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surrogate::Polyhedral(l) => f.debug_tuple("Polyhedral").field(l).finish(),
            Surrogate::Smooth(s) => f.debug_tuple("Smooth").field(&s.name()).finish(),
        }
    }
}

impl Surrogate {
    pub fn dim(&self) -> usize {
        match self {
            Surrogate::Polyhedral(l) => l.dim(),
            Surrogate::Smooth(s) => s.dim(),
        }
    }
}

/// The triple of target loss, surrogate, and link.
#[derive(Debug, Clone)]
pub struct Problem {
    pub labels: LabelSet,
    pub target: DiscreteLoss,
    pub surrogate: Surrogate,
    pub link: PolyhedralLink,
}

impl Problem {
    pub fn new(
        labels: LabelSet,
        target: DiscreteLoss,
        surrogate: Surrogate,
        link: PolyhedralLink,
    ) -> Result<Self, ModelError> {
        let n = labels.len();
        let surrogate_labels = match &surrogate {
            Surrogate::Polyhedral(l) => l.num_labels(),
            Surrogate::Smooth(s) => s.num_labels(),
        };
        if surrogate_labels != n {
            return Err(ModelError::LengthMismatch {
                what: String::from("surrogate labels"),
                expected: n,
                found: surrogate_labels,
            });
        }
        for (i, c) in link.cells().iter().enumerate() {
            if target.report_index(&c.report).is_none() {
                return Err(ModelError::UnknownReport {
                    name: c.report.clone(),
                    context: alloc::format!("link cell {i}"),
                });
            }
            if c.region.dim != surrogate.dim() {
                return Err(ModelError::LengthMismatch {
                    what: alloc::format!("link cell {i}"),
                    expected: surrogate.dim(),
                    found: c.region.dim,
                });
            }
        }
        if target.report_index(link.fallback()).is_none() {
            return Err(ModelError::UnknownReport {
                name: String::from(link.fallback()),
                context: String::from("link fallback"),
            });
        }
        Ok(Problem {
            labels,
            target,
            surrogate,
            link,
        })
    }

    pub fn polyhedral(&self) -> Result<&PolyhedralLoss, ModelError> {
        match &self.surrogate {
            Surrogate::Polyhedral(l) => Ok(l),
            Surrogate::Smooth(_) => Err(ModelError::NotPolyhedral),
        }
    }

    pub fn dim(&self) -> usize {
        self.surrogate.dim()
    }

    /// Index of `ψ(u)` among the target reports.
    pub fn link_report(&self, u: &[Rational]) -> usize {
        self.report_index(self.link.eval(u))
    }

    /// Index of a report name already validated against the target.
    pub fn report_index(&self, name: &str) -> usize {
        self.target
            .report_index(name)
            .expect("link reports are validated at construction")
    }

    pub fn with_target(&self, target: DiscreteLoss) -> Self {
        Problem {
            target,
            ..self.clone()
        }
    }

    pub fn with_link(&self, link: PolyhedralLink) -> Result<Self, ModelError> {
        Problem::new(
            self.labels.clone(),
            self.target.clone(),
            self.surrogate.clone(),
            link,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPoint {
    pub feature: String,
    pub weight: Rational,
    pub conditional: Distribution,
}

/// A distribution over finitely many features, each with its conditional
/// label distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDataDistribution {
    points: Vec<DataPoint>,
}

impl FiniteDataDistribution {
    pub fn new(points: Vec<DataPoint>) -> Result<Self, ModelError> {
        let mut sum = Rational::zero();
        for p in &points {
            if p.weight.is_negative() {
                return Err(ModelError::NegativeWeight {
                    feature: p.feature.clone(),
                });
            }
            sum += &p.weight;
        }
        if !sum.is_one() {
            return Err(ModelError::WeightsNotNormalized { sum });
        }
        let names: Vec<String> = points.iter().map(|p| p.feature.clone()).collect();
        check_unique("feature", &names)?;
        Ok(FiniteDataDistribution { points })
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }
}

/// A hypothesis given by a lookup table from feature to surrogate report.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TabularHypothesis {
    pub map: BTreeMap<String, Point>,
}

impl TabularHypothesis {
    pub fn get(&self, feature: &str) -> Result<&Point, ModelError> {
        self.map
            .get(feature)
            .ok_or_else(|| ModelError::UnknownFeature(String::from(feature)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, int_point, ratio};
    use alloc::string::ToString;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn sign_link() -> PolyhedralLink {
        PolyhedralLink::new(
            1,
            vec![
                LinkCell {
                    region: Polyhedron::new(1).le(int_point(&[-1]), int(0)),
                    report: "+1".to_string(),
                },
                LinkCell {
                    region: Polyhedron::new(1).le(int_point(&[1]), int(0)),
                    report: "-1".to_string(),
                },
            ],
            "+1".to_string(),
        )
        .unwrap()
    }

    #[test]
    fn distributions_are_validated() {
        assert!(Distribution::new(vec![ratio(1, 3), ratio(2, 3)]).is_ok());
        assert!(matches!(
            Distribution::new(vec![ratio(1, 3), ratio(1, 3), ratio(1, 2)]),
            Err(ModelError::NotOnSimplex { .. })
        ));
        assert!(matches!(
            Distribution::new(vec![int(2), int(-1)]),
            Err(ModelError::NegativeProbability { index: 1, .. })
        ));
    }

    #[test]
    fn negative_losses_are_rejected() {
        let labels = LabelSet::new(names(&["a", "b"])).unwrap();
        let err = DiscreteLoss::new(
            &labels,
            names(&["r"]),
            vec![vec![ratio(-1, 2), int(0)]],
        );
        assert!(matches!(err, Err(ModelError::NegativeLoss { .. })));
        let linear = PolyhedralLoss::new(
            &labels,
            1,
            vec![
                vec![AffinePiece::new(int_point(&[1]), int(0))],
                vec![AffinePiece::new(int_point(&[0]), int(0))],
            ],
        );
        assert_eq!(
            linear,
            Err(ModelError::NegativeSurrogate {
                label: "a".to_string(),
                minimum: None
            })
        );
        let dips = PolyhedralLoss::new(
            &labels,
            1,
            vec![
                vec![AffinePiece::new(int_point(&[0]), int(-1))],
                vec![AffinePiece::new(int_point(&[0]), int(0))],
            ],
        );
        assert!(matches!(dips, Err(ModelError::NegativeSurrogate { minimum: Some(_), .. })));
    }

    #[test]
    fn sign_link_breaks_ties_by_order() {
        let link = sign_link();
        assert_eq!(link.eval(&int_point(&[-3])), "-1");
        assert_eq!(link.eval(&int_point(&[0])), "+1");
        assert_eq!(link.eval(&int_point(&[5])), "+1");
    }

    #[test]
    fn link_pieces_cover_effective_regions() {
        let pieces = sign_link().pieces(1).unwrap();
        // [0,∞) for +1, (−∞,0] closure for −1, fallback is empty
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].report, "+1");
        assert_eq!(pieces[1].report, "-1");
        assert!(pieces[1].region.contains_point(&int_point(&[0])));
        assert!(pieces[1].region.contains_point(&int_point(&[-4])));
        assert!(!pieces[1].region.contains_point(&int_point(&[1])));
        assert!(pieces.iter().all(|p| p.cell.is_some()));
    }

    #[test]
    fn fallback_piece_is_the_complement() {
        let link = PolyhedralLink::new(
            1,
            vec![LinkCell {
                region: Polyhedron::cube(1, &int(-1), &int(1)),
                report: "in".to_string(),
            }],
            "out".to_string(),
        )
        .unwrap();
        let pieces = link.pieces(1).unwrap();
        let outside: Vec<_> = pieces.iter().filter(|p| p.cell.is_none()).collect();
        assert_eq!(outside.len(), 2);
        assert!(outside.iter().any(|p| p.region.contains_point(&int_point(&[3]))));
        assert!(outside.iter().any(|p| p.region.contains_point(&int_point(&[-3]))));
    }

    #[test]
    fn data_distribution_weights() {
        let p = Distribution::uniform(2);
        let pt = |f: &str, w| DataPoint {
            feature: f.to_string(),
            weight: w,
            conditional: p.clone(),
        };
        assert!(FiniteDataDistribution::new(vec![pt("x", ratio(1, 2)), pt("y", ratio(1, 2))]).is_ok());
        assert!(FiniteDataDistribution::new(vec![pt("x", ratio(1, 2))]).is_err());
    }
}
