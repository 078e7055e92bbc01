//! Randomized exact checks of the regret-transfer inequalities.
//!
//! Every sample is drawn from its own ChaCha stream keyed by
//! `(seed, index)`, so any index range can be evaluated independently and
//! the merged report does not depend on how the range was split.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::TransferCertificate;
use crate::elicitation::{
    bayes_risk_value, check_refinement, expected_loss, min_expected_loss_on, regret_target,
    ElicitationError, LevelSetAtlas,
};
use crate::model::{
    DataPoint, Distribution, FiniteDataDistribution, LinkPiece, ModelError, Problem, TabularHypothesis,
};
use crate::rational::{add, linf_norm, scale, sub, Point, Rational};

/// Violations kept per report; the count is always exact.
pub const MAX_RECORDED_VIOLATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifierError {
    Model(ModelError),
    Elicitation(ElicitationError),
    NegativeAlpha,
    /// A feature of the data has no hypothesis value, or the reverse.
    FeatureMismatch(String),
}

impl fmt::Display for VerifierError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifierError::Model(e) => write!(f, "{e}"),
            VerifierError::Elicitation(e) => write!(f, "{e}"),
            VerifierError::NegativeAlpha => write!(f, "alpha must be nonnegative"),
            VerifierError::FeatureMismatch(x) => {
                write!(f, "feature {x:?} is not shared by the data and the hypothesis")
            }
        }
    }
}

impl core::error::Error for VerifierError {}

impl From<ModelError> for VerifierError {
    fn from(e: ModelError) -> Self {
        VerifierError::Model(e)
    }
}

impl From<ElicitationError> for VerifierError {
    fn from(e: ElicitationError) -> Self {
        VerifierError::Elicitation(e)
    }
}

/// A failed check. For transfer checks `lhs > rhs`; for identity checks
/// `lhs ≠ rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: u64,
    pub p: Vec<Distribution>,
    pub u: Vec<Point>,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub seed: u64,
    pub samples: u64,
    pub violation_count: u64,
    /// The violations with the smallest indices.
    pub violations: Vec<Violation>,
    /// Largest `lhs / R_L` among samples with positive surrogate regret.
    pub max_ratio: Option<Rational>,
}

impl VerificationReport {
    pub fn empty(seed: u64) -> Self {
        VerificationReport {
            seed,
            samples: 0,
            violation_count: 0,
            violations: Vec::new(),
            max_ratio: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    /// Associative and commutative, so chunked evaluation is deterministic.
    pub fn merge(mut self, other: VerificationReport) -> Self {
        self.samples += other.samples;
        self.violation_count += other.violation_count;
        self.violations.extend(other.violations);
        self.violations.sort_by_key(|v| v.index);
        self.violations.truncate(MAX_RECORDED_VIOLATIONS);
        self.max_ratio = match (self.max_ratio, other.max_ratio) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self
    }

    fn record(&mut self, v: Violation) {
        self.violation_count += 1;
        if self.violations.len() < MAX_RECORDED_VIOLATIONS {
            self.violations.push(v);
        }
    }

    fn observe_ratio(&mut self, r: Rational) {
        if self.max_ratio.as_ref().is_none_or(|m| &r > m) {
            self.max_ratio = Some(r);
        }
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn frac(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// A random rational point of the simplex; some draws land on faces.
fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Distribution {
    let sparse = rng.gen_bool(0.25);
    loop {
        let w: Vec<i64> = (0..n)
            .map(|_| {
                if sparse && rng.gen_bool(0.5) {
                    0
                } else {
                    rng.gen_range(0..=64)
                }
            })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            let probs = w.iter().map(|&x| frac(x, total)).collect();
            return Distribution::new(probs).expect("normalized weights");
        }
    }
}

fn random_rational(rng: &mut ChaCha8Rng, radius: i64) -> Rational {
    const DENOMINATORS: [i64; 6] = [1, 2, 3, 7, 16, 1000];
    let den = DENOMINATORS[rng.gen_range(0..DENOMINATORS.len())];
    frac(rng.gen_range(-radius * den..=radius * den), den)
}

fn convex_combination(rng: &mut ChaCha8Rng, points: &[Distribution]) -> Distribution {
    let w: Vec<i64> = points.iter().map(|_| rng.gen_range(1..=16)).collect();
    let total: i64 = w.iter().sum();
    let mut x = vec![Rational::zero(); points[0].len()];
    for (p, &wi) in points.iter().zip(&w) {
        x = add(&x, &scale(p.probs(), &frac(wi, total)));
    }
    Distribution::new(x).expect("convex combination of distributions")
}

/// Deterministic source of `(p, u)` pairs stratified over the simplex and
/// the link pieces.
pub struct Sampler<'a> {
    problem: &'a Problem,
    atlas: &'a LevelSetAtlas,
    pieces: Vec<LinkPiece>,
    /// Closest points of each link piece to the optimal sets at the atlas
    /// vertices, with the vertex used.
    boundary: Vec<(usize, Distribution, Point)>,
    injected: Vec<(Distribution, Point)>,
    radius: i64,
    seed: u64,
}

impl<'a> Sampler<'a> {
    /// Certificate witnesses, when given, are the first samples.
    pub fn new(
        problem: &'a Problem,
        atlas: &'a LevelSetAtlas,
        certificate: Option<&TransferCertificate>,
        seed: u64,
    ) -> Result<Self, VerifierError> {
        let loss = problem.polyhedral()?;
        let pieces = problem.link.pieces(problem.dim())?;
        let mut boundary = Vec::new();
        for (i, piece) in pieces.iter().enumerate() {
            for q in &atlas.vertex_pool {
                if let Some((_, u)) = min_expected_loss_on(loss, q, &piece.region)? {
                    boundary.push((i, q.clone(), u));
                }
            }
        }
        let mut injected = Vec::new();
        if let Some(cert) = certificate {
            for v in &cert.per_vertex {
                if let Some(inside) = v.alpha.witness.as_ref().and_then(|w| w.inside.clone()) {
                    injected.push((v.q.clone(), inside));
                }
            }
        }
        let largest = atlas
            .representatives
            .iter()
            .chain(pieces.iter().map(|p| &p.inner))
            .map(|u| linf_norm(u).ceil().to_integer())
            .max()
            .unwrap_or_default();
        let radius = 2 * (1 + i64::try_from(largest).unwrap_or(i64::MAX / 4096).min(1 << 20));
        Ok(Sampler {
            problem,
            atlas,
            pieces,
            boundary,
            injected,
            radius,
            seed,
        })
    }

    pub fn injected(&self) -> usize {
        self.injected.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self, rng: &mut ChaCha8Rng) -> Distribution {
        let atlas = self.atlas;
        let n = self.problem.labels.len();
        match rng.gen_range(0..4) {
            0 => random_simplex_point(rng, n),
            1 => atlas.vertex_pool[rng.gen_range(0..atlas.vertex_pool.len())].clone(),
            2 => {
                let verts = &atlas.level_set_vertices[rng.gen_range(0..atlas.level_set_vertices.len())];
                let a = &verts[rng.gen_range(0..verts.len())];
                let b = &verts[rng.gen_range(0..verts.len())];
                Distribution::mix(a, b, &frac(1, 2))
            }
            _ => {
                let verts = &atlas.level_set_vertices[rng.gen_range(0..atlas.level_set_vertices.len())];
                convex_combination(rng, verts)
            }
        }
    }

    fn offset(&self, rng: &mut ChaCha8Rng, magnitude: &Rational) -> Point {
        (0..self.problem.dim())
            .map(|_| magnitude * Rational::from_integer(rng.gen_range(-1..=1).into()))
            .collect()
    }

    /// A surrogate report for `p`: uniform in a box, near `Γ(p)`, inside a
    /// random link piece, or within `10⁻³` of a link piece's boundary.
    pub fn report(&self, rng: &mut ChaCha8Rng, p: &Distribution) -> Point {
        let d = self.problem.dim();
        match rng.gen_range(0..4) {
            0 => (0..d).map(|_| random_rational(rng, self.radius)).collect(),
            1 => {
                let center = &self.atlas.representatives[self.atlas.best(p)];
                let scales = [frac(1, 1_000_000), frac(1, 1000), frac(1, 10), Rational::one()];
                let m = &scales[rng.gen_range(0..scales.len())] * frac(rng.gen_range(1..=10), 1);
                add(center, &self.offset(rng, &m))
            }
            2 => {
                let piece = &self.pieces[rng.gen_range(0..self.pieces.len())];
                let m = frac(rng.gen_range(0..=100), 100);
                add(&piece.inner, &self.offset(rng, &m))
            }
            _ => self.near_boundary(rng).1,
        }
    }

    fn near_boundary(&self, rng: &mut ChaCha8Rng) -> (Distribution, Point) {
        let (i, q, b) = &self.boundary[rng.gen_range(0..self.boundary.len())];
        let dir = sub(&self.pieces[*i].inner, b);
        let norm = linf_norm(&dir);
        let t = frac(rng.gen_range(0..=1000), 1_000_000);
        let u = if norm.is_zero() {
            b.clone()
        } else {
            add(b, &scale(&dir, &(t / norm)))
        };
        (q.clone(), u)
    }

    /// The `index`-th pair of the stream.
    pub fn pair(&self, index: u64) -> (Distribution, Point) {
        if let Some(pair) = usize::try_from(index).ok().and_then(|i| self.injected.get(i)) {
            return pair.clone();
        }
        let mut rng = stream(self.seed, index);
        if !self.boundary.is_empty() && rng.gen_bool(0.125) {
            // the vertex that produced the boundary point
            return self.near_boundary(&mut rng);
        }
        let p = self.distribution(&mut rng);
        let u = self.report(&mut rng, &p);
        (p, u)
    }
}

/// `R_ℓ(ψ(u), p)` and `R_L(u, p)`, with the surrogate risk read off the
/// certified atlas.
fn regrets(problem: &Problem, atlas: &LevelSetAtlas, u: &[Rational], p: &Distribution) -> Result<(Rational, Rational), VerifierError> {
    let loss = problem.polyhedral()?;
    let target = regret_target(&problem.target, problem.link_report(u), p);
    let surrogate = expected_loss(loss, p, u) - atlas.risk(p);
    Ok((target, surrogate))
}

/// Checks `R_ℓ(ψ(u), p) ≤ α·R_L(u, p)` on samples `range` of the stream.
pub fn check_range(sampler: &Sampler<'_>, alpha: &Rational, range: Range<u64>) -> Result<VerificationReport, VerifierError> {
    if alpha.is_negative() {
        return Err(VerifierError::NegativeAlpha);
    }
    let mut report = VerificationReport::empty(sampler.seed);
    for index in range {
        let (p, u) = sampler.pair(index);
        let (lhs, r_l) = regrets(sampler.problem, sampler.atlas, &u, &p)?;
        let rhs = alpha * &r_l;
        report.samples += 1;
        if r_l.is_positive() {
            report.observe_ratio(&lhs / &r_l);
        }
        if lhs > rhs {
            report.record(Violation {
                index,
                p: vec![p],
                u: vec![u],
                lhs,
                rhs,
            });
        }
    }
    Ok(report)
}

/// Conditional transfer check on `n` stratified samples.
pub fn verify_conditional(
    problem: &Problem,
    atlas: &LevelSetAtlas,
    certificate: Option<&TransferCertificate>,
    alpha: &Rational,
    n: u64,
    seed: u64,
) -> Result<VerificationReport, VerifierError> {
    let sampler = Sampler::new(problem, atlas, certificate, seed)?;
    check_range(&sampler, alpha, 0..n)
}

/// Both sides of the distributional transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionalCheck {
    /// `R_ℓ(ψ∘h; 𝒟)`.
    pub target_regret: Rational,
    /// `R_L(h; 𝒟)`.
    pub surrogate_regret: Rational,
    /// `Σ_x w_x·α·R_L(h(x), p_x)`.
    pub pointwise_bound: Rational,
    pub alpha: Rational,
}

impl DistributionalCheck {
    /// The transfer inequality and the linearity step behind it.
    pub fn holds(&self) -> bool {
        self.target_regret <= &self.alpha * &self.surrogate_regret
            && self.pointwise_bound == &self.alpha * &self.surrogate_regret
    }
}

/// Exact regrets of a tabular hypothesis under finite data. The surrogate
/// risk comes from a fresh linear program at every `p_x`.
pub fn verify_distributional(
    problem: &Problem,
    alpha: &Rational,
    data: &FiniteDataDistribution,
    h: &TabularHypothesis,
) -> Result<DistributionalCheck, VerifierError> {
    if alpha.is_negative() {
        return Err(VerifierError::NegativeAlpha);
    }
    let loss = problem.polyhedral()?;
    for x in h.map.keys() {
        if !data.points().iter().any(|pt| &pt.feature == x) {
            return Err(VerifierError::FeatureMismatch(x.clone()));
        }
    }
    let mut check = DistributionalCheck {
        target_regret: Rational::zero(),
        surrogate_regret: Rational::zero(),
        pointwise_bound: Rational::zero(),
        alpha: alpha.clone(),
    };
    for pt in data.points() {
        let u = h
            .map
            .get(&pt.feature)
            .ok_or_else(|| VerifierError::FeatureMismatch(pt.feature.clone()))?;
        let p = &pt.conditional;
        let (risk, _) = bayes_risk_value(loss, p)?;
        let r_l = expected_loss(loss, p, u) - risk;
        let r_t = regret_target(&problem.target, problem.link_report(u), p);
        check.target_regret += &pt.weight * r_t;
        check.pointwise_bound += &pt.weight * alpha * &r_l;
        check.surrogate_regret += &pt.weight * r_l;
    }
    Ok(check)
}

/// A random finite data distribution with one to five features and a
/// tabular hypothesis drawn from the stratified sampler.
pub fn random_batch(sampler: &Sampler<'_>, index: u64) -> (FiniteDataDistribution, TabularHypothesis) {
    let mut rng = stream(sampler.seed ^ 0x6261_7463_6800_0000, index);
    let k = rng.gen_range(1..=5);
    let w: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = w.iter().sum();
    let mut points = Vec::new();
    let mut map = BTreeMap::new();
    for (j, &wj) in w.iter().enumerate() {
        let feature = alloc::format!("x{j}");
        let p = sampler.distribution(&mut rng);
        let u = sampler.report(&mut rng, &p);
        points.push(DataPoint {
            feature: feature.clone(),
            weight: frac(wj, total),
            conditional: p,
        });
        map.insert(feature, u);
    }
    let data = FiniteDataDistribution::new(points).expect("weights are positive and normalized");
    (data, TabularHypothesis { map })
}

/// Distributional checks on `n` random batches; each failing batch is one
/// violation with `lhs = R_ℓ(ψ∘h; 𝒟)` and `rhs = α·R_L(h; 𝒟)`.
pub fn verify_distributional_batches(
    sampler: &Sampler<'_>,
    alpha: &Rational,
    range: Range<u64>,
) -> Result<VerificationReport, VerifierError> {
    let mut report = VerificationReport::empty(sampler.seed);
    for index in range {
        let (data, h) = random_batch(sampler, index);
        let check = verify_distributional(sampler.problem, alpha, &data, &h)?;
        report.samples += 1;
        if check.surrogate_regret.is_positive() {
            report.observe_ratio(&check.target_regret / &check.surrogate_regret);
        }
        if !check.holds() {
            report.record(Violation {
                index,
                p: data.points().iter().map(|pt| pt.conditional.clone()).collect(),
                u: data.points().iter().map(|pt| h.map[&pt.feature].clone()).collect(),
                lhs: check.target_regret,
                rhs: alpha * &check.surrogate_regret,
            });
        }
    }
    Ok(report)
}

/// Exact linearity of both regrets along segments inside a level set.
///
/// Each tuple draws a representative `u*`, two vertices of `Γ_{u*}`, a
/// weight `β`, a report `u`, and a target report `r`, and compares
/// `R(βq₁ + (1−β)q₂)` with `βR(q₁) + (1−β)R(q₂)`. Surrogate risks come from
/// linear programs, not from the atlas. The target identity is checked only
/// when refinement holds, and the two regrets are reported as separate
/// violations with `lhs ≠ rhs`.
pub fn verify_linearity(
    atlas: &LevelSetAtlas,
    problem: &Problem,
    n: u64,
    seed: u64,
) -> Result<VerificationReport, VerifierError> {
    let loss = problem.polyhedral()?;
    let refines = check_refinement(atlas, &problem.target, &problem.link)?.holds();
    let sampler = Sampler::new(problem, atlas, None, seed)?;
    let num_reports = problem.target.reports().len();
    let surrogate = |u: &[Rational], p: &Distribution| -> Result<Rational, VerifierError> {
        let (risk, _) = bayes_risk_value(loss, p)?;
        Ok(expected_loss(loss, p, u) - risk)
    };
    let mut report = VerificationReport::empty(seed);
    for index in 0..n {
        let mut rng = stream(seed, index);
        let i = rng.gen_range(0..atlas.representatives.len());
        let verts = &atlas.level_set_vertices[i];
        let q1 = &verts[rng.gen_range(0..verts.len())];
        let q2 = &verts[rng.gen_range(0..verts.len())];
        let den = rng.gen_range(1..=12);
        let beta = frac(rng.gen_range(0..=den), den);
        let p = Distribution::mix(q1, q2, &beta);
        let u = sampler.report(&mut rng, &p);
        let r = rng.gen_range(0..num_reports);
        let rest = Rational::one() - &beta;
        report.samples += 1;

        let lhs = surrogate(&u, &p)?;
        let rhs = &beta * surrogate(&u, q1)? + &rest * surrogate(&u, q2)?;
        if lhs != rhs {
            report.record(Violation {
                index,
                p: vec![p.clone(), q1.clone(), q2.clone()],
                u: vec![u.clone()],
                lhs,
                rhs,
            });
        }
        if refines {
            let target = &problem.target;
            let lhs = regret_target(target, r, &p);
            let rhs = &beta * regret_target(target, r, q1) + &rest * regret_target(target, r, q2);
            if lhs != rhs {
                report.record(Violation {
                    index,
                    p: vec![p, q1.clone(), q2.clone()],
                    u: vec![u],
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(report)
}

/// Every sampled `p` must lie in some level set whose loss vector attains
/// the risk from a fresh linear program. Uncovered points are violations
/// with `lhs` the atlas value and `rhs` the program value.
pub fn verify_coverage(problem: &Problem, atlas: &LevelSetAtlas, n: u64, seed: u64) -> Result<VerificationReport, VerifierError> {
    let loss = problem.polyhedral()?;
    let mut report = VerificationReport::empty(seed);
    for index in 0..n {
        let mut rng = stream(seed, index);
        let p = random_simplex_point(&mut rng, loss.num_labels());
        let (risk, _) = bayes_risk_value(loss, &p)?;
        report.samples += 1;
        let containing = atlas.containing(&p);
        let exact = containing
            .iter()
            .any(|&i| crate::rational::dot(&atlas.losses[i], p.probs()) == risk);
        if !exact {
            let lhs = containing
                .first()
                .map(|&i| crate::rational::dot(&atlas.losses[i], p.probs()))
                .unwrap_or_else(|| atlas.risk(&p));
            report.record(Violation {
                index,
                p: vec![p],
                u: Vec::new(),
                lhs,
                rhs: risk,
            });
        }
    }
    Ok(report)
}
