//! Built-in problem instances with known certificate values.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::lower_bound::{geometric_grid, SweepConfig};
use crate::model::{
    DiscreteLoss, Distribution, LabelSet, LinkCell, ModelError, PolyhedralLink, PolyhedralLoss,
    Problem, SmoothLoss, SmoothModuli, Surrogate,
};
use crate::polyhedra::{AffinePiece, Polyhedron};
use crate::rational::{int, int_point, ratio, Extended, Rational};

/// Names accepted by [`builtin`].
pub const CATALOG: [&str; 6] = [
    "hinge_zero_one",
    "bep_abstain_4",
    "exp_binary",
    "logistic_binary",
    "huber_binary",
    "hinge_control_sweep",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KnownField {
    ExactAlpha,
    PaperAlpha,
    HoffmanMax,
    SeparationMin,
    CEll,
    Hoffman(Distribution),
    Separation(Distribution),
    VertexAlpha(Distribution),
    /// `C_ℓ·H_{L,q}/ε_q` at a single vertex.
    VertexBound(Distribution),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownValue {
    pub field: KnownField,
    pub value: Extended,
    pub note: &'static str,
}

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub name: &'static str,
    pub problem: Problem,
    pub known_values: Vec<KnownValue>,
    /// Expected level-set vertices, when known in closed form.
    pub vertex_pool: Option<Vec<Distribution>>,
    pub sweep: Option<SweepConfig>,
    /// Sweep used to check the analytic envelope.
    pub envelope: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZooError {
    Unknown(String),
}

impl fmt::Display for ZooError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZooError::Unknown(name) => {
                write!(f, "unknown zoo entry `{name}`; available: {}", CATALOG.join(", "))
            }
        }
    }
}

impl core::error::Error for ZooError {}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn binary_labels() -> LabelSet {
    LabelSet::new(names(&["-1", "+1"])).expect("two distinct labels")
}

fn zero_one(labels: &LabelSet) -> DiscreteLoss {
    DiscreteLoss::new(
        labels,
        names(&["-1", "+1"]),
        vec![int_point(&[0, 1]), int_point(&[1, 0])],
    )
    .expect("0-1 loss is nonnegative")
}

/// `ψ(u) = +1` for `u ≥ 0`, `−1` otherwise.
pub fn sign_link() -> PolyhedralLink {
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
    .expect("cells are nonempty")
}

/// `L(u)_y = max(1 − u·y, 0)`.
pub fn hinge_loss(labels: &LabelSet) -> PolyhedralLoss {
    let hinge = |y: i64| {
        vec![
            AffinePiece::new(int_point(&[-y]), int(1)),
            AffinePiece::new(int_point(&[0]), int(0)),
        ]
    };
    PolyhedralLoss::new(labels, 1, vec![hinge(-1), hinge(1)]).expect("hinge is nonnegative")
}

pub fn hinge_zero_one() -> Problem {
    let labels = binary_labels();
    let target = zero_one(&labels);
    let loss = hinge_loss(&labels);
    Problem::new(labels, target, Surrogate::Polyhedral(loss), sign_link())
        .expect("consistent instance")
}

/// Codewords in binary reflected order.
pub const BEP_CODES: [[i64; 2]; 4] = [[-1, -1], [-1, 1], [1, 1], [1, -1]];

pub const ABSTAIN: &str = "⊥";

pub fn bep_abstain_4() -> Problem {
    let label_names = names(&["y1", "y2", "y3", "y4"]);
    let labels = LabelSet::new(label_names.clone()).expect("distinct labels");
    let mut reports = label_names.clone();
    reports.push(ABSTAIN.to_string());
    let mut rows: Vec<Vec<Rational>> = (0..4)
        .map(|r| (0..4).map(|y| int(i64::from(r != y))).collect())
        .collect();
    rows.push(vec![ratio(1, 2); 4]);
    let target = DiscreteLoss::new(&labels, reports, rows).expect("abstain loss is nonnegative");

    // max(1 − u₁B₁, 1 − u₂B₂, 0)
    let pieces = BEP_CODES
        .iter()
        .map(|b| {
            vec![
                AffinePiece::new(int_point(&[-b[0], 0]), int(1)),
                AffinePiece::new(int_point(&[0, -b[1]]), int(1)),
                AffinePiece::new(int_point(&[0, 0]), int(0)),
            ]
        })
        .collect();
    let loss = PolyhedralLoss::new(&labels, 2, pieces).expect("BEP loss is nonnegative");

    let half = ratio(1, 2);
    let strip = |j: usize| {
        let mut e = vec![int(0); 2];
        e[j] = int(1);
        let neg = e.iter().map(|x| -x).collect();
        Polyhedron::new(2).le(e, half.clone()).le(neg, half.clone())
    };
    let mut cells = vec![
        LinkCell {
            region: strip(0),
            report: ABSTAIN.to_string(),
        },
        LinkCell {
            region: strip(1),
            report: ABSTAIN.to_string(),
        },
    ];
    // outside both strips the ℓ∞-nearest codeword is the one sharing the
    // signs of u
    for (b, name) in BEP_CODES.iter().zip(&label_names) {
        cells.push(LinkCell {
            region: Polyhedron::new(2)
                .le(int_point(&[-b[0], 0]), int(0))
                .le(int_point(&[0, -b[1]]), int(0)),
            report: name.clone(),
        });
    }
    let link = PolyhedralLink::new(2, cells, ABSTAIN.to_string()).expect("cells are nonempty");
    Problem::new(labels, target, Surrogate::Polyhedral(loss), link).expect("consistent instance")
}

/// Same problem with every link report `r_i` replaced by `r_{i+1}`
/// (cyclically, in target report order).
pub fn flip_link(problem: &Problem) -> Result<Problem, ModelError> {
    let reports = problem.target.reports().to_vec();
    let link = problem.link.map_reports(|name| {
        let i = reports.iter().position(|r| r == name).unwrap_or(0);
        reports[(i + 1) % reports.len()].clone()
    });
    problem.with_link(link)
}

/// `exp(−u·y)`.
#[derive(Debug)]
pub struct Exponential;

/// `log(1 + exp(−u·y))`.
#[derive(Debug)]
pub struct Logistic;

/// Huber-style margin loss: with `t = max(0, 1 − u·y)`, `t²` for `t ≤ 2`
/// and `4(t − 1)` beyond.
#[derive(Debug)]
pub struct Huber;

fn label_sign(y: usize) -> f64 {
    if y == 0 {
        -1.0
    } else {
        1.0
    }
}

impl SmoothLoss for Exponential {
    fn name(&self) -> &str {
        "exponential"
    }
    fn dim(&self) -> usize {
        1
    }
    fn num_labels(&self) -> usize {
        2
    }
    fn value(&self, u: &[f64], y: usize) -> f64 {
        libm::exp(-u[0] * label_sign(y))
    }
    fn gradient(&self, u: &[f64], y: usize) -> Vec<f64> {
        let s = label_sign(y);
        vec![-s * libm::exp(-u[0] * s)]
    }
    fn moduli(&self) -> Option<SmoothModuli> {
        // 1/e-strongly convex on (−1, 1)
        Some(SmoothModuli {
            alpha: libm::exp(-1.0),
            beta: None,
            delta: 1.0,
            center: vec![0.0],
        })
    }
}

impl SmoothLoss for Logistic {
    fn name(&self) -> &str {
        "logistic"
    }
    fn dim(&self) -> usize {
        1
    }
    fn num_labels(&self) -> usize {
        2
    }
    fn value(&self, u: &[f64], y: usize) -> f64 {
        let m = -u[0] * label_sign(y);
        // softplus(m) without overflow
        if m > 0.0 {
            m + libm::log1p(libm::exp(-m))
        } else {
            libm::log1p(libm::exp(m))
        }
    }
    fn gradient(&self, u: &[f64], y: usize) -> Vec<f64> {
        let s = label_sign(y);
        let m = -u[0] * s;
        let sigmoid = if m >= 0.0 {
            1.0 / (1.0 + libm::exp(-m))
        } else {
            let e = libm::exp(m);
            e / (1.0 + e)
        };
        vec![-s * sigmoid]
    }
}

impl SmoothLoss for Huber {
    fn name(&self) -> &str {
        "huber"
    }
    fn dim(&self) -> usize {
        1
    }
    fn num_labels(&self) -> usize {
        2
    }
    fn value(&self, u: &[f64], y: usize) -> f64 {
        let t = (1.0 - u[0] * label_sign(y)).max(0.0);
        if t <= 2.0 {
            t * t
        } else {
            4.0 * (t - 1.0)
        }
    }
    fn gradient(&self, u: &[f64], y: usize) -> Vec<f64> {
        let s = label_sign(y);
        let t = (1.0 - u[0] * s).max(0.0);
        let dt = if t <= 2.0 { 2.0 * t } else { 4.0 };
        vec![-s * dt]
    }
    fn moduli(&self) -> Option<SmoothModuli> {
        // expected loss is 2-strongly convex while both margins stay in [0, 2]
        Some(SmoothModuli {
            alpha: 2.0,
            beta: Some(2.0),
            delta: 1.0,
            center: vec![0.0],
        })
    }
}

/// The built-in smooth binary losses by [`SmoothLoss::name`].
pub fn smooth_loss(name: &str) -> Option<Arc<dyn SmoothLoss>> {
    match name {
        "exponential" => Some(Arc::new(Exponential)),
        "logistic" => Some(Arc::new(Logistic)),
        "huber" => Some(Arc::new(Huber)),
        _ => None,
    }
}

fn smooth_problem(loss: Arc<dyn SmoothLoss>) -> Problem {
    let labels = binary_labels();
    let target = zero_one(&labels);
    Problem::new(labels, target, Surrogate::Smooth(loss), sign_link()).expect("consistent instance")
}

fn half_half() -> Distribution {
    Distribution::uniform(2)
}

/// `p₀ = (½, ½)`, `p₁ = δ_{−1}`, `u₀ = 0`, 21 geometric steps over
/// `[10⁻³, 10⁻¹]`.
pub fn default_sweep() -> SweepConfig {
    SweepConfig {
        p0: half_half(),
        p1: Distribution::point_mass(2, 0),
        u0: vec![0.0],
        lambdas: geometric_grid(1e-1, 1e-3, 21),
        tolerance: 1e-12,
    }
}

/// Same sweep with `p₁(+1) = ¼`, keeping `p₁` off the simplex boundary
/// where the exponential loss has no minimizer.
pub fn envelope_sweep() -> SweepConfig {
    SweepConfig {
        p1: Distribution::new(vec![ratio(3, 4), ratio(1, 4)]).expect("on the simplex"),
        ..default_sweep()
    }
}

fn at_all(points: &[Distribution], field: fn(Distribution) -> KnownField, value: Extended, note: &'static str) -> Vec<KnownValue> {
    points
        .iter()
        .map(|p| KnownValue {
            field: field(p.clone()),
            value: value.clone(),
            note,
        })
        .collect()
}

pub fn builtin(name: &str) -> Result<ZooEntry, ZooError> {
    let fin = |x: Rational| Extended::Finite(x);
    let entry = match name {
        "hinge_zero_one" => {
            let minus = Distribution::point_mass(2, 0);
            let plus = Distribution::point_mass(2, 1);
            let half = half_half();
            let closed_form = "hinge risk 2·min(p, 1−p), 0-1 risk min(p, 1−p)";
            let mut known = vec![
                KnownValue { field: KnownField::ExactAlpha, value: fin(int(1)), note: closed_form },
                KnownValue { field: KnownField::PaperAlpha, value: fin(int(2)), note: closed_form },
                KnownValue { field: KnownField::HoffmanMax, value: fin(int(2)), note: closed_form },
                KnownValue { field: KnownField::SeparationMin, value: fin(int(1)), note: closed_form },
                KnownValue { field: KnownField::CEll, value: fin(int(1)), note: "entries of the 0-1 loss" },
                KnownValue { field: KnownField::Hoffman(half.clone()), value: fin(int(2)), note: closed_form },
                KnownValue { field: KnownField::Separation(half.clone()), value: Extended::Infinite, note: "both reports optimal" },
            ];
            for d in [&minus, &plus] {
                known.push(KnownValue { field: KnownField::Hoffman(d.clone()), value: fin(int(1)), note: closed_form });
                known.push(KnownValue { field: KnownField::Separation(d.clone()), value: fin(int(1)), note: closed_form });
            }
            ZooEntry {
                name: "hinge_zero_one",
                problem: hinge_zero_one(),
                known_values: known,
                vertex_pool: Some(vec![plus, half, minus]),
                sweep: None,
                envelope: None,
            }
        }
        "bep_abstain_4" => {
            let deltas: Vec<Distribution> = (0..4).map(|y| Distribution::point_mass(4, y)).collect();
            let worked = "worked BEP example at point masses";
            let mut known = at_all(&deltas, KnownField::Separation, fin(ratio(1, 2)), worked);
            known.extend(at_all(&deltas, KnownField::Hoffman, fin(int(1)), worked));
            known.extend(at_all(&deltas, KnownField::VertexAlpha, fin(int(1)), worked));
            known.extend(at_all(&deltas, KnownField::VertexBound, fin(int(2)), worked));
            known.push(KnownValue { field: KnownField::CEll, value: fin(int(1)), note: "entries 0, ½, 1" });
            ZooEntry {
                name: "bep_abstain_4",
                problem: bep_abstain_4(),
                known_values: known,
                vertex_pool: None,
                sweep: None,
                envelope: None,
            }
        }
        "exp_binary" => ZooEntry {
            name: "exp_binary",
            problem: smooth_problem(Arc::new(Exponential)),
            known_values: Vec::new(),
            vertex_pool: None,
            sweep: Some(default_sweep()),
            envelope: Some(envelope_sweep()),
        },
        "logistic_binary" => ZooEntry {
            name: "logistic_binary",
            problem: smooth_problem(Arc::new(Logistic)),
            known_values: Vec::new(),
            vertex_pool: None,
            sweep: Some(default_sweep()),
            envelope: None,
        },
        "huber_binary" => ZooEntry {
            name: "huber_binary",
            problem: smooth_problem(Arc::new(Huber)),
            known_values: Vec::new(),
            vertex_pool: None,
            sweep: Some(default_sweep()),
            envelope: None,
        },
        "hinge_control_sweep" => ZooEntry {
            name: "hinge_control_sweep",
            problem: hinge_zero_one(),
            known_values: Vec::new(),
            vertex_pool: None,
            sweep: Some(default_sweep()),
            envelope: None,
        },
        other => return Err(ZooError::Unknown(other.to_string())),
    };
    Ok(entry)
}
