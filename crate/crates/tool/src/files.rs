//! JSON problem and data files.
//!
//! Rationals are written as strings in the form `-?[0-9]+(/[1-9][0-9]*)?`;
//! plain JSON integers are accepted on input. Errors name the JSON path of
//! the offending value, or the line and column for syntax errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use regret_core::model::{
    DataPoint, DiscreteLoss, Distribution, FiniteDataDistribution, LabelSet, LinkCell, ModelError,
    PolyhedralLink, PolyhedralLoss, Problem, Surrogate, TabularHypothesis,
};
use regret_core::polyhedra::{AffinePiece, Polyhedron};
use regret_core::rational::{format_rational, parse_rational, Point, Rational};
use regret_core::zoo;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Prefix naming a built-in problem instead of a file.
pub const ZOO_SCHEME: &str = "zoo://";

#[derive(Debug)]
pub enum InputError {
    Io { origin: String, message: String },
    Syntax { origin: String, line: usize, column: usize, message: String },
    Invalid { origin: String, path: String, message: String },
    UnknownZoo(String),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io { origin, message } => write!(f, "{origin}: {message}"),
            InputError::Syntax {
                origin,
                line,
                column,
                message,
            } => write!(f, "{origin}:{line}:{column}: {message}"),
            InputError::Invalid { origin, path, message } if path.is_empty() => {
                write!(f, "{origin}: {message}")
            }
            InputError::Invalid { origin, path, message } => write!(f, "{origin}: at `{path}`: {message}"),
            InputError::UnknownZoo(message) => f.write_str(message),
        }
    }
}

impl std::error::Error for InputError {}

/// A rational as written in a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Int(i64),
}

impl From<&Rational> for Num {
    fn from(x: &Rational) -> Self {
        Num::Text(format_rational(x))
    }
}

fn nums(xs: &[Rational]) -> Vec<Num> {
    xs.iter().map(Num::from).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub labels: Vec<String>,
    pub target: TargetFile,
    pub surrogate: SurrogateFile,
    pub link: LinkFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    pub reports: Vec<String>,
    /// `loss[r][y]`.
    pub loss: Vec<Vec<Num>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurrogateFile {
    /// `pieces[y]` lists the affine pieces `w·u + z` of label `y`.
    Polyhedral { dim: usize, pieces: Vec<Vec<PieceFile>> },
    /// One of the built-in smooth binary losses.
    Smooth { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceFile {
    pub w: Vec<Num>,
    pub z: Num,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    /// Checked in order; the first cell containing `u` decides.
    pub cells: Vec<CellFile>,
    pub fallback: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellFile {
    pub report: String,
    /// Rows `a·u ≤ b`.
    #[serde(default)]
    pub le: Vec<RowFile>,
    /// Rows `a·u = b`.
    #[serde(default)]
    pub eq: Vec<RowFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowFile {
    pub a: Vec<Num>,
    pub b: Num,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFile {
    pub schema_version: u32,
    pub points: Vec<DataPointFile>,
    /// Surrogate report per feature.
    pub hypothesis: BTreeMap<String, Vec<Num>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPointFile {
    pub feature: String,
    pub weight: Num,
    pub conditional: Vec<Num>,
}

/// Builds located errors for one input.
struct Locator<'a> {
    origin: &'a str,
}

impl Locator<'_> {
    fn invalid(&self, path: impl Into<String>, message: impl fmt::Display) -> InputError {
        InputError::Invalid {
            origin: self.origin.to_string(),
            path: path.into(),
            message: message.to_string(),
        }
    }

    fn model(&self, path: &str) -> impl Fn(ModelError) -> InputError + '_ {
        let path = path.to_string();
        move |e| self.invalid(path.clone(), e)
    }

    fn num(&self, path: String, x: &Num) -> Result<Rational, InputError> {
        match x {
            Num::Int(n) => Ok(Rational::from_integer((*n).into())),
            Num::Text(t) => parse_rational(t).map_err(|e| self.invalid(path, e)),
        }
    }

    fn point(&self, path: &str, xs: &[Num], len: usize) -> Result<Point, InputError> {
        if xs.len() != len {
            return Err(self.invalid(path, format!("expected {len} entries, found {}", xs.len())));
        }
        xs.iter()
            .enumerate()
            .map(|(i, x)| self.num(format!("{path}[{i}]"), x))
            .collect()
    }
}

fn syntax(origin: &str, e: serde_json::Error) -> InputError {
    InputError::Syntax {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates a problem file. `origin` labels error messages.
pub fn parse_problem(text: &str, origin: &str) -> Result<Problem, InputError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| syntax(origin, e))?;
    problem_from_file(&file, origin)
}

pub fn problem_from_file(file: &ProblemFile, origin: &str) -> Result<Problem, InputError> {
    let at = Locator { origin };
    if file.schema_version != SCHEMA_VERSION {
        return Err(at.invalid(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", file.schema_version),
        ));
    }
    let labels = LabelSet::new(file.labels.clone()).map_err(at.model("labels"))?;
    let n = labels.len();

    let t = &file.target;
    if t.loss.len() != t.reports.len() {
        return Err(at.invalid(
            "target.loss",
            format!("expected one row per report ({}), found {}", t.reports.len(), t.loss.len()),
        ));
    }
    let mut rows = Vec::with_capacity(t.loss.len());
    for (r, row) in t.loss.iter().enumerate() {
        let path = format!("target.loss[{r}]");
        let row = at.point(&path, row, n)?;
        if let Some(y) = row.iter().position(|x| x < &Rational::from_integer(0.into())) {
            return Err(at.invalid(
                format!("{path}[{y}]"),
                format!("loss must be nonnegative, found {}", format_rational(&row[y])),
            ));
        }
        rows.push(row);
    }
    let target = DiscreteLoss::new(&labels, t.reports.clone(), rows).map_err(at.model("target"))?;

    let (surrogate, dim) = match &file.surrogate {
        SurrogateFile::Polyhedral { dim, pieces } => {
            if pieces.len() != n {
                return Err(at.invalid(
                    "surrogate.pieces",
                    format!("expected one list per label ({n}), found {}", pieces.len()),
                ));
            }
            let mut per_label = Vec::with_capacity(n);
            for (y, list) in pieces.iter().enumerate() {
                let mut parsed = Vec::with_capacity(list.len());
                for (k, piece) in list.iter().enumerate() {
                    let path = format!("surrogate.pieces[{y}][{k}]");
                    let w = at.point(&format!("{path}.w"), &piece.w, *dim)?;
                    let z = at.num(format!("{path}.z"), &piece.z)?;
                    parsed.push(AffinePiece::new(w, z));
                }
                per_label.push(parsed);
            }
            let loss = PolyhedralLoss::new(&labels, *dim, per_label).map_err(at.model("surrogate.pieces"))?;
            (Surrogate::Polyhedral(loss), *dim)
        }
        SurrogateFile::Smooth { name } => {
            let loss = zoo::smooth_loss(name).ok_or_else(|| {
                at.invalid("surrogate.name", format!("unknown smooth loss `{name}`; available: exponential, logistic, huber"))
            })?;
            let dim = loss.dim();
            (Surrogate::Smooth(loss), dim)
        }
    };

    let mut cells = Vec::with_capacity(file.link.cells.len());
    for (i, cell) in file.link.cells.iter().enumerate() {
        let mut region = Polyhedron::new(dim);
        for (j, row) in cell.le.iter().enumerate() {
            let path = format!("link.cells[{i}].le[{j}]");
            let a = at.point(&format!("{path}.a"), &row.a, dim)?;
            region = region.le(a, at.num(format!("{path}.b"), &row.b)?);
        }
        for (j, row) in cell.eq.iter().enumerate() {
            let path = format!("link.cells[{i}].eq[{j}]");
            let a = at.point(&format!("{path}.a"), &row.a, dim)?;
            region = region.eq(a, at.num(format!("{path}.b"), &row.b)?);
        }
        cells.push(LinkCell {
            region,
            report: cell.report.clone(),
        });
    }
    let link = PolyhedralLink::new(dim, cells, file.link.fallback.clone()).map_err(at.model("link"))?;
    Problem::new(labels, target, surrogate, link).map_err(at.model(""))
}

/// The file form of a problem; parsing it gives back the same problem.
pub fn problem_to_file(problem: &Problem) -> ProblemFile {
    let surrogate = match &problem.surrogate {
        Surrogate::Polyhedral(loss) => SurrogateFile::Polyhedral {
            dim: loss.dim(),
            pieces: loss
                .labels()
                .iter()
                .map(|f| {
                    f.pieces
                        .iter()
                        .map(|p| PieceFile {
                            w: nums(&p.w),
                            z: Num::from(&p.z),
                        })
                        .collect()
                })
                .collect(),
        },
        Surrogate::Smooth(loss) => SurrogateFile::Smooth {
            name: loss.name().to_string(),
        },
    };
    let row = |c: &regret_core::polyhedra::Constraint| RowFile {
        a: nums(&c.a),
        b: Num::from(&c.b),
    };
    ProblemFile {
        schema_version: SCHEMA_VERSION,
        labels: problem.labels.names().to_vec(),
        target: TargetFile {
            reports: problem.target.reports().to_vec(),
            loss: problem.target.matrix().iter().map(|r| nums(r)).collect(),
        },
        surrogate,
        link: LinkFile {
            cells: problem
                .link
                .cells()
                .iter()
                .map(|c| CellFile {
                    report: c.report.clone(),
                    le: c.region.ineqs.iter().map(row).collect(),
                    eq: c.region.eqs.iter().map(row).collect(),
                })
                .collect(),
            fallback: problem.link.fallback().to_string(),
        },
    }
}

pub fn problem_to_json(problem: &Problem) -> String {
    let mut text = serde_json::to_string_pretty(&problem_to_file(problem)).expect("plain data serializes");
    text.push('\n');
    text
}

/// `sha256:` digest of the compact canonical serialization.
pub fn problem_digest(problem: &Problem) -> String {
    let canonical = serde_json::to_string(&problem_to_file(problem)).expect("plain data serializes");
    format!("sha256:{}", hex::encode(Sha256::digest(canonical.as_bytes())))
}

/// Resolves `zoo://name` or reads and parses a file.
pub fn load_problem(spec: &str) -> Result<Problem, InputError> {
    if let Some(name) = spec.strip_prefix(ZOO_SCHEME) {
        return zoo::builtin(name)
            .map(|e| e.problem)
            .map_err(|e| InputError::UnknownZoo(e.to_string()));
    }
    let text = read(Path::new(spec))?;
    parse_problem(&text, spec)
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError::Io {
        origin: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Parses a data file against the labels and surrogate dimension of
/// `problem`.
pub fn parse_data(
    text: &str,
    origin: &str,
    problem: &Problem,
) -> Result<(FiniteDataDistribution, TabularHypothesis), InputError> {
    let file: DataFile = serde_json::from_str(text).map_err(|e| syntax(origin, e))?;
    let at = Locator { origin };
    if file.schema_version != SCHEMA_VERSION {
        return Err(at.invalid(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", file.schema_version),
        ));
    }
    let n = problem.labels.len();
    let mut points = Vec::with_capacity(file.points.len());
    for (i, pt) in file.points.iter().enumerate() {
        let path = format!("points[{i}]");
        let probs = at.point(&format!("{path}.conditional"), &pt.conditional, n)?;
        let conditional = Distribution::new(probs).map_err(at.model(&format!("{path}.conditional")))?;
        points.push(DataPoint {
            feature: pt.feature.clone(),
            weight: at.num(format!("{path}.weight"), &pt.weight)?,
            conditional,
        });
    }
    let data = FiniteDataDistribution::new(points).map_err(at.model("points"))?;
    let mut h = TabularHypothesis::default();
    for (x, u) in &file.hypothesis {
        let u = at.point(&format!("hypothesis.{x}"), u, problem.dim())?;
        h.map.insert(x.clone(), u);
    }
    Ok((data, h))
}

pub fn load_data(path: &Path, problem: &Problem) -> Result<(FiniteDataDistribution, TabularHypothesis), InputError> {
    let text = read(path)?;
    parse_data(&text, &path.display().to_string(), problem)
}
