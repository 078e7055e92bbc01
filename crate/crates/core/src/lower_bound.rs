//! Square-root lower bound for smooth surrogates, shown numerically.
//!
//! Along `p_λ = (1 − λ)p₀ + λp₁`, starting from a distribution `p₀` where two
//! target reports tie, the target regret of the boundary report `u₀` grows
//! linearly in `λ` while its surrogate regret grows only quadratically for
//! smooth, locally strongly convex surrogates. Polyhedral surrogates run
//! through the same sweep as a control and show linear growth instead.
//!
//! This is the only module using binary64; distributions are still built
//! exactly from the float `λ` so target regrets carry no rounding beyond the
//! final conversion.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::elicitation::{bayes_risk_surrogate, bayes_risk_target, expected_loss, ElicitationError};
use crate::model::{DiscreteLoss, Distribution, ModelError, Problem, SmoothLoss, Surrogate};
use crate::rational::{from_f64, to_f64, Point, Rational};

/// Gradient-descent iteration cap for [`minimize_expected`].
pub const MAX_ITERATIONS: usize = 200_000;

/// Rows with a regret at or below this are unusable on a log scale.
pub const MIN_USABLE_REGRET: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub p0: Distribution,
    pub p1: Distribution,
    pub u0: Vec<f64>,
    /// Strictly decreasing values in `(0, 1)`.
    pub lambdas: Vec<f64>,
    /// Gradient ℓ∞-norm threshold for the inner minimization.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub target_regret: f64,
    pub surrogate_regret: f64,
    pub u_lambda: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub slope_target: f64,
    pub slope_surrogate: f64,
    /// `min target_regret / √surrogate_regret` over usable rows.
    pub c_estimate: f64,
    pub usable_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConstants {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub lambda_star: f64,
    /// The extra restriction `λ ≤ ½·α/(α + β)`.
    pub lambda_cap: f64,
    pub c_ell: f64,
    pub c_l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LowerBoundError {
    NonConvergence { gradient_norm: f64, iterations: usize },
    InsufficientRows { usable: usize, needed: usize },
    InvalidModulus { name: &'static str, value: f64 },
    InvalidConfig(&'static str),
    /// A regret came out below `−10⁻¹²`, beyond rounding.
    NegativeRegret { lambda: f64, value: f64 },
    Model(ModelError),
    Elicitation(ElicitationError),
}

impl fmt::Display for LowerBoundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowerBoundError::NonConvergence { gradient_norm, iterations } => write!(
                f,
                "minimization did not converge after {iterations} iterations (gradient norm {gradient_norm:e})"
            ),
            LowerBoundError::InsufficientRows { usable, needed } => {
                write!(f, "only {usable} usable sweep rows, need at least {needed}")
            }
            LowerBoundError::InvalidModulus { name, value } => {
                write!(f, "{name} must be positive, got {value}")
            }
            LowerBoundError::InvalidConfig(msg) => write!(f, "invalid sweep: {msg}"),
            LowerBoundError::NegativeRegret { lambda, value } => {
                write!(f, "negative regret {value:e} at lambda {lambda:e}")
            }
            LowerBoundError::Model(e) => write!(f, "{e}"),
            LowerBoundError::Elicitation(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for LowerBoundError {}

impl From<ModelError> for LowerBoundError {
    fn from(e: ModelError) -> Self {
        LowerBoundError::Model(e)
    }
}

impl From<ElicitationError> for LowerBoundError {
    fn from(e: ElicitationError) -> Self {
        LowerBoundError::Elicitation(e)
    }
}

/// `n` points from `hi` down to `lo`, evenly spaced in log scale.
pub fn geometric_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (lh, ll) = (libm::log(hi), libm::log(lo));
    (0..n)
        .map(|i| libm::exp(lh + (ll - lh) * i as f64 / (n - 1) as f64))
        .collect()
}

fn expected_value(loss: &dyn SmoothLoss, p: &[f64], u: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(y, &w)| w * loss.value(u, y))
        .sum()
}

fn expected_gradient(loss: &dyn SmoothLoss, p: &[f64], u: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; u.len()];
    for (y, &w) in p.iter().enumerate() {
        if w > 0.0 {
            for (gi, di) in g.iter_mut().zip(loss.gradient(u, y)) {
                *gi += w * di;
            }
        }
    }
    g
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes `u ↦ ⟨p, L(u)⟩` by gradient descent with Armijo backtracking
/// (initial step 1, shrink ½) until the gradient ℓ∞-norm is at most `tol`.
pub fn minimize_expected(
    loss: &dyn SmoothLoss,
    p: &[f64],
    u_init: &[f64],
    tol: f64,
) -> Result<Vec<f64>, LowerBoundError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(LowerBoundError::InvalidConfig("tolerance must be positive"));
    }
    let mut u = u_init.to_vec();
    let mut f = expected_value(loss, p, &u);
    let mut g = expected_gradient(loss, p, &u);
    for _ in 0..MAX_ITERATIONS {
        if inf_norm(&g) <= tol {
            return Ok(u);
        }
        let g2: f64 = g.iter().map(|x| x * x).sum();
        // slack for rounding in f, which dominates the decrease near the optimum
        let noise = 4.0 * f64::EPSILON * f.abs().max(1.0);
        let mut step = 1.0;
        loop {
            let cand: Vec<f64> = u.iter().zip(&g).map(|(x, d)| x - step * d).collect();
            let fc = expected_value(loss, p, &cand);
            if fc <= f - 1e-4 * step * g2 + noise {
                u = cand;
                f = fc;
                break;
            }
            step *= 0.5;
            if step < 1e-30 {
                return Err(LowerBoundError::NonConvergence {
                    gradient_norm: inf_norm(&g),
                    iterations: MAX_ITERATIONS,
                });
            }
        }
        g = expected_gradient(loss, p, &u);
    }
    Err(LowerBoundError::NonConvergence {
        gradient_norm: inf_norm(&g),
        iterations: MAX_ITERATIONS,
    })
}

fn to_floats(p: &Distribution) -> Vec<f64> {
    p.probs().iter().map(to_f64).collect()
}

fn exact(x: f64) -> Result<Rational, LowerBoundError> {
    from_f64(x).ok_or(LowerBoundError::InvalidConfig("non-finite value"))
}

fn exact_point(u: &[f64]) -> Result<Point, LowerBoundError> {
    u.iter().map(|&x| exact(x)).collect()
}

/// Indices `(r′, r)`: the link report at `u₀` and the target optimum at `p₁`.
fn sweep_reports(problem: &Problem, cfg: &SweepConfig) -> Result<(usize, usize), LowerBoundError> {
    let r_prime = problem.link_report(&exact_point(&cfg.u0)?);
    let (_, best) = bayes_risk_target(&problem.target, &cfg.p1);
    if best.contains(&r_prime) {
        return Err(LowerBoundError::InvalidConfig("link report at u0 is optimal at p1"));
    }
    Ok((r_prime, best[0]))
}

fn validate(problem: &Problem, cfg: &SweepConfig) -> Result<(), LowerBoundError> {
    if cfg.u0.len() != problem.dim() {
        return Err(LowerBoundError::InvalidConfig("u0 has the wrong dimension"));
    }
    let n = problem.labels.len();
    if cfg.p0.len() != n || cfg.p1.len() != n {
        return Err(LowerBoundError::InvalidConfig("distributions have the wrong length"));
    }
    if cfg.lambdas.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        return Err(LowerBoundError::InvalidConfig("lambda values must lie in (0, 1)"));
    }
    if cfg.lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LowerBoundError::InvalidConfig("lambda values must strictly decrease"));
    }
    if cfg.tolerance.is_nan() || cfg.tolerance <= 0.0 {
        return Err(LowerBoundError::InvalidConfig("tolerance must be positive"));
    }
    Ok(())
}

fn clamp(lambda: f64, value: f64) -> Result<f64, LowerBoundError> {
    if value < -1e-12 {
        return Err(LowerBoundError::NegativeRegret { lambda, value });
    }
    Ok(value.max(0.0))
}

/// Regrets of `u₀` and `ψ(u₀)` along the sweep.
///
/// Smooth surrogates are minimized by warm-started descent. Polyhedral
/// surrogates (the control) use the exact Bayes risk at the exact `p_λ`.
pub fn sweep_lambda(problem: &Problem, cfg: &SweepConfig) -> Result<Vec<SweepRow>, LowerBoundError> {
    validate(problem, cfg)?;
    let (r_prime, _) = sweep_reports(problem, cfg)?;
    let mut rows = Vec::with_capacity(cfg.lambdas.len());
    let mut warm = cfg.u0.clone();
    for &lambda in &cfg.lambdas {
        let p = Distribution::mix(&cfg.p1, &cfg.p0, &exact(lambda)?);
        let (risk, _) = bayes_risk_target(&problem.target, &p);
        let target_regret = clamp(lambda, to_f64(&(problem.target.expected(r_prime, &p) - risk)))?;
        let (surrogate_regret, u_lambda) = match &problem.surrogate {
            Surrogate::Smooth(loss) => {
                let pf = to_floats(&p);
                let u = minimize_expected(loss.as_ref(), &pf, &warm, cfg.tolerance)?;
                let gap = expected_value(loss.as_ref(), &pf, &cfg.u0) - expected_value(loss.as_ref(), &pf, &u);
                warm = u.clone();
                (gap, u)
            }
            Surrogate::Polyhedral(loss) => {
                let risk = bayes_risk_surrogate(loss, &p)?;
                let gap = expected_loss(loss, &p, &exact_point(&cfg.u0)?) - &risk.value;
                (to_f64(&gap), risk.minimizer.iter().map(to_f64).collect())
            }
        };
        rows.push(SweepRow {
            lambda,
            target_regret,
            surrogate_regret: clamp(lambda, surrogate_regret)?,
            u_lambda,
        });
    }
    Ok(rows)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Least-squares slopes of log regret against log `λ`.
pub fn fit_exponents(rows: &[SweepRow]) -> Result<ExponentFit, LowerBoundError> {
    let usable: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.target_regret > MIN_USABLE_REGRET && r.surrogate_regret > MIN_USABLE_REGRET)
        .collect();
    if usable.len() < 5 {
        return Err(LowerBoundError::InsufficientRows {
            usable: usable.len(),
            needed: 5,
        });
    }
    let xs: Vec<f64> = usable.iter().map(|r| libm::log(r.lambda)).collect();
    let yt: Vec<f64> = usable.iter().map(|r| libm::log(r.target_regret)).collect();
    let ys: Vec<f64> = usable.iter().map(|r| libm::log(r.surrogate_regret)).collect();
    let c_estimate = usable
        .iter()
        .map(|r| r.target_regret / libm::sqrt(r.surrogate_regret))
        .fold(f64::INFINITY, f64::min);
    Ok(ExponentFit {
        slope_target: slope(&xs, &yt),
        slope_surrogate: slope(&xs, &ys),
        c_estimate,
        usable_rows: usable.len(),
    })
}

/// Acceptance windows for the fitted slopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Smooth surrogate: surrogate slope near 2, target slope near 1.
    Quadratic,
    /// Polyhedral control: surrogate slope near 1.
    Linear,
}

impl Regime {
    pub fn of(problem: &Problem) -> Regime {
        match problem.surrogate {
            Surrogate::Smooth(_) => Regime::Quadratic,
            Surrogate::Polyhedral(_) => Regime::Linear,
        }
    }

    pub fn accepts(self, fit: &ExponentFit) -> bool {
        match self {
            Regime::Quadratic => {
                (1.9..=2.1).contains(&fit.slope_surrogate)
                    && (0.99..=1.01).contains(&fit.slope_target)
            }
            Regime::Linear => (0.95..=1.05).contains(&fit.slope_surrogate),
        }
    }
}

/// Inputs of the analytic envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeInputs<'a> {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub u0: &'a [f64],
    pub u1: &'a [f64],
    /// `L₁(u₀)` and `L₁(u₁)`, expected loss under `p₁`.
    pub l1_at_u0: f64,
    pub l1_at_u1: f64,
    pub p1: &'a Distribution,
    pub target: &'a DiscreteLoss,
    /// Link report at `u₀`.
    pub r_prime: usize,
    /// Target optimum at `p₁`.
    pub r: usize,
}

pub fn analytic_envelope(inputs: &EnvelopeInputs<'_>) -> Result<EnvelopeConstants, LowerBoundError> {
    for (name, value) in [("alpha", inputs.alpha), ("beta", inputs.beta), ("delta", inputs.delta)] {
        if value.is_nan() || value <= 0.0 {
            return Err(LowerBoundError::InvalidModulus { name, value });
        }
    }
    let (a, b, d) = (inputs.alpha, inputs.beta, inputs.delta);
    let lambda_star = a * d * d / (2.0 * a * d * d + 4.0 * inputs.l1_at_u0 - 4.0 * inputs.l1_at_u1);
    let dist2: f64 = inputs.u0.iter().zip(inputs.u1).map(|(x, y)| (x - y) * (x - y)).sum();
    let c_l = 2.0 * b * b * b / (a * a) * dist2;
    let gap: Rational = inputs.target.expected(inputs.r_prime, inputs.p1) - inputs.target.expected(inputs.r, inputs.p1);
    Ok(EnvelopeConstants {
        alpha: a,
        beta: b,
        delta: d,
        lambda_star,
        lambda_cap: 0.5 * a / (a + b),
        c_ell: to_f64(&gap),
        c_l,
    })
}

/// Largest gradient-difference quotient `‖∇L_y(a) − ∇L_y(b)‖₂/‖a − b‖₂`
/// over neighboring points of a grid with `steps` points per axis on the
/// Euclidean ball around `center`.
pub fn measure_smoothness(loss: &dyn SmoothLoss, center: &[f64], radius: f64, steps: usize) -> f64 {
    let d = center.len();
    let h = 2.0 * radius / (steps - 1) as f64;
    let inside = |u: &[f64]| {
        let r2: f64 = u.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
        r2 <= radius * radius * (1.0 + 1e-12)
    };
    let mut beta: f64 = 0.0;
    let total = steps.pow(d as u32);
    for idx in 0..total {
        let mut k = idx;
        let u: Vec<f64> = center
            .iter()
            .map(|c| {
                let i = k % steps;
                k /= steps;
                c - radius + h * i as f64
            })
            .collect();
        if !inside(&u) {
            continue;
        }
        for axis in 0..d {
            let mut v = u.clone();
            v[axis] += h;
            if !inside(&v) {
                continue;
            }
            for y in 0..loss.num_labels() {
                let gu = loss.gradient(&u, y);
                let gv = loss.gradient(&v, y);
                let diff: f64 = gu.iter().zip(&gv).map(|(a, b)| (a - b) * (a - b)).sum();
                beta = beta.max(libm::sqrt(diff) / h);
            }
        }
    }
    beta
}

/// Outcome of checking `R_L(u₀, p_λ) ≤ c_L·λ² + 10⁻¹⁰` below both caps.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub constants: EnvelopeConstants,
    pub u1: Vec<f64>,
    pub rows: Vec<SweepRow>,
    /// Rows with `λ` below both caps.
    pub checked: usize,
    /// `λ` values breaking the envelope.
    pub violations: Vec<f64>,
}

/// Grid resolution used when `β` must be measured.
pub const SMOOTHNESS_GRID: usize = 4001;

/// Runs the sweep and checks it against the analytic envelope, measuring
/// `β` on `{u : ‖u − u₁‖ ≤ ‖u₀ − u₁‖ + δ}` when the loss does not supply it.
pub fn check_envelope(problem: &Problem, cfg: &SweepConfig) -> Result<EnvelopeReport, LowerBoundError> {
    let Surrogate::Smooth(loss) = &problem.surrogate else {
        return Err(LowerBoundError::InvalidConfig("envelope needs a smooth surrogate"));
    };
    let moduli = loss
        .moduli()
        .ok_or(LowerBoundError::InvalidConfig("surrogate has no strong convexity modulus"))?;
    validate(problem, cfg)?;
    let (r_prime, r) = sweep_reports(problem, cfg)?;
    let p1 = to_floats(&cfg.p1);
    let u1 = minimize_expected(loss.as_ref(), &p1, &cfg.u0, cfg.tolerance)?;
    let dist: f64 = libm::sqrt(cfg.u0.iter().zip(&u1).map(|(x, y)| (x - y) * (x - y)).sum());
    let beta = match moduli.beta {
        Some(b) => b,
        None => measure_smoothness(loss.as_ref(), &u1, dist + moduli.delta, SMOOTHNESS_GRID),
    };
    let constants = analytic_envelope(&EnvelopeInputs {
        alpha: moduli.alpha,
        beta,
        delta: moduli.delta,
        u0: &cfg.u0,
        u1: &u1,
        l1_at_u0: expected_value(loss.as_ref(), &p1, &cfg.u0),
        l1_at_u1: expected_value(loss.as_ref(), &p1, &u1),
        p1: &cfg.p1,
        target: &problem.target,
        r_prime,
        r,
    })?;
    let rows = sweep_lambda(problem, cfg)?;
    let limit = constants.lambda_star.min(constants.lambda_cap);
    let mut checked = 0;
    let mut violations = Vec::new();
    for row in rows.iter().filter(|row| row.lambda < limit) {
        checked += 1;
        if row.surrogate_regret > constants.c_l * row.lambda * row.lambda + 1e-10 {
            violations.push(row.lambda);
        }
    }
    Ok(EnvelopeReport {
        constants,
        u1,
        rows,
        checked,
        violations,
    })
}
