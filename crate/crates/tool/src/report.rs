//! JSON and CSV renderings of atlases, certificates, and verification
//! reports. Objects use sorted keys, so output bytes depend only on content.

use std::io::Write;

use regret_core::constants::{InconsistencyKind, TransferCertificate};
use regret_core::elicitation::{LevelSetAtlas, SimplexCell};
use regret_core::lower_bound::{EnvelopeReport, ExponentFit, SweepRow};
use regret_core::model::{Distribution, Problem};
use regret_core::rational::{format_rational, Extended, Rational};
use regret_core::verifier::{DistributionalCheck, VerificationReport, Violation};
use serde_json::{json, Value};

pub fn rational(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

pub fn extended(x: &Extended) -> Value {
    match x {
        Extended::Finite(r) => rational(r),
        Extended::Infinite => Value::String("inf".into()),
    }
}

pub fn point(x: &[Rational]) -> Value {
    Value::Array(x.iter().map(rational).collect())
}

pub fn distribution(p: &Distribution) -> Value {
    point(p.probs())
}

fn opt_point(x: Option<&Vec<Rational>>) -> Value {
    x.map_or(Value::Null, |u| point(u))
}

pub fn atlas(atlas: &LevelSetAtlas) -> Value {
    let level_sets: Vec<Value> = (0..atlas.representatives.len())
        .map(|i| {
            json!({
                "representative": point(&atlas.representatives[i]),
                "loss": point(&atlas.losses[i]),
                "vertices": atlas.level_set_vertices[i].iter().map(distribution).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "representative_count": atlas.representatives.len(),
        "vertex_count": atlas.vertex_pool.len(),
        "vertices": atlas.vertex_pool.iter().map(distribution).collect::<Vec<_>>(),
        "level_sets": level_sets,
    })
}

pub fn cells(problem: &Problem, cells: &[SimplexCell], atlas: &LevelSetAtlas) -> Value {
    Value::Array(
        cells
            .iter()
            .map(|c| {
                json!({
                    "representative": point(&atlas.representatives[c.representative]),
                    "report": problem.target.reports()[c.report],
                    "interior": distribution(&c.interior),
                    "target_optimal": c.target_optimal_set.iter().map(|&r| problem.target.reports()[r].clone()).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

pub fn certificate(problem: &Problem, cert: &TransferCertificate) -> Value {
    let report_name = |r: usize| Value::String(problem.target.reports()[r].clone());
    let witness = cert.witness.as_ref().map_or(Value::Null, |w| {
        json!({
            "kind": match w.kind {
                InconsistencyKind::Refinement => "refinement",
                InconsistencyKind::Separation => "separation",
            },
            "p": distribution(&w.p),
            "u": point(&w.u),
            "report": report_name(w.report),
        })
    });
    let per_vertex: Vec<Value> = cert
        .per_vertex
        .iter()
        .map(|v| {
            json!({
                "q": distribution(&v.q),
                "hoffman": rational(&v.hoffman.value),
                "hoffman_witness": opt_point(v.hoffman.witness.as_ref()),
                "separation": extended(&v.separation.value),
                "separation_witness": v.separation.witness.as_ref().map_or(Value::Null, |w| json!({
                    "report": report_name(w.report),
                    "from": point(&w.from),
                    "to": point(&w.to),
                })),
                "bad_regret_inf": extended(&v.bad_regret_inf),
                "alpha": rational(&v.alpha.value),
                "alpha_witness": v.alpha.witness.as_ref().map_or(Value::Null, |w| json!({
                    "report": report_name(w.report),
                    "closest": point(&w.closest),
                    "inside": opt_point(w.inside.as_ref()),
                })),
                "bound": rational(&v.bound),
            })
        })
        .collect();
    json!({
        "consistent": cert.consistent,
        "witness": witness,
        "c_ell": rational(&cert.c_ell),
        "h_l": rational(&cert.h_l),
        "eps_min": extended(&cert.eps_min),
        "eps_global": extended(&cert.eps_global),
        "eps_cells": extended(&cert.eps_cells),
        "faces_checked": cert.faces_checked,
        "paper_alpha": rational(&cert.paper_alpha),
        "tightened_alpha": rational(&cert.tightened_alpha),
        "exact_alpha": rational(&cert.exact_alpha),
        "transfer": format!("t -> {} * t", format_rational(&cert.exact_alpha)),
        "per_vertex": per_vertex,
    })
}

fn violation(v: &Violation) -> Value {
    json!({
        "index": v.index,
        "p": v.p.iter().map(distribution).collect::<Vec<_>>(),
        "u": v.u.iter().map(|u| point(u)).collect::<Vec<_>>(),
        "lhs": rational(&v.lhs),
        "rhs": rational(&v.rhs),
    })
}

pub fn verification(report: &VerificationReport) -> Value {
    json!({
        "seed": report.seed,
        "samples": report.samples,
        "violation_count": report.violation_count,
        "violations": report.violations.iter().map(violation).collect::<Vec<_>>(),
        "max_ratio": report.max_ratio.as_ref().map_or(Value::Null, rational),
    })
}

pub fn distributional_check(check: &DistributionalCheck) -> Value {
    json!({
        "alpha": rational(&check.alpha),
        "target_regret": rational(&check.target_regret),
        "surrogate_regret": rational(&check.surrogate_regret),
        "pointwise_bound": rational(&check.pointwise_bound),
        "holds": check.holds(),
    })
}

pub fn fit(fit: &ExponentFit) -> Value {
    json!({
        "slope_target": fit.slope_target,
        "slope_surrogate": fit.slope_surrogate,
        "c_estimate": fit.c_estimate,
        "usable_rows": fit.usable_rows,
    })
}

pub fn envelope(report: &EnvelopeReport) -> Value {
    let c = &report.constants;
    json!({
        "alpha": c.alpha,
        "beta": c.beta,
        "delta": c.delta,
        "lambda_star": c.lambda_star,
        "lambda_cap": c.lambda_cap,
        "c_ell": c.c_ell,
        "c_l": c.c_l,
        "u1": report.u1,
        "rows_checked": report.checked,
        "violations": report.violations,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

/// 17 significant digits, enough to round-trip any binary64.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = rows.first().map_or(0, |r| r.u_lambda.len());
    let mut header = vec!["lambda".to_string(), "target_regret".into(), "surrogate_regret".into()];
    header.extend((0..d).map(|i| format!("u_lambda_{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![float17(r.lambda), float17(r.target_regret), float17(r.surrogate_regret)];
        rec.extend(r.u_lambda.iter().map(|&x| float17(x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per violation; `p` and `u` lists are `;`-separated vectors of
/// space-separated rationals.
pub fn write_violations_csv(sets: &[(&str, &VerificationReport)], out: impl Write) -> csv::Result<()> {
    let join = |xs: &[Rational]| xs.iter().map(format_rational).collect::<Vec<_>>().join(" ");
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "index", "p", "u", "lhs", "rhs"])?;
    for (name, report) in sets {
        for v in &report.violations {
            let p = v.p.iter().map(|p| join(p.probs())).collect::<Vec<_>>().join(";");
            let u = v.u.iter().map(|u| join(u)).collect::<Vec<_>>().join(";");
            w.write_record([
                name.to_string(),
                v.index.to_string(),
                p,
                u,
                format_rational(&v.lhs),
                format_rational(&v.rhs),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
