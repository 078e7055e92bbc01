use std::sync::OnceLock;

use proptest::prelude::*;
use regret_core::constants::{check_consistency, TransferCertificate};
use regret_core::elicitation::{
    bayes_risk_surrogate, cell_decomposition, level_set_atlas, regret_surrogate, regret_target,
};
use regret_core::model::{Distribution, Problem};
use regret_core::polyhedra::{distance_as_max_affine, linf_distance, vertices, Polyhedron};
use regret_core::rational::{dot, int, linf_norm, ratio, sub, Extended, Point, Rational};
use regret_core::zoo::{self, KnownField};

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| ratio(n, d))
}

fn point(d: usize) -> impl Strategy<Value = Point> {
    proptest::collection::vec(rational(), d)
}

fn distribution(n: usize) -> impl Strategy<Value = Distribution> {
    proptest::collection::vec(0i64..=12, n)
        .prop_filter("some mass", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| {
            let total: i64 = w.iter().sum();
            Distribution::new(w.iter().map(|&x| ratio(x, total)).collect()).unwrap()
        })
}

struct Certified {
    problem: Problem,
    cert: TransferCertificate,
}

fn certify(problem: Problem) -> Certified {
    let loss = problem.polyhedral().unwrap();
    let atlas = level_set_atlas(loss).unwrap();
    let cells = cell_decomposition(loss, &problem.target, &atlas).unwrap();
    let cert = check_consistency(&problem, &atlas, &cells).unwrap();
    Certified { problem, cert }
}

fn hinge() -> &'static Certified {
    static C: OnceLock<Certified> = OnceLock::new();
    C.get_or_init(|| certify(zoo::hinge_zero_one()))
}

fn bep() -> &'static Certified {
    static C: OnceLock<Certified> = OnceLock::new();
    C.get_or_init(|| certify(zoo::bep_abstain_4()))
}

/// `d∞(u, Γ(q)) ≤ H_{L,q}·R_L(u, q)` at every atlas vertex.
fn hoffman_bound_holds(c: &Certified, u: &[Rational]) {
    let loss = c.problem.polyhedral().unwrap();
    for v in &c.cert.per_vertex {
        let gamma = bayes_risk_surrogate(loss, &v.q).unwrap().optimal_set;
        let dist = linf_distance(&Polyhedron::singleton(u), &gamma).unwrap();
        let regret = regret_surrogate(loss, u, &v.q).unwrap();
        assert!(dist <= &v.hoffman.value * &regret, "q = {:?}, u = {u:?}", v.q);
    }
}

/// `R_ℓ(ψ(u), p) ≤ α*·R_L(u, p)`.
fn transfer_holds(c: &Certified, u: &[Rational], p: &Distribution) {
    let loss = c.problem.polyhedral().unwrap();
    let lhs = regret_target(&c.problem.target, c.problem.link_report(u), p);
    let rhs = &c.cert.exact_alpha * regret_surrogate(loss, u, p).unwrap();
    assert!(lhs <= rhs, "p = {p:?}, u = {u:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_optimum_matches_best_vertex(
        c in point(3),
        cuts in proptest::collection::vec((point(3), 1i64..=10), 0..4),
    ) {
        let mut poly = Polyhedron::cube(3, &int(-5), &int(5));
        for (a, b) in cuts {
            poly = poly.le(a, int(b));
        }
        let best = vertices(&poly).unwrap().vertices.iter().map(|v| dot(&c, v)).min().unwrap();
        let out = poly.minimize(&c).unwrap();
        prop_assert_eq!(out.value(), Some(&best));
        prop_assert!(poly.contains_point(out.point().unwrap()));
    }

    #[test]
    fn linf_distance_is_symmetric_and_exact_on_points(a in point(2), b in point(2), r in 0i64..=3) {
        let pa = Polyhedron::singleton(&a);
        let pb = Polyhedron::singleton(&b);
        prop_assert_eq!(linf_distance(&pa, &pb).unwrap(), linf_norm(&sub(&a, &b)));
        let cube = Polyhedron::cube(2, &int(-r), &int(r));
        prop_assert_eq!(linf_distance(&pa, &cube).unwrap(), linf_distance(&cube, &pa).unwrap());
    }

    #[test]
    fn distance_function_agrees_with_lp(x in point(2), cut in point(2)) {
        let s = Polyhedron::cube(2, &int(-1), &int(2)).le(cut, int(1));
        let f = distance_as_max_affine(&s).unwrap();
        prop_assert_eq!(f.eval(&x), linf_distance(&Polyhedron::singleton(&x), &s).unwrap());
    }

    #[test]
    fn hinge_hoffman_bound(u in point(1)) {
        hoffman_bound_holds(hinge(), &u);
    }

    #[test]
    fn bep_hoffman_bound(u in point(2)) {
        hoffman_bound_holds(bep(), &u);
    }

    #[test]
    fn hinge_transfer(u in point(1), p in distribution(2)) {
        transfer_holds(hinge(), &u, &p);
    }

    #[test]
    fn bep_transfer(u in point(2), p in distribution(4)) {
        transfer_holds(bep(), &u, &p);
    }
}

#[test]
fn certificates_match_known_values() {
    for (name, c) in [("hinge_zero_one", hinge()), ("bep_abstain_4", bep())] {
        let entry = zoo::builtin(name).unwrap();
        let at = |q: &Distribution| c.cert.per_vertex.iter().find(|v| &v.q == q).expect("atlas vertex");
        for known in &entry.known_values {
            let got = match &known.field {
                KnownField::ExactAlpha => Extended::Finite(c.cert.exact_alpha.clone()),
                KnownField::PaperAlpha => Extended::Finite(c.cert.paper_alpha.clone()),
                KnownField::HoffmanMax => Extended::Finite(c.cert.h_l.clone()),
                KnownField::SeparationMin => c.cert.eps_min.clone(),
                KnownField::CEll => Extended::Finite(c.cert.c_ell.clone()),
                KnownField::Hoffman(q) => Extended::Finite(at(q).hoffman.value.clone()),
                KnownField::Separation(q) => at(q).separation.value.clone(),
                KnownField::VertexAlpha(q) => Extended::Finite(at(q).alpha.value.clone()),
                KnownField::VertexBound(q) => Extended::Finite(at(q).bound.clone()),
            };
            assert_eq!(got, known.value, "{name}: {:?} ({})", known.field, known.note);
        }
        if let Some(pool) = &entry.vertex_pool {
            let mut expected = pool.clone();
            expected.sort_by(|a, b| a.probs().cmp(b.probs()));
            let mut got: Vec<Distribution> = c.cert.per_vertex.iter().map(|v| v.q.clone()).collect();
            got.sort_by(|a, b| a.probs().cmp(b.probs()));
            assert_eq!(got, expected);
        }
    }
}

#[test]
fn scaling_the_target_scales_the_constants() {
    let base = hinge();
    for k in [ratio(1, 3), int(2), int(7)] {
        let scaled = certify(base.problem.with_target(base.problem.target.scaled(&k)));
        assert!(scaled.cert.consistent);
        assert_eq!(scaled.cert.exact_alpha, &base.cert.exact_alpha * &k);
        assert_eq!(scaled.cert.paper_alpha, &base.cert.paper_alpha * &k);
        assert_eq!(scaled.cert.c_ell, &base.cert.c_ell * &k);
        assert_eq!(scaled.cert.h_l, base.cert.h_l);
    }
}
