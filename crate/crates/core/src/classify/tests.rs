use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::expr::parse_expression;
use crate::expr::sample::SampleBox;
use crate::groups::random::{order_range, random_params};

fn eq(a: &[&str], a0: &str, b: &str) -> ReducedEquation {
    let pe = |s: &str| parse_expression(s).unwrap();
    ReducedEquation::new(a.iter().map(|s| pe(s)).collect(), pe(a0), pe(b), SampleBox::standard()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[test]
fn burgers_with_linear_source_is_iv0_2() {
    let c = detect_subclass(&eq(&["1"], "0", "x"), DEFAULT_TOL).unwrap();
    assert_eq!(c.tag, Tag::IV0_2);
    let p = c.params.unwrap();
    for (have, want) in [(p.a[0], 1.0), (p.b1, 1.0), (p.b0, 0.0)] {
        assert!(rel(have, want) < 1e-12, "{have} vs {want}");
    }
}

#[test]
fn shifted_quadratic_is_ii0() {
    let c = detect_subclass(&eq(&["(x+1)^2"], "1", "5*(x+1)"), DEFAULT_TOL).unwrap();
    assert_eq!(c.tag, Tag::II0);
    let p = c.params.unwrap();
    for (have, want) in [(p.beta, 1.0), (p.a[0], 1.0), (p.a00, 1.0), (p.b0, 5.0)] {
        assert!(rel(have, want) < 1e-10, "{have} vs {want}");
    }
}

#[test]
fn exponential_a0_is_f0() {
    let c = detect_subclass(&eq(&["1"], "exp(x)", "0"), DEFAULT_TOL).unwrap();
    assert_eq!(c.tag, Tag::F0);
    assert!(c.params.is_none());
    assert_eq!(c.attempts.len(), FIT_ORDER.len());
}

#[test]
fn round_trip_every_tag() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for tag in Tag::SUBCLASSES {
        let (lo, hi) = order_range(tag);
        for i in 0..8 {
            let r = lo + i % (hi - lo + 1);
            let p = random_params(tag, r, 0.0, &mut rng).unwrap();
            let nf = instantiate_normal_form(&p).unwrap();
            let c = detect_subclass(&nf, DEFAULT_TOL).unwrap();
            assert_eq!(c.tag, tag, "{p:?}\n{:#?}", c.attempts);
            let q = c.params.unwrap();
            let pairs = [
                (q.beta, p.beta),
                (q.alpha, p.alpha),
                (q.a01, p.a01),
                (q.a00, p.a00),
                (q.b0, p.b0),
                (q.b1, p.b1),
                (q.b2, p.b2),
            ];
            for (k, (u, v)) in pairs.iter().enumerate() {
                assert!(rel(*u, *v) < 1e-6, "{tag} slot {k}: {u} vs {v}");
            }
            for (u, v) in q.a.iter().zip(&p.a) {
                assert!(rel(*u, *v) < 1e-6, "{tag}: a {u} vs {v}");
            }
        }
    }
}

#[test]
fn gate_examples() {
    let mut p = SubclassParams::new(Tag::I1, vec![1.0]);
    p.alpha = 1.0;
    p.a01 = 1.0;
    let (ok, v) = gate_check(&p.complete());
    assert!(ok, "{v:?}");

    let mut p = SubclassParams::new(Tag::I01, vec![1.0]);
    p.alpha = -2.0;
    let (ok, v) = gate_check(&p);
    assert!(!ok);
    assert!(v[0].contains("(α+2)·a_r ≠ 0"));

    let (ok, v) = gate_check(&SubclassParams::new(Tag::IV1, vec![1.0]));
    assert!(!ok);
    assert!(v.iter().any(|m| m.contains("Σ")));
}

#[test]
fn constraint_violation_falls_through() {
    // I01 shape but b0 off its constrained value by 1e-3: not I01
    let mut p = SubclassParams::new(Tag::I01, vec![0.0, 1.0]);
    p.alpha = 1.0;
    p.a00 = 0.5;
    let p = p.complete();
    let mut bad = p.clone();
    bad.b0 += 1e-3;
    let nf = instantiate_normal_form(&p).unwrap();
    let c = detect_subclass(&nf, DEFAULT_TOL).unwrap();
    assert_eq!(c.tag, Tag::I01);
    let y = Expr::x();
    let perturbed = ReducedEquation::new(
        nf.a.clone(),
        nf.a0.clone(),
        nf.b.add(&Expr::float(1e-3).mul(&y)),
        nf.domain,
    )
    .unwrap();
    assert_eq!(detect_subclass(&perturbed, DEFAULT_TOL).unwrap().tag, Tag::F0);
}

#[test]
fn usual_group_examples() {
    let e1 = eq(&["1"], "0", "0");
    let e2 = eq(&["9/2"], "0", "0");
    let m = match_modulo_usual_group(&e1, &e2, 1e-9).unwrap();
    assert!(
        rel(m.c1, 2.0 / 9.0) < 1e-12 && m.c2 == 0.0 && m.c3 == 1.0 && m.c4 == 0.0,
        "{m:?}"
    );
    let id = match_modulo_usual_group(&e1, &e1, 1e-9).unwrap();
    assert_eq!((id.c1, id.c2, id.c3, id.c4), (1.0, 0.0, 1.0, 0.0));
    assert!(match_modulo_usual_group(&e1, &eq(&["1"], "0", "1"), 1e-9).is_none());
    assert!(match_modulo_usual_group(&e1, &eq(&["1", "1"], "0", "0"), 1e-9).is_none());
}

#[test]
fn usual_group_recovers_a_scaling_of_a_power_law() {
    // Ã^j(x̃) = c3^j/c1 A^j(x) with x̃ = 2x + 0.5, c1 = 1.5
    let e1 = eq(&["x^3"], "x", "x^2");
    let (c1, c3, c4) = (1.5, 2.0, 0.5);
    let xt = format!("((x - {c4})/{c3})");
    let e2 = eq(
        &[&format!("{}/{c1}*{xt}^3", c3 * c3)],
        &format!("{xt}/{c1}"),
        &format!("{c3}/{}*{xt}^2", c1 * c1),
    );
    let m = match_modulo_usual_group(&e1, &e2, 1e-8).expect("match");
    assert!(
        rel(m.c1, c1) < 1e-6 && rel(m.c3, c3) < 1e-6 && rel(m.c4, c4) < 1e-6,
        "{m:?}"
    );
    let back = match_modulo_usual_group(&e2, &e1, 1e-8).expect("inverse match");
    assert!(
        rel(back.c3, 1.0 / c3) < 1e-6 && rel(back.c1, 1.0 / c1) < 1e-6,
        "{back:?}"
    );
}

#[test]
fn report_lists_attempts() {
    let c = detect_subclass(&eq(&["1"], "0", "x"), DEFAULT_TOL).unwrap();
    let r = c.report();
    assert_eq!(r.get("tag"), Some(&crate::report::Value::Str("IV0_2".into())));
    assert!(r.to_json().contains("\"fit_order\""));
}
