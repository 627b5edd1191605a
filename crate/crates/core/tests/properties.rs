use bkdv::expr::sample::{sample_equiv, sample_residual, SampleBox};
use bkdv::io::{format_reduced, format_transform, parse_reduced, parse_transform};
use bkdv::model::ReducedEquation;
use bkdv::verify::{residual_covariance_check, usual_closure_check, usual_compose, usual_transformation};
use bkdv::{parse_expression, Expr};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::x()),
        Just(Expr::t()),
        (-9i64..10).prop_map(Expr::int),
        (-9i64..10, 1i64..7).prop_map(|(p, q)| Expr::ratio(p, q)),
    ]
}

// smooth on the standard box whenever the division guard holds
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(&Expr::int(2).add(&b.sin()))),
            (inner.clone(), 0i64..4).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.atan()),
            inner.prop_map(|a| Expr::one().add(&a.powi(2)).sqrt()),
        ]
    })
}

fn poly() -> impl Strategy<Value = Expr> {
    prop::collection::vec(-3i64..4, 1..4).prop_map(|cs| {
        cs.iter().enumerate().fold(Expr::zero(), |acc, (k, &c)| {
            acc.add(&Expr::int(c).mul(&Expr::x().powi(k as i64)))
        })
    })
}

fn positive_poly() -> impl Strategy<Value = Expr> {
    poly().prop_map(|p| Expr::int(1).add(&p.powi(2)))
}

fn reduced() -> impl Strategy<Value = ReducedEquation> {
    (prop::collection::vec(poly(), 1..3), positive_poly(), poly(), poly()).prop_map(|(mut a, lead, a0, b)| {
        a.push(lead);
        ReducedEquation::new(a, a0, b, SampleBox::standard()).unwrap()
    })
}

fn nonzero() -> impl Strategy<Value = f64> {
    (0.2f64..3.0, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v })
}

fn usual() -> impl Strategy<Value = [f64; 4]> {
    (nonzero(), -2.0f64..2.0, nonzero(), -2.0f64..2.0).prop_map(|(a, b, c, d)| [a, b, c, d])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_reparses_to_the_same_function(e in expr()) {
        let back = parse_expression(&e.to_string()).unwrap();
        let rep = sample_equiv(&e, &back, SampleBox::standard(), 32, 1e-12, 5);
        prop_assume!(rep.is_ok());
        let rep = rep.unwrap();
        prop_assert!(rep.equal, "{} -> {} ({})", e, back, rep.max_dev);
    }

    #[test]
    fn derivative_of_display_matches(e in expr()) {
        let back = parse_expression(&e.to_string()).unwrap();
        let rep = sample_equiv(&e.diff(bkdv::Var::X), &back.diff(bkdv::Var::X), SampleBox::standard(), 32, 1e-10, 9);
        prop_assume!(rep.is_ok());
        prop_assert!(rep.unwrap().equal);
    }

    #[test]
    fn usual_group_laws(c in usual(), d in usual(), e in usual()) {
        let id = [1.0, 0.0, 1.0, 0.0];
        prop_assert_eq!(usual_compose(c, id), c);
        prop_assert_eq!(usual_compose(id, c), c);
        let l = usual_compose(usual_compose(c, d), e);
        let r = usual_compose(c, usual_compose(d, e));
        for k in 0..4 {
            prop_assert!((l[k] - r[k]).abs() <= 1e-12 * (1.0 + l[k].abs()));
        }
        prop_assert!(usual_closure_check(c, d, 1e-10).passed);
    }

    #[test]
    fn equation_files_round_trip(eq in reduced()) {
        let text = format_reduced(&eq);
        let back = parse_reduced(&text, "prop.eq", None).unwrap();
        prop_assert_eq!(back.order, eq.order);
        prop_assert_eq!(back.domain, eq.domain);
        for (a, b) in eq.a.iter().chain([&eq.a0, &eq.b]).zip(back.a.iter().chain([&back.a0, &back.b])) {
            prop_assert!(sample_equiv(a, b, eq.domain, 16, 1e-14, 1).unwrap().equal, "{} vs {}", a, b);
        }
    }

    #[test]
    fn transform_files_round_trip(c in usual()) {
        let tr = usual_transformation(c[0], c[1], c[2], c[3]);
        let back = parse_transform(&format_transform(&tr), "prop.tr").unwrap();
        for (a, b) in [(&tr.t, &back.t), (&tr.x1, &back.x1), (&tr.x0, &back.x0)] {
            prop_assert!(sample_equiv(a, b, SampleBox::standard(), 16, 1e-15, 1).unwrap().equal);
        }
    }

    #[test]
    fn affine_maps_are_covariant(eq in reduced(), c in usual(), seed in 0u64..1000) {
        let u = parse_expression("sin(x) + t*x^2/3").unwrap();
        let tr = usual_transformation(c[0], c[1], c[2], c[3]);
        let cov = residual_covariance_check(&eq, &tr, &u, eq.domain, 24, 1e-10, seed).unwrap();
        prop_assert!(cov.check.passed, "{}", cov.check.max_dev);
        let k = c[2] / (c[0] * c[0]);
        prop_assert!((cov.factor.0 - k).abs() <= 1e-12 * k.abs());
        prop_assert!((cov.factor.1 - k).abs() <= 1e-12 * k.abs());
    }

    #[test]
    fn cancellation_stays_within_the_rounding_bound(k in 1e3f64..1e9, p in 1i64..4) {
        // (x + k)^2 - x^2 - 2kx - k^2 is identically zero but rounds badly
        let x = Expr::x().mul(&Expr::int(p));
        let kk = Expr::float(k);
        let e = x.add(&kk).powi(2).sub(&x.powi(2)).sub(&Expr::int(2).mul(&kk).mul(&x)).sub(&kk.powi(2));
        prop_assert!(!e.is_zero());
        prop_assert!(sample_residual(&e, SampleBox::standard(), 16, 1e-14, 3).unwrap().equal);
        // a genuine error of relative size 1e-9 is still seen
        let off = e.add(&kk.powi(2).mul(&Expr::float(1e-9)));
        prop_assert!(!sample_residual(&off, SampleBox::standard(), 16, 1e-14, 3).unwrap().equal);
    }
}
