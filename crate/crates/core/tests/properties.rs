use brjuno_core::brjuno::{self, EvalConfig, RealFn};
use brjuno_core::cf::{self, CfKind};
use brjuno_core::dilog::li2;
use brjuno_core::real::{self, Real};
use brjuno_core::{complex, delta, Error, SamplePlan};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Signed;
use proptest::prelude::*;

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

/// Irrational-looking points: a double plus a low limb.
fn point(lo: f64, hi: f64) -> impl Strategy<Value = Real> {
    (lo..hi, -1.0f64..1.0).prop_map(|(x, t)| Real::new_add(x, t * 1e-18 * x.abs().max(1e-3)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn periodic_in_x(x in point(0.001, 0.999), k in -3i32..4) {
        for f in [RealFn::Brjuno, RealFn::Wilton, RealFn::Semi] {
            let a = f.eval(x, &cfg()).unwrap().value;
            let b = f.eval(x + k as f64, &cfg()).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{f:?}: {a} vs {b}");
        }
    }

    #[test]
    fn gauss_functional_equation(x in point(0.001, 0.999)) {
        let ax = real::frac(real::recip(x));
        let xf = real::to_f64(x);
        let b = brjuno::brjuno(x, &cfg()).unwrap().value;
        let b1 = brjuno::brjuno(ax, &cfg()).unwrap().value;
        prop_assert!((b + real::ln(x) - xf * b1).abs() <= 1e-10);
        let w = brjuno::wilton(x, &cfg()).unwrap().value;
        let w1 = brjuno::wilton(ax, &cfg()).unwrap().value;
        prop_assert!((w + real::ln(x) + xf * w1).abs() <= 1e-10);
    }

    #[test]
    fn converged_results_respect_tolerance(x in point(0.001, 0.999)) {
        for f in [RealFn::Brjuno, RealFn::Wilton, RealFn::Semi] {
            let r = f.eval(x, &cfg()).unwrap();
            prop_assert!(r.tail_bound >= 0.0 && r.value.is_finite());
            if r.converged {
                prop_assert!(r.tail_bound <= cfg().tail_tol);
            }
        }
    }

    #[test]
    fn closed_form_parts_have_their_symmetry(x in point(0.001, 0.999), k in -2i32..3) {
        let y = x + k as f64;
        prop_assert!((brjuno::b_minus_ext(y) + brjuno::b_minus_ext(-y)).abs() <= 1e-14);
        prop_assert!((brjuno::w_plus_ext(y) - brjuno::w_plus_ext(-y)).abs() <= 1e-12);
        prop_assert!((brjuno::b_minus_ext(y) - brjuno::b_minus_ext(x)).abs() <= 1e-12);
    }

    #[test]
    fn brjuno_defect_splits_off_b_minus(x in point(0.01, 0.49)) {
        // B − 2B₀⁺ = Δ⁺ + B⁻.
        let d = delta::delta_plus(x, &cfg()).unwrap();
        let b = delta::brjuno_defect(x, &cfg()).unwrap();
        prop_assert!((b - d - brjuno::b_minus_ext(x)).abs() <= 1e-11);
    }

    #[test]
    fn delta_minus_is_odd(x in point(0.01, 0.49)) {
        let a = delta::delta_minus_direct(x, &cfg()).unwrap();
        let b = delta::delta_minus_direct(-x, &cfg()).unwrap();
        prop_assert!((a + b).abs() <= 1e-11);
    }

    #[test]
    fn f_tilde_is_odd_and_periodic(x in point(0.01, 0.49), k in -2i32..3) {
        let y = x + k as f64;
        let a = brjuno::f_tilde(y).unwrap();
        prop_assert!((a + brjuno::f_tilde(-y).unwrap()).abs() <= 1e-11);
        prop_assert!((a - brjuno::f_func(x).unwrap()).abs() <= 1e-11);
    }

    #[test]
    fn exact_rationals_are_rejected(q in 2i64..5000, p0 in 1i64..5000) {
        let p = p0 % q;
        prop_assume!(p > 0);
        let x = real::ratio(p, q);
        for f in [RealFn::Brjuno, RealFn::Wilton, RealFn::Semi] {
            match f.eval(x, &cfg()) {
                Err(Error::RationalInput { p: a, q: b }) => {
                    let g = p.gcd(&q);
                    prop_assert_eq!((a, b), (p / g, q / g));
                }
                other => prop_assert!(false, "{:?} gave {:?}", f, other),
            }
        }
    }

    #[test]
    fn convergents_are_unimodular(x in point(0.001, 0.999)) {
        for kind in [CfKind::Gauss, CfKind::ByExcess, CfKind::NearestInteger] {
            let e = cf::expand(x, kind, 30).unwrap();
            let cv = cf::convergent_table(&e);
            for w in cv.windows(2) {
                let d: BigInt = &w[1].0 * &w[0].1 - &w[0].0 * &w[1].1;
                prop_assert_eq!(d.abs(), BigInt::from(1));
            }
        }
    }

    #[test]
    fn farey_triples_are_valid(q in 1i64..2000, p0 in 0i64..2000) {
        let p = p0 % (q + 1);
        prop_assume!(p.gcd(&q) == 1);
        let t = cf::farey_parents(p, q).unwrap();
        prop_assert!(t.is_valid());
        prop_assert_eq!((t.p1 + t.p2, t.q1 + t.q2), (p, q));
    }

    #[test]
    fn dilog_identities(re in -4.0f64..4.0, im in -4.0f64..4.0) {
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() > 1e-3 && (z - 1.0).norm() > 1e-3);
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        let one = Complex64::new(1.0, 0.0);
        let l = li2(z).unwrap();
        let refl = l + li2(one - z).unwrap() - (pi2_6 - z.ln() * (one - z).ln());
        prop_assert!(refl.norm() <= 1e-11, "reflection {}", refl.norm());
        if im != 0.0 {
            prop_assert!((li2(z.conj()).unwrap() - l.conj()).norm() <= 1e-13);
        }
    }

    #[test]
    fn semi_term_is_half_the_sum(q in 1i64..200, p0 in 0i64..200, re in -0.5f64..1.5, ly in -3.0f64..0.0) {
        let p = p0 % q.max(1);
        prop_assume!(p.gcd(&q) == 1);
        let t = cf::farey_parents(p, q).unwrap();
        let c = complex::term(&t, Complex64::new(re, 10f64.powf(ly)));
        prop_assert!((0.5 * (c.value_b + c.value_w) - c.value_semi).norm() <= 1e-12);
    }

    #[test]
    fn samples_respect_exclusion(seed in any::<u64>(), lo in 0.0f64..0.9) {
        let plan = SamplePlan::new(50, lo, lo + 0.1, seed);
        let xs = plan.draw().unwrap();
        for &x in &xs {
            prop_assert!(x >= lo && x < lo + 0.1);
            for q in 1..=plan.exclusion_q {
                let p = (x * q as f64).round();
                prop_assert!((x - p / q as f64).abs() >= plan.exclusion_radius_scale / (q * q) as f64);
            }
        }
    }
}
