use lowdisc::discriminant::kronecker;
use lowdisc::xi::{XiEvaluator, XiOptions};
use lowdisc::zeros::parse_zero_list;
use lowdisc::{enumerate_fundamental, is_fundamental, BigReal, FundamentalDiscriminant, Precision};
use proptest::prelude::*;

fn p30() -> Precision {
    Precision::new(30).unwrap()
}

fn any_disc(max: i64) -> impl Strategy<Value = FundamentalDiscriminant> {
    (3..max)
        .prop_filter("fundamental", |n| is_fundamental(-n))
        .prop_map(|n| FundamentalDiscriminant::new(-n).unwrap())
}

proptest! {
    #[test]
    fn character_is_completely_multiplicative(d in any_disc(200_000), a in 1u64..5000, b in 1u64..5000) {
        let chi = d.character();
        prop_assert_eq!(chi.chi(a * b), chi.chi(a) * chi.chi(b));
    }

    #[test]
    fn character_is_odd_and_periodic(d in any_disc(200_000), n in 1u64..100_000) {
        let chi = d.character();
        let q = d.d();
        prop_assert_eq!(chi.chi(q - 1), -1);
        prop_assert_eq!(chi.chi(n), chi.chi(n + q));
        prop_assert_eq!(chi.chi(n), kronecker(d.neg_d(), n));
        prop_assert_eq!(chi.chi(n) == 0, gcd(n, q) > 1);
    }

    #[test]
    fn enumeration_is_ordered_and_exact(lo in -3000i64..-3, w in 0i64..200) {
        let hi = (lo + w).min(-3);
        let v = enumerate_fundamental(lo, hi).unwrap();
        prop_assert!(v.windows(2).all(|p| p[0].d() < p[1].d()));
        let count = (lo..=hi).filter(|&n| is_fundamental(n)).count();
        prop_assert_eq!(v.len(), count);
    }

    #[test]
    fn decimal_strings_round_trip(x in -1e12f64..1e12) {
        let v = BigReal::from_f64(x, p30());
        let s = v.to_decimal_string();
        let back = BigReal::parse(&s, p30()).unwrap();
        prop_assert_eq!(back.to_decimal_string(), s);
        let rel = if x == 0.0 { 0.0 } else { ((&back - &v) / &v).abs().to_f64() };
        prop_assert!(rel <= 5e-30, "{}", rel);
    }

    #[test]
    fn zero_lists_parse_sorted(mut v in proptest::collection::btree_set(1u32..1_000_000, 1..30)) {
        let text: String = v.iter().rev().map(|k| format!("{}e-3\n", k)).collect();
        let parsed = parse_zero_list(&text, p30()).unwrap();
        let want: Vec<u32> = std::mem::take(&mut v).into_iter().collect();
        prop_assert_eq!(parsed.len(), want.len());
        for (a, k) in parsed.iter().zip(want) {
            prop_assert!(*a == BigReal::ratio(k as i64, 1000, p30()));
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // ∂_t Ξ_t = −∂_x² Ξ_t, by a centered difference in t.
    #[test]
    fn xi_solves_backward_heat_equation(
        d in any_disc(3000),
        t in -0.3f64..0.3,
        x in 0.0f64..4.0,
    ) {
        let q = p30();
        let h = 1e-5;
        let at = |tt: f64| {
            XiEvaluator::new(d, &XiOptions::new(q).t(BigReal::from_f64(tt, q)).height(5.0)).unwrap()
        };
        let e = at(t);
        let xw = BigReal::from_f64(x, e.working_precision());
        let second = e.xi_derivative_w(&xw, 2).unwrap();
        let xq = BigReal::from_f64(x, q);
        let dt = (at(t + h).xi_t(&xq).unwrap() - at(t - h).xi_t(&xq).unwrap()).to_f64() / (2.0 * h);
        let scale = e.xi_w(&BigReal::zero(e.working_precision())).unwrap().abs().to_f64()
            .max(second.abs().to_f64());
        prop_assert!((dt + second.to_f64()).abs() < 1e-8 * scale, "{} vs {}", dt, second);
    }

    #[test]
    fn xi_is_even(d in any_disc(3000), x in 0.0f64..6.0) {
        let q = p30();
        let e = XiEvaluator::new(d, &XiOptions::new(q).height(6.0)).unwrap();
        let w = e.working_precision();
        let xw = BigReal::from_f64(x, w);
        let a = e.xi_w(&xw).unwrap();
        let b = e.xi_w(&-&xw).unwrap();
        prop_assert!((&a - &b).abs() <= *e.err_w());
    }
}
