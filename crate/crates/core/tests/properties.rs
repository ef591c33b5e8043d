use mfps::composition::{compose, g_shifted_sum, ComposeOptions};
use mfps::multiindex::{enumerate_up_to, MultiIndex};
use mfps::outer_seq::{partial_sum_verdict, CoeffSequence, ConvergenceVerdict, VerdictOptions};
use mfps::rdl::{rdl_verify, RdlStatus};
use mfps::series::{Mode, Scalar, TruncatedSeries};
use proptest::prelude::*;

fn float_series(q: usize, k: usize, b0: f64, rest: &[f64]) -> TruncatedSeries {
    let terms = enumerate_up_to(q, k)
        .into_iter()
        .zip(std::iter::once(b0).chain(rest.iter().copied()));
    TruncatedSeries::from_terms(q, k, Mode::Binary64, terms.map(|(c, v)| (c, Scalar::Float(v)))).unwrap()
}

fn arb_inner() -> impl Strategy<Value = TruncatedSeries> {
    (1usize..=2, 1usize..=3, -0.4f64..0.4).prop_flat_map(|(q, k, b0)| {
        let n = enumerate_up_to(q, k).len();
        proptest::collection::vec(-1.0f64..1.0, n - 1).prop_map(move |rest| float_series(q, k, b0, &rest))
    })
}

fn arb_outer() -> impl Strategy<Value = CoeffSequence> {
    prop_oneof![
        Just("1/fact(n)"),
        Just("(1/2)^n"),
        Just("(n+1)*(1/2)^n"),
        Just("(-1)^n*(1/2)^n"),
        Just("(-1)^n/fact(n)"),
    ]
    .prop_map(|t| CoeffSequence::parse_rule(t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composition_agrees_with_direct_partial_sums(g in arb_outer(), f in arb_inner()) {
        let opts = ComposeOptions::default();
        let r = compose(&g, &f, &opts).unwrap();
        prop_assert_eq!(r.exists(), Some(true));
        let residual = r.cross_check_residual.unwrap();
        prop_assert!(residual <= opts.tolerance_consistency, "residual {}", residual);
        let h = r.result.unwrap();
        prop_assert!(h.terms().all(|(c, _)| c.total_degree() <= f.max_degree()));
    }

    #[test]
    fn constant_inner_matches_shifted_sum(g in arb_outer(), b in -0.9f64..0.9, q in 1usize..=3) {
        let opts = ComposeOptions::default();
        let f = TruncatedSeries::constant(q, 2, Scalar::Float(b));
        let r = compose(&g, &f, &opts).unwrap();
        let direct = g_shifted_sum(&g, &Scalar::Float(b), 0, &opts.verdict).unwrap();
        let h = r.result.unwrap();
        prop_assert_eq!(&h.constant_term(), direct.value().unwrap());
        prop_assert!(h.is_constant());
    }

    #[test]
    fn distributive_law_is_symmetric(a in arb_outer(), b in arb_outer(), p in arb_inner()) {
        let opts = ComposeOptions::default();
        let r1 = rdl_verify(&a, &b, &p, &opts).unwrap();
        let r2 = rdl_verify(&b, &a, &p, &opts).unwrap();
        prop_assert_eq!(&r1.status, &r2.status);
        prop_assert!(matches!(r1.status, RdlStatus::Holds { .. }), "{:?}", r1.status);
    }

    #[test]
    fn converged_geometric_values_lie_within_bounds(num in -9i64..=9, den in 10i64..=40) {
        let r = num as f64 / den as f64;
        let v = partial_sum_verdict(|n| Ok(r.powi(n as i32)), &VerdictOptions::default()).unwrap();
        let ConvergenceVerdict::Converged { value, error_bound, .. } = v else {
            return Err(TestCaseError::fail(format!("{v:?}")));
        };
        prop_assert!((value.to_f64() - 1.0 / (1.0 - r)).abs() <= error_bound);
    }

    #[test]
    fn nonunit_distributive_law_is_exact(
        p in proptest::collection::vec((-3i64..=3, 1i64..=3), 5),
        a in proptest::collection::vec(0i64..=4, 1..5),
    ) {
        let q = 2;
        let k = 2;
        let idx: Vec<MultiIndex> = enumerate_up_to(q, k).into_iter().skip(1).collect();
        let p = TruncatedSeries::from_terms(
            q,
            k,
            Mode::Exact,
            idx.into_iter().zip(p).map(|(c, (n, d))| (c, Scalar::ratio(n, d))),
        )
        .unwrap();
        let a = CoeffSequence::list(a.into_iter().map(|v| Scalar::from_i64(v, Mode::Exact)).collect());
        let b = CoeffSequence::parse_rule("(n+1)/(n+2)").unwrap();
        let r = rdl_verify(&a, &b, &p, &ComposeOptions::default()).unwrap();
        prop_assert_eq!(r.status, RdlStatus::Holds { max_discrepancy: 0.0 });
    }
}

#[test]
fn divergent_inner_outside_radius() {
    let g = CoeffSequence::parse_rule("2^n").unwrap();
    let f = float_series(1, 2, 0.75, &[1.0, 0.0]);
    let r = compose(&g, &f, &ComposeOptions::default()).unwrap();
    assert_eq!(r.exists(), Some(false));
    assert!(r.result.is_none());
}
