use ftoc_core::expr::{differentiate, parse, simplify, Expr, Func};
use ftoc_core::fixedpoint::{power_method, SmallMatrix};
use ftoc_core::funcspace::{integrate, Interval, QuadratureConfig, RealFunction};
use ftoc_core::operators::{basis_closed_form, iterated_integral_one};
use ftoc_core::rng::CounterRng;
use ftoc_core::simplex::{
    lehmer_rank, permutations, remainder_by_slicing, simplex_volume_montecarlo,
    simplex_volume_montecarlo_parallel, MonteCarloConfig, SimplexSpec,
};
use ftoc_core::taylor::{expand, remainder_exact, TaylorExpansion};
use proptest::prelude::*;

fn small_const() -> impl Strategy<Value = f64> {
    (-150i32..=150).prop_map(|k| k as f64 / 100.0)
}

/// Expressions that stay smooth on the real line: divisors and log
/// arguments are `c + e^2` with `c ≥ 0.5`.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(Expr::Var), small_const().prop_map(Expr::Const)];
    leaf.prop_recursive(3, 24, 2, |inner| {
        let positive = (50i32..=200, inner.clone())
            .prop_map(|(c, e)| Expr::Const(c as f64 / 100.0) + e.powc(2.0));
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l + r),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l - r),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l * r),
            (inner.clone(), positive.clone()).prop_map(|(l, r)| l / r),
            inner.clone().prop_map(|e| -e),
            (inner.clone(), 2u32..=3).prop_map(|(e, k)| e.powc(k as f64)),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(Expr::exp),
            positive.prop_map(Expr::ln),
        ]
    })
}

/// Any tree the parser can produce: constants are non-negative.
fn canonical_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        prop_oneof![Just(0.0), Just(1.0), (0u32..1000).prop_map(|k| k as f64 / 8.0)]
            .prop_map(Expr::Const),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l + r),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l - r),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l * r),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| l / r),
            inner.clone().prop_map(|e| -e),
            (inner.clone(), -4i32..=4).prop_map(|(e, k)| e.powc(k as f64 / 2.0)),
            (inner, 0usize..4).prop_map(|(e, f)| {
                Expr::call([Func::Sin, Func::Cos, Func::Exp, Func::Ln][f], e)
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_central_difference(e in smooth_expr(), x in -2.0f64..2.0) {
        let h = 1e-5;
        let (f0, fp, fm) = (e.eval(x), e.eval(x + h), e.eval(x - h));
        prop_assume!(f0.is_ok() && fp.is_ok() && fm.is_ok());
        let (fp, fm) = (fp.unwrap(), fm.unwrap());
        prop_assume!(f0.unwrap().abs().max(fp.abs()).max(fm.abs()) <= 1e3);
        let exact = differentiate(&e).eval(x).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        prop_assert!((exact - fd).abs() <= 1e-5 * (1.0 + exact.abs()), "{e}: {exact} vs {fd}");
    }

    #[test]
    fn simplify_preserves_ieee_value(e in canonical_expr(), k in -30i32..30) {
        let x = k as f64 / 10.0;
        if let Ok(before) = e.eval(x) {
            let s = simplify(&e);
            let after = s.eval(x);
            prop_assert!(after.is_ok(), "{e} -> {s} fails at {x}");
            // IEEE equality: `0*e -> 0` may flip the sign of a zero result
            prop_assert!(after.unwrap() == before, "{} -> {}", e, s);
        }
    }

    #[test]
    fn render_then_parse_is_identity(e in canonical_expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn parse_errors_point_inside_input(s in "[x0-9+*/^() .a-z-]{0,16}") {
        if let Err(err) = parse(&s) {
            prop_assert!(err.offset <= s.len());
        }
    }

    #[test]
    fn integral_orientation(a in -2.0f64..2.0, x in -2.0f64..2.0) {
        let f = RealFunction::from_expr(parse("exp(x)*cos(x)").unwrap(), Interval::new(-2.0, 2.0).unwrap());
        let cfg = QuadratureConfig::default();
        let fwd = integrate(&f, a, x, &cfg).unwrap();
        let back = integrate(&f, x, a, &cfg).unwrap();
        prop_assert_eq!(fwd, -back);
    }

    #[test]
    fn basis_matches_closed_form(n in 1u32..=3, a in -3.0f64..3.0, d in -2.0f64..2.0) {
        let x = a + d;
        let cfg = QuadratureConfig::default();
        let v = iterated_integral_one(n, a, x, &cfg).unwrap();
        prop_assert!((v - basis_closed_form(n, a, x)).abs() <= 10.0 * cfg.abs_tolerance);
    }

    #[test]
    fn ftoc_step_matches_expand(n in 0usize..8, a in -1.0f64..1.0) {
        let f = parse("sin(x)*exp(x)").unwrap();
        let stepped = expand(&f, a, n).unwrap().ftoc_step().unwrap();
        let direct = expand(&f, a, n + 1).unwrap();
        prop_assert_eq!(stepped.coefficients(), direct.coefficients());
    }

    #[test]
    fn slicing_matches_exact_kernel(n in 0usize..=3, x in -1.0f64..1.5) {
        let f = parse("cos(x) + x^2").unwrap();
        let cfg = QuadratureConfig::default();
        let t = expand(&f, 0.25, n).unwrap();
        let exact = remainder_exact(&t, x, &cfg).unwrap();
        let sliced = remainder_by_slicing(&f, 0.25, n, x, &cfg).unwrap();
        prop_assert!((exact - sliced).abs() <= 1e-8);
    }

    #[test]
    fn cursor_agrees_with_random_access(seed: u64, start in 0u64..1_000_000) {
        let rng = CounterRng::new(seed);
        let mut c = rng.cursor(start);
        for i in start..start + 16 {
            prop_assert_eq!(c.next_u64(), rng.u64_at(i));
        }
    }

    #[test]
    fn power_method_residual_is_small(
        entries in prop::collection::vec(-1.0f64..1.0, 6),
        v0 in prop::collection::vec(0.1f64..1.0, 3),
    ) {
        let m = SmallMatrix::from_rows(&[
            vec![entries[0] + 3.0, entries[1], entries[2]],
            vec![entries[1], entries[3], entries[4]],
            vec![entries[2], entries[4], entries[5]],
        ]).unwrap();
        let tol = 1e-10;
        let r = power_method(&m, &v0, tol, 100_000).unwrap();
        prop_assert!(r.trace.converged);
        prop_assert!(r.residual(&m) <= 10.0 * tol * r.eigenvalue.abs());
        prop_assert_eq!(r.trace.residuals.len(), r.trace.iterations_used);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn parallel_monte_carlo_is_bit_identical(n in 1usize..=5, seed: u64, workers in 1usize..6) {
        let s = SimplexSpec::new(n, 0.0, 1.0).unwrap();
        let cfg = MonteCarloConfig::new(20_000, seed).unwrap();
        let a = simplex_volume_montecarlo(&s, &cfg).unwrap();
        let b = simplex_volume_montecarlo_parallel(&s, &cfg, workers).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn lehmer_ranks_enumerate_all_cells() {
    for n in 1..=6 {
        let ranks: Vec<usize> = permutations(n).iter().map(|p| lehmer_rank(p)).collect();
        assert_eq!(ranks, (0..ranks.len()).collect::<Vec<_>>());
    }
}

#[test]
fn ftoc_base_is_order_zero() {
    let t = TaylorExpansion::ftoc_base(&parse("exp(x)").unwrap(), 0.0).unwrap();
    assert_eq!(t.order(), 0);
    assert_eq!(t.coefficients(), &[1.0]);
}
