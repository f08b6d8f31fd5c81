//! Invariant suites for every module, runnable as one deterministic batch.
//!
//! Each suite returns a list of [`CheckReport`]s. Randomised cases draw
//! from [`CounterRng`] streams derived from the configured seed, so a run is
//! reproducible bit for bit.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{differentiate, parse, simplify, Expr, Func};
use crate::fixedpoint::{
    iterate_scalar, newton, power_method, root_as_fixed_point, IterationTrace, SmallMatrix,
};
use crate::funcspace::{integrate, sup_abs, Interval, QuadratureConfig, RealFunction};
use crate::operators::{
    apply, basis_closed_form, ftoc_operator, iterated_integral_one, monotone_bound, OperatorNode,
};
use crate::report::{CheckReport, WorstCase};
use crate::rng::{CounterRng, Cursor};
use crate::simplex::{
    ordering_partition_check, remainder_by_slicing, simplex_volume_exact,
    simplex_volume_montecarlo, MonteCarloConfig, SimplexSpec,
};
use crate::taylor::{
    expand, max_pairwise_gap, remainder_bound, report_for, verify_exchange, TaylorExpansion,
    TwoVarIntegrand, MAX_NESTED_DEPTH,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Expr,
    Funcspace,
    Operators,
    Taylor,
    Simplex,
    Fixedpoint,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Expr,
        Suite::Funcspace,
        Suite::Operators,
        Suite::Taylor,
        Suite::Simplex,
        Suite::Fixedpoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Expr => "expr",
            Suite::Funcspace => "funcspace",
            Suite::Operators => "operators",
            Suite::Taylor => "taylor",
            Suite::Simplex => "simplex",
            Suite::Fixedpoint => "fixedpoint",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub quadrature: QuadratureConfig,
    pub seed: u64,
    /// Fault injection: multiplies every `I_a^n 1` value by `1 + ε` before
    /// the basis check compares it with the closed form.
    pub perturb_basis: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            quadrature: QuadratureConfig::default(),
            seed: 1,
            perturb_basis: 0.0,
        }
    }
}

impl VerifyConfig {
    fn stream(&self, id: u64) -> Cursor {
        CounterRng::new(self.seed).split(id).cursor(0)
    }
}

/// A test function with its base point and probe interval.
///
/// Intervals keep `sup |f^{(N+1)}| ≤ 1e3` for `N ≤ 5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolEntry {
    pub name: &'static str,
    pub text: &'static str,
    pub a: f64,
    pub lo: f64,
    pub hi: f64,
}

impl PoolEntry {
    pub fn expr(&self) -> Expr {
        parse(self.text).expect("pool expressions parse")
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.lo, self.hi).expect("pool interval is proper")
    }

    pub fn function(&self) -> RealFunction {
        RealFunction::from_expr(self.expr(), self.domain()).with_label(self.name)
    }

    pub fn probe(&self, cur: &mut Cursor) -> f64 {
        cur.uniform(self.lo, self.hi)
    }

    /// Probe in `[a, hi]`.
    pub fn probe_right(&self, cur: &mut Cursor) -> f64 {
        cur.uniform(self.a, self.hi)
    }
}

pub fn function_pool() -> Vec<PoolEntry> {
    vec![
        PoolEntry { name: "exp", text: "exp(x)", a: 0.0, lo: -1.5, hi: 1.5 },
        PoolEntry { name: "sin", text: "sin(x)", a: 0.3, lo: -1.5, hi: 2.0 },
        PoolEntry { name: "cos", text: "cos(x)", a: -0.5, lo: -2.0, hi: 1.5 },
        PoolEntry { name: "quintic", text: "x^5 - 2*x^3 + x", a: 0.5, lo: -1.0, hi: 1.5 },
        PoolEntry { name: "reciprocal", text: "(1 + x)^(-1)", a: 0.5, lo: 0.0, hi: 1.5 },
        PoolEntry { name: "log1p", text: "ln(1 + x)", a: 0.5, lo: 0.0, hi: 1.5 },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let checks = match suite {
        Suite::Expr => expr_suite(cfg),
        Suite::Funcspace => funcspace_suite(cfg),
        Suite::Operators => operators_suite(cfg),
        Suite::Taylor => taylor_suite(cfg),
        Suite::Simplex => simplex_suite(cfg),
        Suite::Fixedpoint => fixedpoint_suite(cfg),
    };
    SuiteReport { suite, checks }
}

pub fn run(suites: &[Suite], cfg: &VerifyConfig) -> Vec<SuiteReport> {
    suites.iter().map(|&s| run_suite(s, cfg)).collect()
}

pub fn all_pass(reports: &[SuiteReport]) -> bool {
    reports.iter().all(SuiteReport::pass)
}

/// Runs `body` against a fresh [`WorstCase`]; an error fails the check.
fn guarded(name: &str, body: impl FnOnce(&mut WorstCase) -> Result<()>) -> CheckReport {
    let mut worst = WorstCase::new(name);
    match body(&mut worst) {
        Ok(()) => worst.finish(),
        Err(e) => CheckReport::failed(name, e.to_string()),
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Random expression whose value and derivatives stay moderate on
/// `[-2, 2]`: divisors and logarithm arguments are kept positive.
pub fn random_smooth_expr(cur: &mut Cursor, depth: u32) -> Expr {
    if depth == 0 || cur.below(4) == 0 {
        return if cur.below(2) == 0 {
            Expr::Var
        } else {
            Expr::Const(round2(cur.uniform(-1.5, 1.5)))
        };
    }
    let d = depth - 1;
    let positive = |cur: &mut Cursor| {
        Expr::Const(round2(cur.uniform(0.5, 2.0))) + random_smooth_expr(cur, d).powc(2.0)
    };
    match cur.below(10) {
        0 => random_smooth_expr(cur, d) + random_smooth_expr(cur, d),
        1 => random_smooth_expr(cur, d) - random_smooth_expr(cur, d),
        2 => random_smooth_expr(cur, d) * random_smooth_expr(cur, d),
        3 => random_smooth_expr(cur, d) / positive(cur),
        4 => -random_smooth_expr(cur, d),
        5 => random_smooth_expr(cur, d).powc((2 + cur.below(2)) as f64),
        6 => random_smooth_expr(cur, d).sin(),
        7 => random_smooth_expr(cur, d).cos(),
        8 => random_smooth_expr(cur, d).exp(),
        _ => positive(cur).ln(),
    }
}

/// Random tree over the whole grammar, unsimplified and with plenty of
/// `0` and `1` constants. Constants are non-negative, the form the parser
/// produces, so these trees survive a render/parse round trip.
pub fn random_expr(cur: &mut Cursor, depth: u32) -> Expr {
    const CONSTS: [f64; 6] = [0.0, 1.0, 2.0, 0.5, 3.0, 0.1];
    const EXPONENTS: [f64; 8] = [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 1.5];
    if depth == 0 || cur.below(5) == 0 {
        return match cur.below(3) {
            0 => Expr::Var,
            1 => Expr::Const(CONSTS[cur.below(CONSTS.len() as u64) as usize]),
            _ => Expr::Const(round2(cur.uniform(0.0, 4.0))),
        };
    }
    let d = depth - 1;
    match cur.below(9) {
        0 => random_expr(cur, d) + random_expr(cur, d),
        1 => random_expr(cur, d) - random_expr(cur, d),
        2 => random_expr(cur, d) * random_expr(cur, d),
        3 => random_expr(cur, d) / random_expr(cur, d),
        4 => -random_expr(cur, d),
        5 => random_expr(cur, d).powc(EXPONENTS[cur.below(EXPONENTS.len() as u64) as usize]),
        _ => {
            let func = [Func::Sin, Func::Cos, Func::Exp, Func::Ln][cur.below(4) as usize];
            Expr::call(func, random_expr(cur, d))
        }
    }
}

// ---------------------------------------------------------------- expr

fn expr_suite(cfg: &VerifyConfig) -> Vec<CheckReport> {
    vec![
        derivative_vs_finite_difference(cfg),
        simplify_preserves_value(cfg),
        parse_render_roundtrip(cfg),
    ]
}

pub const FD_STEP: f64 = 1e-5;

fn derivative_vs_finite_difference(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(101);
    guarded("derivative_vs_finite_difference", |w| {
        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < 200 {
            attempts += 1;
            if attempts > 20_000 {
                return Err(Error::precondition("too few well-conditioned random cases"));
            }
            let e = random_smooth_expr(&mut cur, 3);
            let x = cur.uniform(-2.0, 2.0);
            let h = FD_STEP;
            let (Ok(fp), Ok(fm), Ok(f0)) = (e.eval(x + h), e.eval(x - h), e.eval(x)) else {
                continue;
            };
            if f0.abs().max(fp.abs()).max(fm.abs()) > 1e3 {
                continue;
            }
            let de = differentiate(&e);
            let value = de.eval(x)?;
            let fd = (fp - fm) / (2.0 * h);
            accepted += 1;
            w.observe((value - fd).abs(), 1e-5 * (1.0 + value.abs()), || {
                format!("d/dx {e} at x = {x}")
            });
        }
        Ok(())
    })
}

fn simplify_preserves_value(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(102);
    guarded("simplify_preserves_value", |w| {
        let mut compared = 0;
        while compared < 100 {
            let e = random_expr(&mut cur, 4);
            let x = round2(cur.uniform(-3.0, 3.0));
            let Ok(before) = e.eval(x) else { continue };
            let s = simplify(&e);
            compared += 1;
            let mismatch = match s.eval(x) {
                Ok(after) if after == before => 0.0,
                Ok(after) => (after - before).abs().max(f64::MIN_POSITIVE),
                Err(_) => f64::INFINITY,
            };
            w.observe(mismatch, 0.0, || format!("{e} -> {s} at x = {x}"));
        }
        Ok(())
    })
}

fn parse_render_roundtrip(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(103);
    guarded("parse_render_roundtrip", |w| {
        for _ in 0..200 {
            let e = random_expr(&mut cur, 4);
            let text = e.to_string();
            let same = parse(&text).map(|p| p == e).unwrap_or(false);
            w.observe(if same { 0.0 } else { 1.0 }, 0.0, || text.clone());
        }
        for entry in function_pool() {
            let e = entry.expr();
            let same = parse(&e.to_string()).map(|p| p == e).unwrap_or(false);
            w.observe(if same { 0.0 } else { 1.0 }, 0.0, || entry.text.to_string());
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- funcspace

fn funcspace_suite(cfg: &VerifyConfig) -> Vec<CheckReport> {
    vec![
        integrate_linearity(cfg),
        integrate_monotonicity(cfg),
        integrate_additivity(cfg),
        sup_abs_dominance(cfg),
    ]
}

fn random_pair(cur: &mut Cursor, pool: &[PoolEntry]) -> (PoolEntry, PoolEntry, Interval) {
    loop {
        let p = pool[cur.below(pool.len() as u64) as usize];
        let q = pool[cur.below(pool.len() as u64) as usize];
        if let Some(iv) = p.domain().intersect(&q.domain()) {
            return (p, q, iv);
        }
    }
}

fn integrate_linearity(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(201);
    let q = &cfg.quadrature;
    guarded("integrate_linearity", |w| {
        let pool = function_pool();
        for _ in 0..20 {
            let (p, r, iv) = random_pair(&mut cur, &pool);
            let (alpha, beta) = (cur.uniform(-2.0, 2.0), cur.uniform(-2.0, 2.0));
            let a = cur.uniform(iv.a(), iv.b());
            let x = cur.uniform(iv.a(), iv.b());
            let (f, g) = (p.function().with_domain(iv), r.function().with_domain(iv));
            let combined = RealFunction::linear_combination(alpha, &f, beta, &g)?;
            let lhs = integrate(&combined, a, x, q)?;
            let rhs = alpha * integrate(&f, a, x, q)? + beta * integrate(&g, a, x, q)?;
            w.observe((lhs - rhs).abs(), 3.0 * q.abs_tolerance, || {
                format!("{alpha}·{} + {beta}·{} on [{a}, {x}]", p.name, r.name)
            });
        }
        Ok(())
    })
}

fn integrate_monotonicity(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(202);
    let q = &cfg.quadrature;
    guarded("integrate_monotonicity", |w| {
        let pool = function_pool();
        for _ in 0..20 {
            let (p, r, iv) = random_pair(&mut cur, &pool);
            let f = p.function().with_domain(iv);
            let h = r.function().with_domain(iv);
            let bump = RealFunction::from_fn(format!("|{}|", r.name), iv, move |t| {
                Ok(h.eval(t)?.abs())
            });
            let g = f.plus(&bump)?;
            let a = cur.uniform(iv.a(), iv.b());
            let x = cur.uniform(a, iv.b());
            let excess = integrate(&f, a, x, q)? - integrate(&g, a, x, q)?;
            w.observe(excess.max(0.0), 2.0 * q.abs_tolerance, || {
                format!("{} ≤ {} + |{}| on [{a}, {x}]", p.name, p.name, r.name)
            });
        }
        Ok(())
    })
}

fn integrate_additivity(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(203);
    let q = &cfg.quadrature;
    guarded("integrate_additivity", |w| {
        for p in function_pool() {
            let f = p.function();
            for _ in 0..5 {
                let (a, c, x) = (p.probe(&mut cur), p.probe(&mut cur), p.probe(&mut cur));
                let split = integrate(&f, a, c, q)? + integrate(&f, c, x, q)?;
                let whole = integrate(&f, a, x, q)?;
                w.observe((split - whole).abs(), 3.0 * q.abs_tolerance, || {
                    format!("{} with a = {a}, c = {c}, x = {x}", p.name)
                });
            }
        }
        Ok(())
    })
}

fn sup_abs_dominance(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(204);
    guarded("sup_abs_dominance", |w| {
        for p in function_pool() {
            let f = p.function();
            let sup = sup_abs(&f, &p.domain(), &cfg.quadrature)?;
            for _ in 0..100 {
                let t = p.probe(&mut cur);
                let excess = f.eval(t)?.abs() - sup;
                w.observe(excess.max(0.0), 1e-12, || format!("{} at t = {t}", p.name));
            }
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- operators

fn operators_suite(cfg: &VerifyConfig) -> Vec<CheckReport> {
    vec![
        associativity(cfg),
        ftoc_fixed_point(cfg),
        monotone_bound_check(cfg),
        basis_closed_form_check(cfg),
    ]
}

fn random_operator(cur: &mut Cursor, a: f64) -> OperatorNode {
    match cur.below(4) {
        0 => OperatorNode::d(),
        1 => OperatorNode::integrate_from(a),
        2 => OperatorNode::evaluate_at(a),
        _ => OperatorNode::Scale(round2(cur.uniform(-2.0, 2.0))),
    }
}

fn associativity(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(301);
    let q = &cfg.quadrature;
    guarded("associativity", |w| {
        let pool = function_pool();
        for _ in 0..8 {
            let p = pool[cur.below(pool.len() as u64) as usize];
            let f = p.function();
            let (j, k, l) = (
                random_operator(&mut cur, p.a),
                random_operator(&mut cur, p.a),
                random_operator(&mut cur, p.a),
            );
            let right = OperatorNode::compose(j.clone(), OperatorNode::compose(k.clone(), l.clone()));
            let left = OperatorNode::compose(OperatorNode::compose(j, k), l);
            let (fr, fl) = (apply(&right, &f, q)?, apply(&left, &f, q)?);
            for _ in 0..50 {
                let x = p.probe(&mut cur);
                w.observe((fr.eval(x)? - fl.eval(x)?).abs(), 5.0 * q.abs_tolerance, || {
                    format!("{left} vs {right} on {} at x = {x}", p.name)
                });
            }
        }
        Ok(())
    })
}

fn ftoc_fixed_point(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(302);
    let q = &cfg.quadrature;
    guarded("ftoc_fixed_point", |w| {
        for p in function_pool() {
            let f = p.function();
            let lf = apply(&ftoc_operator(p.a), &f, q)?;
            for _ in 0..20 {
                let x = p.probe(&mut cur);
                w.observe((lf.eval(x)? - f.eval(x)?).abs(), 5.0 * q.abs_tolerance, || {
                    format!("{} at x = {x}", p.name)
                });
            }
        }
        Ok(())
    })
}

fn monotone_bound_check(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(303);
    let q = &cfg.quadrature;
    guarded("monotone_bound", |w| {
        for p in function_pool() {
            let g = p.function();
            for n in 1..=3u32 {
                let ig = apply(&OperatorNode::power(OperatorNode::integrate_from(p.a), n), &g, q)?;
                for _ in 0..20 {
                    let x = p.probe_right(&mut cur);
                    let bound = monotone_bound(n, &g, p.a, x, q)?;
                    let excess = ig.eval(x)?.abs() - bound * (1.0 + 1e-9);
                    w.observe(excess.max(0.0), 0.0, || {
                        format!("I^{n} {} at x = {x}, bound {bound:e}", p.name)
                    });
                }
            }
        }
        Ok(())
    })
}

/// Name of the check that the basis fault injection must trip.
pub const BASIS_CHECK: &str = "basis_closed_form";

fn basis_closed_form_check(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(304);
    let q = &cfg.quadrature;
    let factor = 1.0 + cfg.perturb_basis;
    guarded(BASIS_CHECK, |w| {
        for n in 1..=4u32 {
            for _ in 0..20 {
                let a = round2(cur.uniform(-3.0, 3.0));
                let x = a + cur.uniform(-2.0, 2.0);
                let value = iterated_integral_one(n, a, x, q)? * factor;
                let closed = basis_closed_form(n, a, x);
                w.observe((value - closed).abs(), 10.0 * q.abs_tolerance, || {
                    format!("n = {n}, a = {a}, x = {x}")
                });
            }
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- taylor

fn taylor_suite(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let mut checks = remainder_pool_checks(cfg);
    checks.extend([
        bound_rate(cfg),
        polynomial_exactness(cfg),
        ftoc_step_consistency(cfg),
        exchange_identity(cfg),
    ]);
    checks
}

/// Threshold on the pairwise gap among the remainder forms at order `n`.
pub fn agreement_threshold(n: usize) -> f64 {
    if n < MAX_NESTED_DEPTH {
        1e-6
    } else {
        1e-7
    }
}

/// One pass over pool × `N ∈ 0..=5` × 10 probes, shared by the checks that
/// compare remainder forms.
fn remainder_pool_checks(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let names = [
        "remainder_agreement",
        "nested_exchange_agreement",
        "four_way_agreement",
        "bound_validity",
    ];
    let mut agreement = WorstCase::new(names[0]);
    let mut nested = WorstCase::new(names[1]);
    let mut four_way = WorstCase::new(names[2]);
    let mut bound = WorstCase::new(names[3]);
    let mut cur = cfg.stream(401);
    let q = &cfg.quadrature;
    let outcome = (|| -> Result<()> {
        for p in function_pool() {
            let f = p.expr();
            for n in 0..=5usize {
                let t = expand(&f, p.a, n)?;
                for _ in 0..10 {
                    let x = p.probe(&mut cur);
                    let r = report_for(&t, x, q)?;
                    let sliced = remainder_by_slicing(&f, p.a, n, x, q)?;
                    let case = || format!("{} N = {n} x = {x}", p.name);
                    agreement.observe(
                        (r.exact_integral - r.direct).abs(),
                        f64::max(1e-8, 1e-6 * r.direct.abs()),
                        case,
                    );
                    if let (Some(v), true) = (r.nested_integral, n < 3) {
                        nested.observe((v - r.exact_integral).abs(), 1e-6, case);
                    }
                    let mut values = r.remainders();
                    values.push(sliced);
                    four_way.observe(max_pairwise_gap(&values), agreement_threshold(n), case);
                    if x >= p.a {
                        let excess = r.direct.abs() - (r.bound * (1.0 + 1e-9) + 1e-12);
                        bound.observe(excess.max(0.0), 0.0, case);
                    }
                }
            }
        }
        Ok(())
    })();
    match outcome {
        Ok(()) => vec![agreement.finish(), nested.finish(), four_way.finish(), bound.finish()],
        Err(e) => names
            .iter()
            .map(|n| CheckReport::failed(*n, e.to_string()))
            .collect(),
    }
}

fn bound_rate(cfg: &VerifyConfig) -> CheckReport {
    let q = &cfg.quadrature;
    guarded("bound_rate", |w| {
        let f = parse("exp(x)")?;
        let mut t = expand(&f, 0.0, 0)?;
        let mut previous = remainder_bound(&t, 0.5, q)?;
        for n in 0..8usize {
            t = t.ftoc_step()?;
            let next = remainder_bound(&t, 0.5, q)?;
            let expected = 0.5 / (n as f64 + 2.0);
            w.observe((next / previous - expected).abs(), 1e-9, || format!("N = {n}"));
            previous = next;
        }
        Ok(())
    })
}

fn polynomial_exactness(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(402);
    let q = &cfg.quadrature;
    guarded("polynomial_exactness", |w| {
        let cases = [("x^3 - x", 3usize), ("x^5 - 2*x^3 + x", 5), ("2*x^2 + 1", 2), ("7", 0)];
        for (text, degree) in cases {
            let f = parse(text)?;
            for n in degree..=5 {
                let a = round2(cur.uniform(-1.0, 1.0));
                let t = expand(&f, a, n)?;
                for _ in 0..3 {
                    let x = cur.uniform(-1.5, 1.5);
                    let r = report_for(&t, x, q)?;
                    let sliced = remainder_by_slicing(&f, a, n, x, q)?;
                    let mut values = r.remainders();
                    values.push(sliced);
                    let worst = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
                    w.observe(worst, 10.0 * q.abs_tolerance, || {
                        format!("{text} N = {n} a = {a} x = {x}")
                    });
                }
            }
        }
        Ok(())
    })
}

fn ftoc_step_consistency(_cfg: &VerifyConfig) -> CheckReport {
    guarded("ftoc_step_consistency", |w| {
        for p in function_pool() {
            let f = p.expr();
            let mut stepped = TaylorExpansion::ftoc_base(&f, p.a)?;
            for n in 1..=8usize {
                stepped = stepped.ftoc_step()?;
                let direct = expand(&f, p.a, n)?;
                let same = stepped.coefficients().len() == direct.coefficients().len()
                    && stepped
                        .coefficients()
                        .iter()
                        .zip(direct.coefficients())
                        .all(|(u, v)| u.to_bits() == v.to_bits());
                w.observe(if same { 0.0 } else { 1.0 }, 0.0, || {
                    format!("{} N = {n}", p.name)
                });
            }
        }
        Ok(())
    })
}

/// Integrand pairs `(left, right)` for the two-variable exchange check.
pub const EXCHANGE_CASES: [(&str, &str); 10] = [
    ("1", "1"),
    ("x", "1"),
    ("1", "x"),
    ("x", "x^2"),
    ("sin(x)", "cos(x)"),
    ("exp(x)", "1"),
    ("exp(-x)", "x + 1"),
    ("cos(x)", "exp(x)"),
    ("(1 + x^2)^(-1)", "sin(x)"),
    ("ln(2 + x)", "x^3"),
];

fn exchange_identity(cfg: &VerifyConfig) -> CheckReport {
    let q = &cfg.quadrature;
    guarded("exchange_identity", |w| {
        let (a, u) = (-0.5, 1.0);
        for (left, right) in EXCHANGE_CASES {
            let g = TwoVarIntegrand::new(parse(left)?, parse(right)?);
            let r = verify_exchange(&g, a, u, q)?;
            w.observe(r.gap, 1e-8, || format!("{g}"));
        }
        let r = verify_exchange(&TwoVarIntegrand::one(), a, u, q)?;
        let closed = (u - a) * (u - a) / 2.0;
        for side in [r.inner_first, r.outer_first] {
            w.observe((side - closed).abs(), 10.0 * q.abs_tolerance, || {
                "g ≡ 1 against (u - a)^2/2".to_string()
            });
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- simplex

pub const MONTE_CARLO_SAMPLES: u64 = 1_000_000;
pub const PARTITION_SAMPLES: u64 = 600_000;

fn simplex_suite(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let mut checks = vec![montecarlo_volume(cfg)];
    match ordering_partition_check(3, &MonteCarloConfig { samples: PARTITION_SAMPLES, seed: cfg.seed })
    {
        Ok(r) => checks.extend(r.checks()),
        Err(e) => checks.push(CheckReport::failed("tiling[n=3]", e.to_string())),
    }
    checks.push(slicing_consistency(cfg));
    checks.push(dimensional_recursion(cfg));
    checks
}

fn montecarlo_volume(cfg: &VerifyConfig) -> CheckReport {
    guarded("montecarlo_volume", |w| {
        for n in 2..=4usize {
            let s = SimplexSpec::new(n, 0.0, 1.0)?;
            let mc = MonteCarloConfig::new(MONTE_CARLO_SAMPLES, cfg.seed.wrapping_add(n as u64))?;
            let m = simplex_volume_montecarlo(&s, &mc)?;
            let exact = simplex_volume_exact(&s);
            w.observe((m.estimate - exact).abs(), 4.0 * m.std_error, || {
                format!("n = {n}, estimate {} vs {exact}", m.estimate)
            });
        }
        Ok(())
    })
}

fn slicing_consistency(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(501);
    let q = &cfg.quadrature;
    guarded("slicing_consistency", |w| {
        let pool = function_pool();
        for _ in 0..20 {
            let p = pool[cur.below(pool.len() as u64) as usize];
            let n = cur.below(4) as usize;
            let x = p.probe(&mut cur);
            let f = p.expr();
            let sliced = remainder_by_slicing(&f, p.a, n, x, q)?;
            let exact = report_for(&expand(&f, p.a, n)?, x, q)?.exact_integral;
            w.observe((sliced - exact).abs(), 1e-8, || {
                format!("{} N = {n} x = {x}", p.name)
            });
        }
        Ok(())
    })
}

fn dimensional_recursion(cfg: &VerifyConfig) -> CheckReport {
    let mut cur = cfg.stream(502);
    guarded("dimensional_recursion", |w| {
        let mut spans = vec![(0.0, 1.0)];
        for _ in 0..4 {
            let a = round2(cur.uniform(-2.0, 2.0));
            spans.push((a, a + cur.uniform(0.1, 2.0)));
        }
        for (a, x) in spans {
            for n in 2..=12usize {
                let ratio = simplex_volume_exact(&SimplexSpec::new(n, a, x)?)
                    / simplex_volume_exact(&SimplexSpec::new(n - 1, a, x)?);
                w.observe((ratio - (x - a) / n as f64).abs(), 1e-12, || {
                    format!("n = {n} on [{a}, {x}]")
                });
            }
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- fixedpoint

fn fixedpoint_suite(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let mut traces = Vec::new();
    let mut vector_traces = Vec::new();
    let checks = vec![
        newton_quadratic_convergence(&mut traces),
        fixed_point_equivalence(cfg, &mut traces),
        power_method_residual(cfg, &mut vector_traces),
    ];
    let mut out = checks;
    out.push(trace_integrity(&traces, &vector_traces));
    out
}

/// Quadratic-convergence window for `e_{k+1} / e_k²`.
pub const NEWTON_RATIO_RANGE: (f64, f64) = (0.2, 0.6);

fn newton_quadratic_convergence(traces: &mut Vec<(IterationTrace<f64>, f64)>) -> CheckReport {
    guarded("newton_quadratic_convergence", |w| {
        let tol = 1e-15;
        let t = newton(&parse("x^2 - 2")?, 1.0, tol, 50)?;
        let root = std::f64::consts::SQRT_2;
        let errors: Vec<f64> = t.iterates.iter().map(|x| (x - root).abs()).collect();
        let (lo, hi) = NEWTON_RATIO_RANGE;
        // middle iterates: skip the start and stop before rounding dominates
        for k in 1..errors.len() - 1 {
            if errors[k + 1] < 1e-10 {
                break;
            }
            let ratio = errors[k + 1] / (errors[k] * errors[k]);
            let outside = (lo - ratio).max(ratio - hi).max(0.0);
            w.observe(outside, 0.0, || format!("k = {k}, ratio = {ratio}"));
        }
        traces.push((t, tol));
        Ok(())
    })
}

fn fixed_point_equivalence(
    cfg: &VerifyConfig,
    traces: &mut Vec<(IterationTrace<f64>, f64)>,
) -> CheckReport {
    let mut cur = cfg.stream(601);
    guarded("fixed_point_equivalence", |w| {
        let tol = 1e-12;
        let mut found = 0;
        let mut attempts = 0;
        while found < 20 {
            attempts += 1;
            if attempts > 1000 {
                return Err(Error::precondition("Newton rarely converged on random polynomials"));
            }
            // (x - r0)·q(x) has a real root; Newton may find any of them
            let r0 = round2(cur.uniform(-2.0, 2.0));
            let mut poly = Expr::var() - Expr::Const(r0);
            for _ in 0..1 + cur.below(3) {
                let c = round2(cur.uniform(-2.0, 2.0));
                poly = poly * (Expr::var() + Expr::Const(c)) + Expr::Const(round2(cur.uniform(-0.5, 0.5)));
            }
            let poly = simplify(&poly);
            let x0 = cur.uniform(-2.5, 2.5);
            let Ok(t) = newton(&poly, x0, tol, 100) else { continue };
            if !t.converged {
                traces.push((t, tol));
                continue;
            }
            let r = *t.last();
            let g = root_as_fixed_point(&poly);
            w.observe((g.eval(r)? - r).abs(), 1e-9, || format!("{poly} at root {r}"));
            traces.push((t, tol));
            found += 1;
        }
        Ok(())
    })
}

fn random_symmetric(cur: &mut Cursor, d: usize) -> Result<SmallMatrix> {
    let mut entries = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let v = cur.uniform(-1.0, 1.0) + if i == j { 1.0 } else { 0.0 };
            entries[i * d + j] = v;
            entries[j * d + i] = v;
        }
    }
    SmallMatrix::new(d, entries)
}

fn power_method_residual(
    cfg: &VerifyConfig,
    traces: &mut Vec<(IterationTrace<Vec<f64>>, f64)>,
) -> CheckReport {
    let mut cur = cfg.stream(602);
    guarded("power_method_residual", |w| {
        let tol = 1e-10;
        let mut cases = vec![SmallMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]])?];
        for _ in 0..20 {
            let d = 2 + cur.below(7) as usize;
            cases.push(random_symmetric(&mut cur, d)?);
        }
        let mut unconverged = 0;
        for m in &cases {
            let v0: Vec<f64> = (0..m.dim()).map(|_| cur.uniform(0.1, 1.0)).collect();
            let r = power_method(m, &v0, tol, 100_000)?;
            if r.trace.converged {
                let limit = 10.0 * tol * r.eigenvalue.abs();
                w.observe(r.residual(m), limit, || {
                    format!("d = {}, λ = {}", m.dim(), r.eigenvalue)
                });
            } else {
                unconverged += 1;
            }
            traces.push((r.trace, tol));
        }
        if unconverged * 2 > cases.len() {
            return Err(Error::precondition(format!(
                "power method converged on only {} of {} matrices",
                cases.len() - unconverged,
                cases.len()
            )));
        }
        Ok(())
    })
}

fn trace_integrity(
    scalar: &[(IterationTrace<f64>, f64)],
    vector: &[(IterationTrace<Vec<f64>>, f64)],
) -> CheckReport {
    guarded("trace_integrity", |w| {
        let mut extra = Vec::new();
        let cos = RealFunction::from_expr(parse("cos(x)")?, Interval::widest());
        extra.push((iterate_scalar(&cos, 1.0, 1e-10, 1000)?, 1e-10));
        let double = RealFunction::from_expr(parse("2*x")?, Interval::widest());
        extra.push((iterate_scalar(&double, 1.0, 1e-10, 50)?, 1e-10));
        for (i, (t, tol)) in scalar.iter().chain(&extra).enumerate() {
            w.observe(if t.is_consistent(*tol) { 0.0 } else { 1.0 }, 0.0, || {
                format!("scalar trace {i}")
            });
        }
        for (i, (t, tol)) in vector.iter().enumerate() {
            w.observe(if t.is_consistent(*tol) { 0.0 } else { 1.0 }, 0.0, || {
                format!("vector trace {i}")
            });
        }
        Ok(())
    })
}
