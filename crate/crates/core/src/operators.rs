//! Linear operators on [`RealFunction`]s: differentiation `D`, integration
//! from a base point `I_a`, evaluation at a point, and their linear
//! combinations and compositions.

use std::fmt;

use crate::error::{Error, Result};
use crate::funcspace::{constant_one, sup_abs, Interval, QuadratureConfig, RealFunction};
use crate::report::CheckReport;

/// Upper bound on `n` for [`iterated_integral_one`].
pub const MAX_ITERATED_ONE: u32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorNode {
    Differentiate,
    IntegrateFrom(f64),
    /// `f ↦ f(a)·1`.
    EvaluateAt(f64),
    Identity,
    Scale(f64),
    Sum(Box<OperatorNode>, Box<OperatorNode>),
    /// `outer ∘ inner`: `inner` is applied first.
    Compose(Box<OperatorNode>, Box<OperatorNode>),
    /// `inner` composed with itself `n ≥ 1` times.
    Power(Box<OperatorNode>, u32),
}

impl OperatorNode {
    pub fn d() -> Self {
        OperatorNode::Differentiate
    }

    pub fn integrate_from(a: f64) -> Self {
        OperatorNode::IntegrateFrom(a)
    }

    pub fn evaluate_at(a: f64) -> Self {
        OperatorNode::EvaluateAt(a)
    }

    pub fn sum(left: OperatorNode, right: OperatorNode) -> Self {
        OperatorNode::Sum(Box::new(left), Box::new(right))
    }

    pub fn compose(outer: OperatorNode, inner: OperatorNode) -> Self {
        OperatorNode::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn power(inner: OperatorNode, n: u32) -> Self {
        OperatorNode::Power(Box::new(inner), n)
    }

    /// `self ∘ inner`.
    pub fn after(self, inner: OperatorNode) -> Self {
        OperatorNode::compose(self, inner)
    }
}

impl fmt::Display for OperatorNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorNode::Differentiate => f.write_str("D"),
            OperatorNode::IntegrateFrom(a) => write!(f, "I_{a}"),
            OperatorNode::EvaluateAt(a) => write!(f, "E_{a}"),
            OperatorNode::Identity => f.write_str("Id"),
            OperatorNode::Scale(c) => write!(f, "{c}"),
            OperatorNode::Sum(l, r) => write!(f, "({l} + {r})"),
            OperatorNode::Compose(o, i) => write!(f, "{o}·{i}"),
            OperatorNode::Power(i, n) => write!(f, "({i})^{n}"),
        }
    }
}

/// Applies `op` to `f`.
///
/// `D` is symbolic only: it is pushed through sums, scalings and constants,
/// and `D I_a g` is rewritten to `g`. Applying `D` to a closure-backed
/// function fails with [`Error::UnsupportedDifferentiation`].
pub fn apply(op: &OperatorNode, f: &RealFunction, cfg: &QuadratureConfig) -> Result<RealFunction> {
    match op {
        OperatorNode::Identity => Ok(f.clone()),
        OperatorNode::Differentiate => f.derivative(),
        OperatorNode::IntegrateFrom(a) => f.integral_from(*a, cfg),
        OperatorNode::EvaluateAt(a) => {
            let v = f.eval(*a)?;
            Ok(RealFunction::constant(v, f.domain()).with_label(format!("{}({a})·1", f.label())))
        }
        OperatorNode::Scale(c) => Ok(f.scaled(*c)),
        OperatorNode::Sum(l, r) => apply(l, f, cfg)?.plus(&apply(r, f, cfg)?),
        OperatorNode::Compose(outer, inner) => apply(outer, &apply(inner, f, cfg)?, cfg),
        OperatorNode::Power(inner, n) => {
            if *n == 0 {
                return Err(Error::precondition("operator power needs n >= 1"));
            }
            let mut g = f.clone();
            for _ in 0..*n {
                g = apply(inner, &g, cfg)?;
            }
            Ok(g)
        }
    }
}

/// `L = E_a + I_a D`, so that `L f = f(a)·1 + I_a D f`.
pub fn ftoc_operator(a: f64) -> OperatorNode {
    OperatorNode::sum(
        OperatorNode::evaluate_at(a),
        OperatorNode::compose(OperatorNode::integrate_from(a), OperatorNode::d()),
    )
}

/// `(I_a^n 1)(x)` by `n` literally nested quadratures.
pub fn iterated_integral_one(n: u32, a: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(1..=MAX_ITERATED_ONE).contains(&n) {
        return Err(Error::precondition(format!(
            "iterated integral order must lie in 1..={MAX_ITERATED_ONE}, got {n}"
        )));
    }
    if x == a {
        return Ok(0.0);
    }
    let one = constant_one(Interval::hull(a, x)?);
    let op = OperatorNode::power(OperatorNode::integrate_from(a), n);
    apply(&op, &one, cfg)?.eval(x)
}

/// `(x - a)^n / n!`.
pub fn basis_closed_form(n: u32, a: f64, x: f64) -> f64 {
    let h = x - a;
    (1..=n).fold(1.0, |acc, k| acc * h / k as f64)
}

/// Right-hand side of `|I_a^n g| ≤ sup_{[a,x]} |g| · I_a^n 1`, with the
/// basis factor in closed form.
pub fn monotone_bound(
    n: u32,
    g: &RealFunction,
    a: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::precondition("monotone bound needs n >= 1"));
    }
    if x < a {
        return Err(Error::precondition(format!(
            "monotone bound is stated on [a, x] with x >= a, got a = {a}, x = {x}"
        )));
    }
    if x == a {
        return Ok(0.0);
    }
    let sup = sup_abs(g, &Interval::new(a, x)?, cfg)?;
    Ok(sup * basis_closed_form(n, a, x))
}

/// Largest deviation of `op(αf + βg)` from `α·op(f) + β·op(g)` over the
/// probe points, judged against `5 · abs_tolerance`.
pub fn check_linearity(
    op: &OperatorNode,
    f: &RealFunction,
    g: &RealFunction,
    alpha: f64,
    beta: f64,
    probes: &[f64],
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    let combined = apply(op, &RealFunction::linear_combination(alpha, f, beta, g)?, cfg)?;
    let op_f = apply(op, f, cfg)?;
    let op_g = apply(op, g, cfg)?;
    let mut worst: f64 = 0.0;
    for &x in probes {
        let lhs = combined.eval(x)?;
        let rhs = alpha * op_f.eval(x)? + beta * op_g.eval(x)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(CheckReport::new(
        format!("linearity[{op}]"),
        worst,
        5.0 * cfg.abs_tolerance,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{E, FRAC_PI_2};

    fn sym(text: &str, a: f64, b: f64) -> RealFunction {
        RealFunction::from_expr(parse(text).unwrap(), Interval::new(a, b).unwrap())
    }

    #[test]
    fn apply_examples() {
        let cfg = QuadratureConfig::default();
        let exp = sym("exp(x)", -1.0, 1.0);
        assert_eq!(apply(&OperatorNode::d(), &exp, &cfg).unwrap().eval(0.0).unwrap(), 1.0);

        let one = constant_one(Interval::new(0.0, 1.0).unwrap());
        let v = apply(&OperatorNode::integrate_from(0.0), &one, &cfg)
            .unwrap()
            .eval(0.5)
            .unwrap();
        assert!((v - 0.5).abs() <= cfg.abs_tolerance);

        let sin = sym("sin(x)", -10.0, 10.0);
        let e0 = apply(&OperatorNode::evaluate_at(0.0), &sin, &cfg).unwrap();
        assert_eq!(e0.eval(7.3).unwrap(), 0.0);
    }

    #[test]
    fn ftoc_operator_examples() {
        let cfg = QuadratureConfig::default();
        let l0 = ftoc_operator(0.0);
        let exp = sym("exp(x)", 0.0, 1.0);
        let v = apply(&l0, &exp, &cfg).unwrap().eval(1.0).unwrap();
        assert!((v - E).abs() <= 5.0 * cfg.abs_tolerance);

        let one = constant_one(Interval::new(-1.0, 3.0).unwrap());
        let lone = apply(&l0, &one, &cfg).unwrap();
        for x in [-1.0, 0.0, 0.25, 2.9] {
            assert_eq!(lone.eval(x).unwrap(), 1.0);
        }

        // oracle: 4 + ∫_2^3 2t dt = 9
        let sq = sym("x^2", 0.0, 4.0);
        let v = apply(&ftoc_operator(2.0), &sq, &cfg).unwrap().eval(3.0).unwrap();
        assert!((v - 9.0).abs() <= 5.0 * cfg.abs_tolerance);
    }

    #[test]
    fn iterated_integral_one_examples() {
        let cfg = QuadratureConfig::default();
        assert!((iterated_integral_one(1, 0.0, 1.0, &cfg).unwrap() - 1.0).abs() < 1e-12);
        assert!((iterated_integral_one(3, 0.0, 1.0, &cfg).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(iterated_integral_one(2, 1.0, 1.0, &cfg).unwrap(), 0.0);
        // oriented: (x - a)^3 / 3! with x < a is negative
        let v = iterated_integral_one(3, 1.0, 0.0, &cfg).unwrap();
        assert!((v + 1.0 / 6.0).abs() < 1e-12);
        assert!(iterated_integral_one(0, 0.0, 1.0, &cfg).is_err());
        assert!(iterated_integral_one(7, 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn monotone_bound_examples() {
        let cfg = QuadratureConfig::default();
        let one = constant_one(Interval::new(0.0, 1.0).unwrap());
        assert_eq!(monotone_bound(1, &one, 0.0, 1.0, &cfg).unwrap(), 1.0);

        let exp = sym("exp(x)", 0.0, 1.0);
        let b = monotone_bound(3, &exp, 0.0, 1.0, &cfg).unwrap();
        assert!((b - E / 6.0).abs() < 1e-12, "{b}");
        assert!((b - 0.453_046_97).abs() < 1e-8);

        let sin = sym("sin(x)", 0.0, FRAC_PI_2);
        let b = monotone_bound(2, &sin, 0.0, FRAC_PI_2, &cfg).unwrap();
        assert!((b - FRAC_PI_2 * FRAC_PI_2 / 2.0).abs() < 1e-9, "{b}");

        assert!(matches!(
            monotone_bound(1, &exp, 1.0, 0.0, &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn linearity_examples() {
        let cfg = QuadratureConfig::default();
        let sin = sym("sin(x)", -2.0, 2.0);
        let exp = sym("exp(x)", -2.0, 2.0);
        let probes = [-1.5, -0.2, 0.0, 0.7, 1.9];
        let r = check_linearity(&OperatorNode::d(), &sin, &exp, 2.0, -1.0, &probes, &cfg).unwrap();
        assert!(r.pass && r.measured_gap <= 1e-10, "{r:?}");

        let one = constant_one(Interval::new(-2.0, 2.0).unwrap());
        let r = check_linearity(
            &OperatorNode::integrate_from(0.0),
            &one,
            &one,
            1.0,
            1.0,
            &probes,
            &cfg,
        )
        .unwrap();
        assert!(r.pass && r.measured_gap <= 3.0 * cfg.abs_tolerance, "{r:?}");

        let cos = sym("cos(x)", -2.0, 2.0);
        let e0 = OperatorNode::evaluate_at(0.0);
        let r = check_linearity(&e0, &sin, &cos, 3.0, 4.0, &probes, &cfg).unwrap();
        assert!(r.pass);
        let combo = RealFunction::linear_combination(3.0, &sin, 4.0, &cos).unwrap();
        assert_eq!(apply(&e0, &combo, &cfg).unwrap().eval(1.0).unwrap(), 4.0);
    }

    #[test]
    fn d_after_integral_is_rewritten_to_identity() {
        let cfg = QuadratureConfig::default();
        let f = RealFunction::from_fn("g", Interval::new(0.0, 1.0).unwrap(), |t| Ok(t.cos()));
        // D alone on a closure is rejected...
        assert!(apply(&OperatorNode::d(), &f, &cfg).is_err());
        // ...but D I_a g is g itself.
        let op = OperatorNode::d().after(OperatorNode::integrate_from(0.0));
        let g = apply(&op, &f, &cfg).unwrap();
        assert_eq!(g.eval(0.4).unwrap(), 0.4f64.cos());
    }

    #[test]
    fn power_is_repeated_composition() {
        let cfg = QuadratureConfig::default();
        let f = sym("sin(x)*x", -1.0, 1.0);
        let p = apply(&OperatorNode::power(OperatorNode::d(), 3), &f, &cfg).unwrap();
        let c = apply(
            &OperatorNode::d().after(OperatorNode::d().after(OperatorNode::d())),
            &f,
            &cfg,
        )
        .unwrap();
        assert_eq!(p.expr(), c.expr());
        assert!(apply(&OperatorNode::power(OperatorNode::d(), 0), &f, &cfg).is_err());
    }
}
