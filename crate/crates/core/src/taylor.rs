//! Taylor expansions built by iterating the fundamental-theorem-of-calculus
//! substitution `D^k f = D^k f(a)·1 + I_a D^{k+1} f`, and four independent
//! evaluations of the remainder `I_a^{N+1} D^{N+1} f`:
//!
//! * direct: `f(x) - P_N(x)`,
//! * exact: one quadrature of `(x - t)^N / N! · f^{(N+1)}(t)`,
//! * nested: `N + 1` literally nested quadratures, before any exchange of
//!   integration order,
//! * bound: `sup |f^{(N+1)}| · |x - a|^{N+1} / (N+1)!`.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{differentiate, Expr};
use crate::funcspace::{integrate_with, sup_abs, Interval, QuadratureConfig, RealFunction};
use crate::operators::{apply, basis_closed_form, OperatorNode};

/// Cost guard for [`expand`].
pub const MAX_ORDER: usize = 12;

/// Largest `N + 1` for which [`remainder_nested`] runs.
pub const MAX_NESTED_DEPTH: usize = 4;

/// Inner levels of the nested remainder run at this absolute tolerance or
/// looser.
pub const NESTED_INNER_TOLERANCE: f64 = 1e-8;

/// `f = Σ_{n≤N} f^{(n)}(a) · I_a^n 1 + I_a^{N+1} D^{N+1} f`.
///
/// Coefficients are derivative values `f^{(n)}(a)`; the `1/n!` lives in the
/// basis functions `I_a^n 1 = (x - a)^n / n!`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorExpansion {
    base: f64,
    order: usize,
    coefficients: Vec<f64>,
    source: Expr,
    derivative_exprs: Vec<Expr>,
}

impl TaylorExpansion {
    /// The order-0 form `f = f(a)·1 + I_a D f`, i.e. the fixed-point
    /// equation the iteration starts from.
    pub fn ftoc_base(f: &Expr, a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::precondition(format!("base point must be finite, got {a}")));
        }
        let f0 = f.eval(a)?;
        Ok(TaylorExpansion {
            base: a,
            order: 0,
            coefficients: vec![f0],
            source: f.clone(),
            derivative_exprs: vec![f.clone(), differentiate(f)],
        })
    }

    /// One fixed-point substitution: the residual `I_a^{k+1} D^{k+1} f`
    /// becomes `D^{k+1} f(a) · I_a^{k+1} 1 + I_a^{k+2} D^{k+2} f`.
    pub fn ftoc_step(mut self) -> Result<Self> {
        let k = self.order;
        let next = &self.derivative_exprs[k + 1];
        let coefficient = next.eval(self.base)?;
        let higher = differentiate(next);
        self.coefficients.push(coefficient);
        self.derivative_exprs.push(higher);
        self.order += 1;
        Ok(self)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `[f(a), f'(a), …, f^{(N)}(a)]`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `f^{(n)}(a) / n!` for each `n ≤ N`.
    pub fn scaled_coefficients(&self) -> Vec<f64> {
        let mut factorial = 1.0;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if n > 0 {
                    factorial *= n as f64;
                }
                c / factorial
            })
            .collect()
    }

    pub fn source(&self) -> &Expr {
        &self.source
    }

    /// `[f, f', …, f^{(N+1)}]`.
    pub fn derivative_exprs(&self) -> &[Expr] {
        &self.derivative_exprs
    }

    /// `D^{N+1} f`, the integrand of the residual term.
    pub fn residual_integrand(&self) -> &Expr {
        &self.derivative_exprs[self.order + 1]
    }

    /// `I_a^{N+1} D^{N+1}`.
    pub fn residual_operator(&self) -> OperatorNode {
        let n = self.order as u32 + 1;
        OperatorNode::compose(
            OperatorNode::power(OperatorNode::integrate_from(self.base), n),
            OperatorNode::power(OperatorNode::d(), n),
        )
    }
}

impl fmt::Display for TaylorExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.base;
        for (n, c) in self.coefficients.iter().enumerate() {
            match n {
                0 => write!(f, "{c}·1")?,
                1 => write!(f, " + {c}·I_{a} 1")?,
                _ => write!(f, " + {c}·I_{a}^{n} 1")?,
            }
        }
        let m = self.order + 1;
        write!(f, " + I_{a}^{m} D^{m} [{}]", self.source)
    }
}

/// Applies the fixed-point step `n` times from the base form.
pub fn expand(f: &Expr, a: f64, n: usize) -> Result<TaylorExpansion> {
    if n > MAX_ORDER {
        return Err(Error::precondition(format!(
            "expansion order {n} exceeds the limit of {MAX_ORDER}"
        )));
    }
    let mut t = TaylorExpansion::ftoc_base(f, a)?;
    for _ in 0..n {
        t = t.ftoc_step()?;
    }
    Ok(t)
}

/// `P_N(x) = Σ f^{(n)}(a) (x - a)^n / n!`, Horner form in `x - a`.
pub fn evaluate_polynomial(t: &TaylorExpansion, x: f64) -> f64 {
    let h = x - t.base;
    let mut acc = t.coefficients[t.order];
    for n in (0..t.order).rev() {
        acc = t.coefficients[n] + acc * h / (n + 1) as f64;
    }
    acc
}

/// `f(x) - P_N(x)`.
pub fn remainder_direct(t: &TaylorExpansion, x: f64) -> Result<f64> {
    Ok(t.source.eval(x)? - evaluate_polynomial(t, x))
}

/// `∫_a^x (x - t)^N / N! · f^{(N+1)}(t) dt` by a single adaptive quadrature.
pub fn remainder_exact(t: &TaylorExpansion, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let n = t.order as u32;
    let integrand = t.residual_integrand();
    let kernel = move |s: f64| Ok(basis_closed_form(n, s, x) * integrand.eval(s)?);
    Ok(integrate_with(&kernel, t.base, x, cfg)?.value)
}

/// `I_a^{N+1} D^{N+1} f` evaluated as `N + 1` nested quadratures, innermost
/// variable first, with limits `a → t_{k-1}`. Only for `N + 1 ≤ 4`.
pub fn remainder_nested(t: &TaylorExpansion, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let depth = t.order + 1;
    if depth > MAX_NESTED_DEPTH {
        return Err(Error::precondition(format!(
            "nested remainder needs N + 1 <= {MAX_NESTED_DEPTH}, got {depth}"
        )));
    }
    if x == t.base {
        return Ok(0.0);
    }
    let f = RealFunction::from_expr(t.source.clone(), Interval::hull(t.base, x)?);
    let derivative = apply(&OperatorNode::power(OperatorNode::d(), depth as u32), &f, cfg)?;
    let inner_cfg = cfg.loosened_to(NESTED_INNER_TOLERANCE);
    let mut g = derivative;
    for _ in 1..depth {
        g = apply(&OperatorNode::integrate_from(t.base), &g, &inner_cfg)?;
    }
    apply(&OperatorNode::integrate_from(t.base), &g, cfg)?.eval(x)
}

/// `sup_{c between a and x} |f^{(N+1)}(c)| · |x - a|^{N+1} / (N+1)!`.
///
/// For `x < a` the supremum is taken over `[x, a]`.
pub fn remainder_bound(t: &TaylorExpansion, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if x == t.base {
        return Ok(0.0);
    }
    let iv = Interval::hull(t.base, x)?;
    let g = RealFunction::from_expr(t.residual_integrand().clone(), iv);
    let sup = sup_abs(&g, &iv, cfg)?;
    let factor = basis_closed_form(t.order as u32 + 1, t.base, x).abs();
    Ok(sup * factor)
}

/// Largest absolute difference between any two values.
pub fn max_pairwise_gap(values: &[f64]) -> f64 {
    let mut gap: f64 = 0.0;
    for (i, u) in values.iter().enumerate() {
        for v in &values[i + 1..] {
            gap = gap.max((u - v).abs());
        }
    }
    gap
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderReport {
    pub x: f64,
    pub order: usize,
    pub direct: f64,
    pub exact_integral: f64,
    /// Present only when `N + 1 ≤ 4`.
    pub nested_integral: Option<f64>,
    pub bound: f64,
    /// Largest gap among the remainder values (bound excluded).
    pub max_pairwise_gap: f64,
}

impl RemainderReport {
    pub fn remainders(&self) -> Vec<f64> {
        let mut v = vec![self.direct, self.exact_integral];
        v.extend(self.nested_integral);
        v
    }

    /// `|direct| ≤ bound·(1 + 1e-9) + 1e-12`.
    pub fn bound_holds(&self) -> bool {
        self.direct.abs() <= self.bound * (1.0 + 1e-9) + 1e-12
    }
}

pub fn remainder_report(
    f: &Expr,
    a: f64,
    n: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<RemainderReport> {
    let t = expand(f, a, n)?;
    report_for(&t, x, cfg)
}

/// [`remainder_report`] for an expansion that is already built.
pub fn report_for(t: &TaylorExpansion, x: f64, cfg: &QuadratureConfig) -> Result<RemainderReport> {
    let direct = remainder_direct(t, x)?;
    let exact_integral = remainder_exact(t, x, cfg)?;
    let nested_integral = if t.order < MAX_NESTED_DEPTH {
        Some(remainder_nested(t, x, cfg)?)
    } else {
        None
    };
    let bound = remainder_bound(t, x, cfg)?;
    let mut report = RemainderReport {
        x,
        order: t.order,
        direct,
        exact_integral,
        nested_integral,
        bound,
        max_pairwise_gap: 0.0,
    };
    report.max_pairwise_gap = max_pairwise_gap(&report.remainders());
    Ok(report)
}

/// Separable integrand `g(t_i, t_j) = left(t_i) · right(t_j)`, each factor
/// an expression in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoVarIntegrand {
    pub left: Expr,
    pub right: Expr,
}

impl TwoVarIntegrand {
    pub fn new(left: Expr, right: Expr) -> Self {
        TwoVarIntegrand { left, right }
    }

    pub fn one() -> Self {
        TwoVarIntegrand::new(Expr::Const(1.0), Expr::Const(1.0))
    }

    pub fn eval(&self, ti: f64, tj: f64) -> Result<f64> {
        Ok(self.left.eval(ti)? * self.right.eval(tj)?)
    }
}

impl fmt::Display for TwoVarIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})[t_i]·({})[t_j]", self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeReport {
    /// `∫_a^u ∫_a^{t_j} g dt_i dt_j`.
    pub inner_first: f64,
    /// `∫_a^u ∫_{t_i}^u g dt_j dt_i`.
    pub outer_first: f64,
    pub gap: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Evaluates both iterated integrals over the triangle
/// `a ≤ t_i ≤ t_j ≤ u` and compares them against `10 · abs_tolerance`.
pub fn verify_exchange(
    g: &TwoVarIntegrand,
    a: f64,
    upper: f64,
    cfg: &QuadratureConfig,
) -> Result<ExchangeReport> {
    let inner_first = integrate_with(
        &|tj: f64| Ok(integrate_with(&|ti: f64| g.eval(ti, tj), a, tj, cfg)?.value),
        a,
        upper,
        cfg,
    )?
    .value;
    let outer_first = integrate_with(
        &|ti: f64| Ok(integrate_with(&|tj: f64| g.eval(ti, tj), ti, upper, cfg)?.value),
        a,
        upper,
        cfg,
    )?
    .value;
    let gap = (inner_first - outer_first).abs();
    let threshold = 10.0 * cfg.abs_tolerance;
    Ok(ExchangeReport {
        inner_first,
        outer_first,
        gap,
        threshold,
        pass: gap <= threshold,
    })
}
