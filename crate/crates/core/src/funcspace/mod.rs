//! Real functions on closed intervals, the integral operator realised by
//! adaptive quadrature, and sup-norm estimation.

mod quadrature;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{differentiate, Expr};

pub use quadrature::{integrate_with, PanelRule, QuadratureConfig, QuadratureResult};

/// Nesting limit for integral-backed functions. Each level multiplies the
/// evaluation cost by the panel rule's node count.
pub const MAX_INTEGRAL_NESTING: usize = 6;

/// Closed interval `[a, b]` with `a < b`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::precondition(format!(
                "interval endpoints must be finite, got [{a}, {b}]"
            )));
        }
        if a >= b {
            return Err(Error::precondition(format!(
                "interval needs a < b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }

    /// Interval spanning two distinct points in either order.
    pub fn hull(p: f64, q: f64) -> Result<Self> {
        Interval::new(p.min(q), p.max(q))
    }

    /// The widest representable interval, for maps iterated without a
    /// natural domain.
    pub fn widest() -> Self {
        Interval {
            a: f64::MIN,
            b: f64::MAX,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::new(self.a.max(other.a), self.b.min(other.b)).ok()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

type Closure = dyn Fn(f64) -> Result<f64> + Send + Sync;

#[derive(Clone)]
enum Source {
    One,
    Constant(f64),
    Symbolic(Arc<Expr>),
    Integral {
        base: f64,
        integrand: Arc<RealFunction>,
        cfg: QuadratureConfig,
    },
    Scaled(f64, Arc<RealFunction>),
    Sum(Arc<RealFunction>, Arc<RealFunction>),
    Closure(Arc<Closure>),
}

/// A real-valued function on an [`Interval`].
///
/// Functions are immutable and cheap to clone. Integral-backed functions
/// run a fresh quadrature on every evaluation and keep no cache, so
/// concurrent evaluation always agrees with sequential evaluation.
#[derive(Clone)]
pub struct RealFunction {
    source: Source,
    domain: Interval,
    label: String,
}

impl fmt::Debug for RealFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish()
    }
}

impl RealFunction {
    pub fn from_expr(expr: Expr, domain: Interval) -> Self {
        RealFunction {
            label: expr.to_string(),
            source: Source::Symbolic(Arc::new(expr)),
            domain,
        }
    }

    pub fn constant(value: f64, domain: Interval) -> Self {
        RealFunction {
            source: Source::Constant(value),
            domain,
            label: format!("{value}·1"),
        }
    }

    /// Wraps an arbitrary closure. Such functions cannot be differentiated.
    pub fn from_fn<F>(label: impl Into<String>, domain: Interval, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        RealFunction {
            source: Source::Closure(Arc::new(f)),
            domain,
            label: label.into(),
        }
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same function restricted (or re-declared) on another interval.
    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    /// The expression behind a symbolic function.
    pub fn expr(&self) -> Option<&Expr> {
        match &self.source {
            Source::Symbolic(e) => Some(e),
            _ => None,
        }
    }

    /// Whether `D` can be pushed through this function symbolically.
    pub fn is_differentiable(&self) -> bool {
        match &self.source {
            Source::One | Source::Constant(_) | Source::Symbolic(_) | Source::Integral { .. } => {
                true
            }
            Source::Scaled(_, g) => g.is_differentiable(),
            Source::Sum(g, h) => g.is_differentiable() && h.is_differentiable(),
            Source::Closure(_) => false,
        }
    }

    /// Number of nested integral layers that one evaluation triggers.
    pub fn integral_depth(&self) -> usize {
        match &self.source {
            Source::One | Source::Constant(_) | Source::Symbolic(_) | Source::Closure(_) => 0,
            Source::Integral { integrand, .. } => 1 + integrand.integral_depth(),
            Source::Scaled(_, g) => g.integral_depth(),
            Source::Sum(g, h) => g.integral_depth().max(h.integral_depth()),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::domain(
                &self.label,
                x,
                format!("outside the function's domain {}", self.domain),
            ));
        }
        let v = match &self.source {
            Source::One => 1.0,
            Source::Constant(c) => *c,
            Source::Symbolic(e) => e.eval(x)?,
            Source::Integral {
                base,
                integrand,
                cfg,
            } => integrate(integrand, *base, x, cfg)?,
            Source::Scaled(c, g) => c * g.eval(x)?,
            Source::Sum(g, h) => g.eval(x)? + h.eval(x)?,
            Source::Closure(f) => f(x)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(&self.label, x, "non-finite value"))
        }
    }

    /// `D f`. Symbolic functions are differentiated exactly; `D` applied to
    /// an integral from a base point returns the integrand; constants map
    /// to zero. Closure-backed functions are rejected.
    pub fn derivative(&self) -> Result<RealFunction> {
        let label = format!("D[{}]", self.label);
        let source = match &self.source {
            Source::One | Source::Constant(_) => Source::Constant(0.0),
            Source::Symbolic(e) => {
                let d = differentiate(e);
                return Ok(RealFunction {
                    label: d.to_string(),
                    source: Source::Symbolic(Arc::new(d)),
                    domain: self.domain,
                });
            }
            Source::Integral { integrand, .. } => {
                return Ok((**integrand).clone().with_domain(self.domain));
            }
            Source::Scaled(c, g) => Source::Scaled(*c, Arc::new(g.derivative()?)),
            Source::Sum(g, h) => Source::Sum(Arc::new(g.derivative()?), Arc::new(h.derivative()?)),
            Source::Closure(_) => return Err(Error::UnsupportedDifferentiation(self.label.clone())),
        };
        Ok(RealFunction {
            source,
            domain: self.domain,
            label,
        })
    }

    /// `I_a f`: `x ↦ ∫_a^x f(t) dt`, evaluated by quadrature on demand.
    pub fn integral_from(&self, base: f64, cfg: &QuadratureConfig) -> Result<RealFunction> {
        cfg.validate()?;
        if !self.domain.contains(base) {
            return Err(Error::precondition(format!(
                "integration base {base} lies outside {}",
                self.domain
            )));
        }
        let depth = self.integral_depth() + 1;
        if depth > MAX_INTEGRAL_NESTING {
            return Err(Error::precondition(format!(
                "integral nesting depth {depth} exceeds the limit of {MAX_INTEGRAL_NESTING}"
            )));
        }
        Ok(RealFunction {
            label: format!("I_{base}[{}]", self.label),
            source: Source::Integral {
                base,
                integrand: Arc::new(self.clone()),
                cfg: *cfg,
            },
            domain: self.domain,
        })
    }

    pub fn scaled(&self, c: f64) -> RealFunction {
        RealFunction {
            label: format!("{c}·{}", self.label),
            source: Source::Scaled(c, Arc::new(self.clone())),
            domain: self.domain,
        }
    }

    /// Pointwise sum on the intersection of both domains.
    pub fn plus(&self, other: &RealFunction) -> Result<RealFunction> {
        let domain = self.domain.intersect(&other.domain).ok_or_else(|| {
            Error::precondition(format!(
                "domains {} and {} do not overlap",
                self.domain, other.domain
            ))
        })?;
        Ok(RealFunction {
            label: format!("({} + {})", self.label, other.label),
            source: Source::Sum(Arc::new(self.clone()), Arc::new(other.clone())),
            domain,
        })
    }

    /// `alpha·f + beta·g`.
    pub fn linear_combination(
        alpha: f64,
        f: &RealFunction,
        beta: f64,
        g: &RealFunction,
    ) -> Result<RealFunction> {
        f.scaled(alpha).plus(&g.scaled(beta))
    }
}

/// The constant function `1` on `domain`.
pub fn constant_one(domain: Interval) -> RealFunction {
    RealFunction {
        source: Source::One,
        domain,
        label: "1".to_string(),
    }
}

/// `∫_a^x f(t) dt` with the oriented convention for `x < a`.
pub fn integrate(f: &RealFunction, a: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let lo = a.min(x);
    let hi = a.max(x);
    if !(f.domain.contains(lo) && f.domain.contains(hi)) {
        return Err(Error::precondition(format!(
            "cannot integrate `{}` over [{lo}, {hi}]: outside its domain {}",
            f.label, f.domain
        )));
    }
    Ok(integrate_with(&|t| f.eval(t), a, x, cfg)?.value)
}

/// Number of uniform subintervals sampled by [`sup_abs`].
pub const SUP_SAMPLES: usize = 1024;

/// Estimate of `sup_{t ∈ iv} |f(t)|`.
///
/// Samples `SUP_SAMPLES + 1` uniform points (endpoints included), then
/// golden-section refines around the largest local maxima. The result is
/// never below the largest sampled value. This is an estimate, not a
/// certified bound.
pub fn sup_abs(f: &RealFunction, iv: &Interval, cfg: &QuadratureConfig) -> Result<f64> {
    if !f.domain.contains_interval(iv) {
        return Err(Error::precondition(format!(
            "sup over {iv} requested for `{}` defined on {}",
            f.label, f.domain
        )));
    }
    let n = SUP_SAMPLES;
    let point = |i: usize| {
        if i == n {
            iv.b
        } else {
            iv.a + iv.len() * (i as f64 / n as f64)
        }
    };
    let samples = (0..=n)
        .map(|i| f.eval(point(i)).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    let mut best = samples.iter().copied().fold(0.0, f64::max);

    // Local maxima of the sampled profile, largest first.
    let mut peaks: Vec<usize> = (0..=n)
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { samples[i - 1] };
            let right = if i == n { f64::NEG_INFINITY } else { samples[i + 1] };
            samples[i] >= left && samples[i] >= right
        })
        .collect();
    peaks.sort_by(|&p, &q| samples[q].total_cmp(&samples[p]).then(p.cmp(&q)));
    peaks.truncate(8);

    let width_stop = cfg.abs_tolerance.sqrt() * iv.len() * 1e-2;
    for i in peaks {
        let lo = point(i.saturating_sub(1));
        let hi = point((i + 1).min(n));
        let refined = golden_max(|t| f.eval(t).map(f64::abs), lo, hi, width_stop)?;
        best = best.max(refined);
    }
    Ok(best)
}

fn golden_max<F>(g: F, mut lo: f64, mut hi: f64, width_stop: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    let mut best = gc.max(gd);
    for _ in 0..200 {
        if hi - lo <= width_stop {
            break;
        }
        if gc >= gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - INV_PHI * (hi - lo);
            gc = g(c)?;
            best = best.max(gc);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + INV_PHI * (hi - lo);
            gd = g(d)?;
            best = best.max(gd);
        }
    }
    Ok(best)
}
