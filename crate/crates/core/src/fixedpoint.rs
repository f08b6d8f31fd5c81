//! Fixed-point iteration: plain scalar iteration, Newton's method, the
//! matrix power method and the rewriting of a root problem as a fixed point.

// Failures carry the full trace by value; they are rare and inspected.
#![allow(clippy::result_large_err)]

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{differentiate, simplify, Expr};
use crate::funcspace::{Interval, RealFunction};

pub const MIN_MATRIX_DIM: usize = 2;
pub const MAX_MATRIX_DIM: usize = 16;

/// The sequence `x_0, g(x_0), g(g(x_0)), …` with one residual per step.
///
/// `iterates[0]` is the starting state, so `iterates.len()` is
/// `iterations_used + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace<S> {
    pub iterates: Vec<S>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl<S> IterationTrace<S> {
    fn start(x0: S) -> Self {
        IterationTrace {
            iterates: vec![x0],
            residuals: Vec::new(),
            converged: false,
            iterations_used: 0,
        }
    }

    fn push(&mut self, x: S, residual: f64) {
        self.iterates.push(x);
        self.residuals.push(residual);
        self.iterations_used += 1;
    }

    pub fn last(&self) -> &S {
        self.iterates.last().expect("trace holds the starting state")
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    /// Lengths agree and a converged trace ends within `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.residuals.len() == self.iterations_used
            && self.iterates.len() == self.iterations_used + 1
            && self.residuals.iter().all(|r| *r >= 0.0)
            && (!self.converged || self.final_residual().is_some_and(|r| r <= tol))
    }
}

/// An iteration that stopped on an error, with everything computed so far.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationFailure<S> {
    pub trace: IterationTrace<S>,
    pub error: Error,
}

impl<S> fmt::Display for IterationFailure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} iterations)",
            self.error, self.trace.iterations_used
        )
    }
}

impl<S: fmt::Debug> std::error::Error for IterationFailure<S> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl<S> From<IterationFailure<S>> for Error {
    fn from(f: IterationFailure<S>) -> Self {
        f.error
    }
}

pub type IterationResult<S, T = IterationTrace<S>> = std::result::Result<T, IterationFailure<S>>;

fn check_controls(tol: f64, max_iter: usize) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be finite and non-negative, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    Ok(())
}

fn fail<S>(trace: IterationTrace<S>, error: Error) -> IterationFailure<S> {
    IterationFailure { trace, error }
}

/// `x_{k+1} = g(x_k)` until `|x_{k+1} - x_k| ≤ tol` or `max_iter` steps.
pub fn iterate_scalar(
    g: &RealFunction,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> IterationResult<f64> {
    let mut trace = IterationTrace::start(x0);
    if let Err(e) = check_controls(tol, max_iter) {
        return Err(fail(trace, e));
    }
    let mut x = x0;
    while trace.iterations_used < max_iter {
        let next = match g.eval(x) {
            Ok(v) => v,
            Err(e) => return Err(fail(trace, e)),
        };
        let residual = (next - x).abs();
        trace.push(next, residual);
        x = next;
        if residual <= tol {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// Newton's method with the symbolic derivative; the residual of step `k`
/// is `|f(x_{k+1})|`.
pub fn newton(f: &Expr, x0: f64, tol: f64, max_iter: usize) -> IterationResult<f64> {
    let mut trace = IterationTrace::start(x0);
    if let Err(e) = check_controls(tol, max_iter) {
        return Err(fail(trace, e));
    }
    let df = differentiate(f);
    let mut x = x0;
    let mut fx = match f.eval(x) {
        Ok(v) => v,
        Err(e) => return Err(fail(trace, e)),
    };
    while trace.iterations_used < max_iter {
        let slope = match df.eval(x) {
            Ok(v) => v,
            Err(e) => return Err(fail(trace, e)),
        };
        if slope == 0.0 {
            return Err(fail(trace, Error::ZeroDerivative { x }));
        }
        let next = x - fx / slope;
        if !next.is_finite() {
            return Err(fail(
                trace,
                Error::domain(f, x, "Newton step is not finite"),
            ));
        }
        fx = match f.eval(next) {
            Ok(v) => v,
            Err(e) => return Err(fail(trace, e)),
        };
        let residual = fx.abs();
        trace.push(next, residual);
        x = next;
        if residual <= tol {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SmallMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if !(MIN_MATRIX_DIM..=MAX_MATRIX_DIM).contains(&dim) {
            return Err(Error::precondition(format!(
                "matrix dimension must lie in {MIN_MATRIX_DIM}..={MAX_MATRIX_DIM}, got {dim}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::precondition(format!(
                "a {dim}x{dim} matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::precondition(format!(
                "matrix entries must be finite, found {bad}"
            )));
        }
        Ok(SmallMatrix { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::precondition("matrix rows must all have length d"));
        }
        SmallMatrix::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
            .collect()
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    /// Rayleigh quotient `vᵀMv` of the final unit vector.
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub trace: IterationTrace<Vec<f64>>,
}

impl PowerResult {
    /// `|Mv - λv|_∞` for the reported pair.
    pub fn residual(&self, m: &SmallMatrix) -> f64 {
        let mv = m.mul_vec(&self.eigenvector);
        let diff: Vec<f64> = mv
            .iter()
            .zip(&self.eigenvector)
            .map(|(a, v)| a - self.eigenvalue * v)
            .collect();
        max_abs(&diff)
    }
}

/// Iterates `v ↦ Mv/|Mv|`. Convergence is judged on the sign-aligned
/// change `|v_{k+1} - s·v_k|` with `s = sign⟨v_{k+1}, v_k⟩`.
pub fn power_method(
    m: &SmallMatrix,
    v0: &[f64],
    tol: f64,
    max_iter: usize,
) -> IterationResult<Vec<f64>, PowerResult> {
    let empty = || IterationTrace::start(v0.to_vec());
    if let Err(e) = check_controls(tol, max_iter) {
        return Err(fail(empty(), e));
    }
    if v0.len() != m.dim() || v0.iter().any(|x| !x.is_finite()) {
        return Err(fail(
            empty(),
            Error::precondition(format!(
                "starting vector must have {} finite entries",
                m.dim()
            )),
        ));
    }
    let n0 = norm(v0);
    if n0 == 0.0 {
        return Err(fail(empty(), Error::precondition("starting vector is zero")));
    }
    let mut v: Vec<f64> = v0.iter().map(|x| x / n0).collect();
    let mut trace = IterationTrace::start(v.clone());
    while trace.iterations_used < max_iter {
        let w = m.mul_vec(&v);
        let nw = norm(&w);
        if nw == 0.0 || !nw.is_finite() {
            let step = trace.iterations_used + 1;
            return Err(fail(trace, Error::ZeroImage { step }));
        }
        let next: Vec<f64> = w.iter().map(|x| x / nw).collect();
        let s = if dot(&next, &v) < 0.0 { -1.0 } else { 1.0 };
        let change: Vec<f64> = next.iter().zip(&v).map(|(a, b)| a - s * b).collect();
        let residual = norm(&change);
        trace.push(next.clone(), residual);
        v = next;
        if residual <= tol {
            trace.converged = true;
            break;
        }
    }
    let eigenvalue = dot(&v, &m.mul_vec(&v));
    Ok(PowerResult {
        eigenvalue,
        eigenvector: v,
        trace,
    })
}

/// `g(x) = x + f(x)`, whose fixed points are exactly the roots of `f`.
pub fn root_as_fixed_point(f: &Expr) -> RealFunction {
    let g = simplify(&(Expr::var() + f.clone()));
    RealFunction::from_expr(g, Interval::widest())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn func(text: &str) -> RealFunction {
        RealFunction::from_expr(parse(text).unwrap(), Interval::widest())
    }

    #[test]
    fn cosine_iteration_reaches_dottie_number() {
        // brute-force oracle: iterate cos far past convergence
        let mut oracle = 1.0f64;
        for _ in 0..10_000 {
            oracle = oracle.cos();
        }
        let t = iterate_scalar(&func("cos(x)"), 1.0, 1e-10, 1000).unwrap();
        assert!(t.converged);
        assert!((t.last() - oracle).abs() < 1e-9);
        assert!((t.last() - 0.7390851332).abs() < 1e-9);
        assert!(t.is_consistent(1e-10));
    }

    #[test]
    fn identity_and_repelling_maps() {
        let t = iterate_scalar(&func("x"), 3.25, 1e-12, 10).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations_used, 1);
        assert_eq!(*t.last(), 3.25);

        let t = iterate_scalar(&func("2*x"), 1.0, 1e-10, 50).unwrap();
        assert!(!t.converged);
        assert_eq!(t.iterations_used, 50);
        assert!(t.residuals.windows(2).all(|w| w[1] > w[0]));
        assert!(t.is_consistent(1e-10));
    }

    #[test]
    fn domain_failure_keeps_partial_trace() {
        // ln(0.5) < 0, so the second step leaves ln's domain
        let g = func("ln(x)");
        let err = iterate_scalar(&g, 0.5, 1e-10, 20).unwrap_err();
        assert!(matches!(err.error, Error::Domain { .. }));
        assert_eq!(err.trace.iterates[0], 0.5);
        assert_eq!(err.trace.iterates.len(), err.trace.iterations_used + 1);
    }

    #[test]
    fn newton_square_root_of_two() {
        let t = newton(&parse("x^2 - 2").unwrap(), 1.0, 1e-10, 50).unwrap();
        assert!(t.converged);
        assert!(t.iterations_used <= 6);
        assert_eq!(t.iterates[1], 1.5);
        assert!((t.iterates[2] - 17.0 / 12.0).abs() < 1e-15);
        assert!((t.iterates[3] - 577.0 / 408.0).abs() < 1e-15);
        assert!((t.last() - SQRT_2).abs() < 1e-10);
        assert!(t.is_consistent(1e-10));
    }

    #[test]
    fn newton_quadratic_convergence_ratio() {
        let t = newton(&parse("x^2 - 2").unwrap(), 1.0, 1e-15, 50).unwrap();
        let e: Vec<f64> = t.iterates.iter().map(|x| (x - SQRT_2).abs()).collect();
        // middle iterates, before rounding dominates
        for k in 1..3 {
            let ratio = e[k + 1] / (e[k] * e[k]);
            assert!((0.2..=0.6).contains(&ratio), "k={k} ratio={ratio}");
        }
    }

    #[test]
    fn newton_linear_and_degenerate() {
        let t = newton(&parse("x").unwrap(), 5.0, 1e-12, 10).unwrap();
        assert_eq!(t.iterations_used, 1);
        assert_eq!(*t.last(), 0.0);

        let err = newton(&parse("x^2").unwrap(), 0.0, 1e-12, 10).unwrap_err();
        assert_eq!(err.error, Error::ZeroDerivative { x: 0.0 });
        assert_eq!(err.trace.iterations_used, 0);
    }

    #[test]
    fn power_method_diagonal() {
        let m = SmallMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = power_method(&m, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 1e-12, 200).unwrap();
        assert!(r.trace.converged);
        assert!((r.eigenvalue - 2.0).abs() < 1e-10);
        assert!((r.eigenvector[0].abs() - 1.0).abs() < 1e-10);
        assert!(r.eigenvector[1].abs() < 1e-10);
    }

    #[test]
    fn power_method_tied_eigenvalues_do_not_converge() {
        let m = SmallMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = power_method(&m, &[1.0, 0.0], 1e-10, 100).unwrap();
        assert!(!r.trace.converged);
        assert_eq!(r.trace.iterations_used, 100);
    }

    #[test]
    fn power_method_symmetric_two_by_two() {
        let tol = 1e-12;
        let m = SmallMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let r = power_method(&m, &[1.0, 0.0], tol, 500).unwrap();
        assert!(r.trace.converged);
        assert!((r.eigenvalue - 3.0).abs() < 1e-8);
        let s = r.eigenvector[0].signum();
        assert!((s * r.eigenvector[0] - FRAC_1_SQRT_2).abs() < 1e-8);
        assert!((s * r.eigenvector[1] - FRAC_1_SQRT_2).abs() < 1e-8);
        assert!(r.residual(&m) <= 10.0 * tol * r.eigenvalue.abs());
    }

    #[test]
    fn power_method_negative_dominant_eigenvalue() {
        let m = SmallMatrix::from_rows(&[vec![-3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = power_method(&m, &[1.0, 1.0], 1e-12, 200).unwrap();
        assert!(r.trace.converged);
        assert!((r.eigenvalue + 3.0).abs() < 1e-10);
    }

    #[test]
    fn power_method_errors() {
        let m = SmallMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let err = power_method(&m, &[1.0, 0.0], 1e-10, 10).unwrap_err();
        assert_eq!(err.error, Error::ZeroImage { step: 1 });
        let m = SmallMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(power_method(&m, &[0.0, 0.0], 1e-10, 10).is_err());
        assert!(power_method(&m, &[1.0], 1e-10, 10).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(SmallMatrix::new(1, vec![1.0]).is_err());
        assert!(SmallMatrix::new(17, vec![0.0; 289]).is_err());
        assert!(SmallMatrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0]).is_err());
        assert!(SmallMatrix::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn root_rewriting() {
        let g = root_as_fixed_point(&parse("x^2 - 2").unwrap());
        let r = std::f64::consts::SQRT_2;
        assert!((g.eval(r).unwrap() - r).abs() < 1e-9);

        let g = root_as_fixed_point(&Expr::constant(0.0));
        for x in [-2.5, 0.0, 7.0] {
            assert_eq!(g.eval(x).unwrap(), x);
        }

        let g = root_as_fixed_point(&parse("sin(x)").unwrap());
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert!((g.eval(PI).unwrap() - PI).abs() < 1e-15);
    }
}
