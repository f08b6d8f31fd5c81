//! Shared fixtures for the benchmarks.

use ftoc_core::{parse, Expr, Interval, RealFunction, TaylorExpansion};

/// Smooth test functions with a base point, as `(name, source, a)`.
pub const FIXTURES: &[(&str, &str, f64)] = &[
    ("exp", "exp(x)", 0.0),
    ("sin", "sin(x)", 0.3),
    ("reciprocal", "(1 + x)^(-1)", 0.5),
];

pub fn expr(source: &str) -> Expr {
    parse(source).expect("fixture parses")
}

pub fn function(source: &str) -> RealFunction {
    RealFunction::from_expr(expr(source), Interval::widest())
}

pub fn expansion(source: &str, a: f64, n: usize) -> TaylorExpansion {
    ftoc_core::taylor::expand(&expr(source), a, n).expect("fixture expands")
}
