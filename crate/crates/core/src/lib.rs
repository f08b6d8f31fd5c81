//! Taylor's theorem as iterated application of the fundamental theorem of
//! calculus: symbolic expressions, adaptive quadrature, integral and
//! differential operators, Taylor remainders, ordered-simplex volumes and a
//! small fixed-point toolkit.

pub mod error;
pub mod expr;
pub mod fixedpoint;
pub mod funcspace;
pub mod operators;
pub mod report;
pub mod rng;
pub mod simplex;
pub mod taylor;
pub mod verify;

pub use error::{Error, ParseError, Result};
pub use expr::{differentiate, differentiate_n, parse, simplify, Expr, Func};
pub use fixedpoint::{IterationFailure, IterationTrace, PowerResult, SmallMatrix};
pub use funcspace::{Interval, PanelRule, QuadratureConfig, RealFunction};
pub use operators::OperatorNode;
pub use report::CheckReport;
pub use rng::CounterRng;
pub use simplex::{MonteCarloConfig, MonteCarloEstimate, PartitionReport, SimplexSpec};
pub use taylor::{RemainderReport, TaylorExpansion};
pub use verify::{Suite, SuiteReport, VerifyConfig};
