//! Elementary-function expressions in one variable `x`.
//!
//! The grammar is closed under differentiation: exponents are literal
//! constants, so every derivative of a parsed expression is again an
//! [`Expr`]. Values are immutable trees and can be shared across threads.

mod diff;
mod parse;
mod simplify;

use std::fmt;
use std::ops;

use crate::error::{Error, Result};

pub use diff::{differentiate, differentiate_n};
pub use parse::parse;
pub use simplify::simplify;

/// Name of the single free variable.
pub const VARIABLE: &str = "x";

/// Unary elementary functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            _ => None,
        }
    }

    pub(crate) fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Base raised to a literal constant exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var() -> Self {
        Expr::Var
    }

    pub fn powc(self, exponent: f64) -> Self {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn call(func: Func, arg: Expr) -> Self {
        Expr::Call(func, Box::new(arg))
    }

    pub fn sin(self) -> Self {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(self) -> Self {
        Expr::call(Func::Cos, self)
    }

    pub fn exp(self) -> Self {
        Expr::call(Func::Exp, self)
    }

    pub fn ln(self) -> Self {
        Expr::call(Func::Ln, self)
    }

    pub fn is_const(&self, c: f64) -> bool {
        matches!(self, Expr::Const(v) if *v == c)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                1 + l.size() + r.size()
            }
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => 1 + e.size(),
        }
    }

    /// Evaluates the expression at `x` in IEEE double arithmetic.
    ///
    /// Any node whose value is undefined or non-finite produces
    /// [`Error::Domain`] naming that node.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Add(l, r) => l.eval(x)? + r.eval(x)?,
            Expr::Sub(l, r) => l.eval(x)? - r.eval(x)?,
            Expr::Mul(l, r) => l.eval(x)? * r.eval(x)?,
            Expr::Div(l, r) => {
                let num = l.eval(x)?;
                let den = r.eval(x)?;
                if den == 0.0 {
                    return Err(Error::domain(self, x, "division by zero"));
                }
                num / den
            }
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Pow(b, c) => {
                let base = b.eval(x)?;
                if base == 0.0 && *c < 0.0 {
                    return Err(Error::domain(self, x, "zero raised to a negative power"));
                }
                if base < 0.0 && c.fract() != 0.0 {
                    return Err(Error::domain(
                        self,
                        x,
                        "negative base raised to a non-integer power",
                    ));
                }
                pow_value(base, *c)
            }
            Expr::Call(func, arg) => {
                let a = arg.eval(x)?;
                if *func == Func::Ln && a <= 0.0 {
                    return Err(Error::domain(self, x, "logarithm of a non-positive value"));
                }
                func.apply(a)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(self, x, "non-finite value"))
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_bare(f)?;
            f.write_str(")")
        } else {
            self.fmt_bare(f)
        }
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str(VARIABLE),
            Expr::Add(l, r) => {
                l.fmt_at(f, 1)?;
                f.write_str(" + ")?;
                r.fmt_at(f, 2)
            }
            Expr::Sub(l, r) => {
                l.fmt_at(f, 1)?;
                f.write_str(" - ")?;
                r.fmt_at(f, 2)
            }
            Expr::Mul(l, r) => {
                l.fmt_at(f, 2)?;
                f.write_str("*")?;
                r.fmt_at(f, 3)
            }
            Expr::Div(l, r) => {
                l.fmt_at(f, 2)?;
                f.write_str("/")?;
                r.fmt_at(f, 3)
            }
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_at(f, 3)
            }
            Expr::Pow(b, c) => {
                b.fmt_at(f, 5)?;
                write!(f, "^{c}")
            }
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.fmt_bare(f)?;
                f.write_str(")")
            }
        }
    }
}

/// Power with a constant exponent. Constant folding and evaluation share it
/// so folded trees evaluate bit-identically.
pub(crate) fn pow_value(base: f64, exponent: f64) -> f64 {
    base.powf(exponent)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_bare(f)
    }
}

impl std::str::FromStr for Expr {
    type Err = crate::error::ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse(s)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait for Expr {
            type Output = Expr;

            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
