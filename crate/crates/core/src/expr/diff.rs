use super::{simplify, Expr, Func};

/// Exact symbolic derivative with respect to `x`, passed through
/// [`simplify`] so repeated differentiation does not accumulate `*1` and
/// `+0` debris.
pub fn differentiate(e: &Expr) -> Expr {
    simplify(&raw_derivative(e))
}

/// `n`-fold derivative; `n = 0` returns a copy of `e`.
pub fn differentiate_n(e: &Expr, n: usize) -> Expr {
    let mut d = e.clone();
    for _ in 0..n {
        d = differentiate(&d);
    }
    d
}

fn raw_derivative(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Add(l, r) => raw_derivative(l) + raw_derivative(r),
        Expr::Sub(l, r) => raw_derivative(l) - raw_derivative(r),
        Expr::Mul(l, r) => {
            raw_derivative(l) * (**r).clone() + (**l).clone() * raw_derivative(r)
        }
        Expr::Div(l, r) => {
            let num = raw_derivative(l) * (**r).clone() - (**l).clone() * raw_derivative(r);
            num / (**r).clone().powc(2.0)
        }
        Expr::Neg(inner) => -raw_derivative(inner),
        Expr::Pow(base, c) => {
            Expr::Const(*c) * (**base).clone().powc(c - 1.0) * raw_derivative(base)
        }
        Expr::Call(func, arg) => {
            let u = (**arg).clone();
            let du = raw_derivative(arg);
            match func {
                Func::Sin => u.cos() * du,
                Func::Cos => -u.sin() * du,
                Func::Exp => u.exp() * du,
                Func::Ln => du / u,
            }
        }
    }
}
