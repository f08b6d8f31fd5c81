use super::Expr;

/// Local rewrites that keep every evaluation bit-identical (up to the sign
/// of zero) wherever the input is defined:
///
/// * dropping additive zeros and multiplicative ones,
/// * `0*e -> 0`, `0/e -> 0`, `-1*e -> -e`, `--e -> e`,
/// * `e^1 -> e`, `e^0 -> 1`,
/// * folding an operator whose operands are all constants.
///
/// No reassociation, no distribution, no trigonometric identities.
pub fn simplify(e: &Expr) -> Expr {
    let node = match e {
        Expr::Const(_) | Expr::Var => return e.clone(),
        Expr::Add(l, r) => {
            let (l, r) = (simplify(l), simplify(r));
            if l.is_const(0.0) {
                r
            } else if r.is_const(0.0) {
                l
            } else {
                l + r
            }
        }
        Expr::Sub(l, r) => {
            let (l, r) = (simplify(l), simplify(r));
            if r.is_const(0.0) {
                l
            } else if l.is_const(0.0) {
                negate(r)
            } else {
                l - r
            }
        }
        Expr::Mul(l, r) => {
            let (l, r) = (simplify(l), simplify(r));
            if l.is_const(0.0) || r.is_const(0.0) {
                Expr::Const(0.0)
            } else if l.is_const(1.0) {
                r
            } else if r.is_const(1.0) {
                l
            } else if l.is_const(-1.0) {
                negate(r)
            } else if r.is_const(-1.0) {
                negate(l)
            } else {
                l * r
            }
        }
        Expr::Div(l, r) => {
            let (l, r) = (simplify(l), simplify(r));
            if r.is_const(1.0) {
                l
            } else if l.is_const(0.0) && !r.is_const(0.0) {
                Expr::Const(0.0)
            } else {
                l / r
            }
        }
        Expr::Neg(inner) => negate(simplify(inner)),
        Expr::Pow(base, c) => {
            let base = simplify(base);
            if *c == 1.0 {
                base
            } else if *c == 0.0 {
                Expr::Const(1.0)
            } else {
                base.powc(*c)
            }
        }
        Expr::Call(func, arg) => Expr::call(*func, simplify(arg)),
    };
    fold(node)
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Neg(inner) => *inner,
        other => -other,
    }
}

/// Replaces a node whose children are all constants by its value, unless
/// evaluating it fails (division by zero, log of a non-positive constant).
fn fold(e: Expr) -> Expr {
    let foldable = match &e {
        Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
            l.as_const().is_some() && r.as_const().is_some()
        }
        Expr::Neg(inner) | Expr::Pow(inner, _) | Expr::Call(_, inner) => {
            inner.as_const().is_some()
        }
        Expr::Const(_) | Expr::Var => false,
    };
    if !foldable {
        return e;
    }
    match e.eval(0.0) {
        Ok(v) => Expr::Const(v),
        Err(_) => e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{differentiate, parse};

    fn s(text: &str) -> Expr {
        simplify(&parse(text).unwrap())
    }

    #[test]
    fn identity_and_annihilator_rules() {
        assert_eq!(s("0*sin(x)+x"), Expr::Var);
        assert_eq!(s("1*x"), Expr::Var);
        assert_eq!(s("x*1 - 0"), Expr::Var);
        assert_eq!(s("x^1"), Expr::Var);
        assert_eq!(s("sin(x)^0"), Expr::Const(1.0));
        assert_eq!(s("--x"), Expr::Var);
        assert_eq!(s("0 - x"), parse("-x").unwrap());
        assert_eq!(s("x/1"), Expr::Var);
    }

    #[test]
    fn constant_folding() {
        assert_eq!(s("2*3"), Expr::Const(6.0));
        assert_eq!(s("-(2)"), Expr::Const(-2.0));
        assert_eq!(s("exp(0) + x"), parse("1 + x").unwrap());
        assert_eq!(s("2^3*x"), parse("8*x").unwrap());
    }

    #[test]
    fn folding_skips_undefined_constants() {
        assert_eq!(s("1/0"), parse("1/0").unwrap());
        assert_eq!(s("ln(0 - 1)"), Expr::Const(-1.0).ln());
    }

    #[test]
    fn does_not_reassociate() {
        assert_eq!(s("2*(3*x)"), parse("2*(3*x)").unwrap());
        assert_eq!(s("(x + 1) + 2"), parse("x + 1 + 2").unwrap());
    }

    #[test]
    fn simplified_derivative_of_square() {
        let d = differentiate(&parse("x^2").unwrap());
        assert_eq!(simplify(&d), parse("2*x").unwrap());
    }

    #[test]
    fn idempotent() {
        for text in ["0*sin(x)+x", "x^2*exp(x) - 0", "(1+x)^(-1)", "ln(1+x)/x"] {
            let once = s(text);
            assert_eq!(simplify(&once), once);
        }
    }
}
