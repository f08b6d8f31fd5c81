//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' exponent)?
//! base   := number | 'x' | func '(' expr ')' | '(' expr ')'
//! exponent := '-'? number | '(' '-'? number ')'
//! func   := 'sin' | 'cos' | 'exp' | 'ln'
//! ```

use super::{Expr, Func, VARIABLE};
use crate::error::ParseError;

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    if p.pos == text.len() {
        return Err(p.error("empty input", "an expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        let msg = if p.peek() == Some(')') {
            "unbalanced ')'".to_string()
        } else {
            format!("unexpected {}", p.describe_next())
        };
        return Err(p.error(msg, "an operator or end of input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn error(&self, message: impl Into<String>, expected: impl Into<String>) -> ParseError {
        ParseError {
            offset: self.pos,
            message: message.into(),
            expected: expected.into(),
        }
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat('^') {
            let exponent = self.exponent()?;
            Ok(base.powc(exponent))
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let parenthesized = self.eat('(');
        let negative = self.eat('-');
        self.skip_ws();
        let value = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => self.number()?,
            _ => {
                let mut err = self.error(
                    format!("exponent must be a numeric constant, found {}", self.describe_next()),
                    "a number",
                );
                if !parenthesized && !negative {
                    err.offset = start;
                }
                return Err(err);
            }
        };
        if parenthesized && !self.eat(')') {
            return Err(self.error("unbalanced '(' in exponent", "')'"));
        }
        Ok(if negative { -value } else { value })
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input", "a number, 'x', a function or '('")),
            Some('(') => {
                let open = self.pos;
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    let mut err = self.error("unbalanced '('", "')'");
                    if self.pos == self.src.len() {
                        err.message = format!("unbalanced '(' opened at offset {open}");
                    }
                    return Err(err);
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let len = self
                    .rest()
                    .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                    .unwrap_or(self.rest().len());
                let ident = &self.src[start..start + len];
                if ident == VARIABLE {
                    self.pos += len;
                    return Ok(Expr::Var);
                }
                let Some(func) = Func::from_name(ident) else {
                    return Err(self.error(
                        format!("unknown identifier '{ident}'"),
                        "'x', 'sin', 'cos', 'exp' or 'ln'",
                    ));
                };
                self.pos += len;
                if !self.eat('(') {
                    return Err(self.error(format!("'{ident}' must be followed by '('"), "'('"));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("unbalanced '(' in function call", "')'"));
                }
                Ok(Expr::call(func, arg))
            }
            Some(_) => Err(self.error(
                format!("unexpected {}", self.describe_next()),
                "a number, 'x', a function or '('",
            )),
        }
    }

    /// Decimal literal: digits with optional fraction and exponent.
    fn number(&mut self) -> Result<f64, ParseError> {
        let bytes = self.rest().as_bytes();
        let mut i = 0;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - s
        };
        let mut mantissa = digits(&mut i);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            mantissa += digits(&mut i);
        }
        if mantissa == 0 {
            return Err(self.error("malformed number", "a digit"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) > 0 {
                i = j;
            }
        }
        let text = &self.rest()[..i];
        let value: f64 = text
            .parse()
            .map_err(|_| self.error(format!("malformed number '{text}'"), "a decimal literal"))?;
        if !value.is_finite() {
            return Err(self.error(format!("number '{text}' overflows"), "a finite literal"));
        }
        self.pos += i;
        Ok(value)
    }
}
