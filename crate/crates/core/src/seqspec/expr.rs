//! The small expression language for `user_closed_form` sequences.
//!
//! Grammar (in the single variable `n`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'n' | '(' expr ')' | func '(' expr ')'
//! func   := 'exp' | 'ln' | 'sqrt'
//! ```
//!
//! Numbers are decimal literals and are enclosed exactly as rationals.

use rug::Rational;

use crate::numerics::{parse_rational, NumericsError, Real};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sqrt(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("expression error at byte {pos}: {message}")]
pub struct ExprError {
    pub pos: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { pos: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                let bytes = self.src.as_bytes();
                while self.pos < bytes.len() {
                    let b = bytes[self.pos];
                    let exp_sign = (b == b'+' || b == b'-')
                        && matches!(bytes[self.pos - 1], b'e' | b'E');
                    if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let text = &self.src[start..self.pos];
                match parse_rational(text) {
                    Ok(v) => Ok(Expr::Num(v)),
                    Err(_) => {
                        self.pos = start;
                        self.err(format!("bad number `{text}`"))
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.src[self.pos..].starts_with(|c: char| c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                if name == "n" {
                    return Ok(Expr::Var);
                }
                let wrap: fn(Box<Expr>) -> Expr = match name {
                    "exp" => Expr::Exp,
                    "ln" | "log" => Expr::Ln,
                    "sqrt" => Expr::Sqrt,
                    _ => {
                        self.pos = start;
                        return self.err(format!("unknown identifier `{name}`"));
                    }
                };
                if !self.eat('(') {
                    return self.err(format!("expected `(` after `{name}`"));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(wrap(Box::new(arg)))
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(e)
    }

    /// Interval value at index `n`.
    pub fn eval(&self, n: u64, prec: u32) -> Result<Real, NumericsError> {
        Ok(match self {
            Expr::Num(v) => Real::from_rational(v, prec),
            Expr::Var => Real::from_rational(&Rational::from(n), prec),
            Expr::Neg(a) => -a.eval(n, prec)?,
            Expr::Add(a, b) => a.eval(n, prec)? + b.eval(n, prec)?,
            Expr::Sub(a, b) => a.eval(n, prec)? - b.eval(n, prec)?,
            Expr::Mul(a, b) => a.eval(n, prec)? * b.eval(n, prec)?,
            Expr::Div(a, b) => {
                let d = b.eval(n, prec)?;
                if d.contains_f64(0.0) {
                    return Err(NumericsError::domain("division", d.lo()));
                }
                a.eval(n, prec)? / d
            }
            Expr::Pow(a, b) => pow(&a.eval(n, prec)?, b, n, prec)?,
            Expr::Exp(a) => a.eval(n, prec)?.exp(),
            Expr::Ln(a) => {
                let x = a.eval(n, prec)?;
                if !x.certainly_positive() {
                    return Err(NumericsError::domain("ln", x.lo()));
                }
                x.ln()?
            }
            Expr::Sqrt(a) => a.eval(n, prec)?.sqrt()?,
        })
    }

    /// Enclosure of `ln(value)`, rewriting `ln(exp(x))`, products, quotients
    /// and powers so that the logarithm of an unrepresentably small or large
    /// value is still available.
    pub fn eval_ln(&self, n: u64, prec: u32) -> Result<Real, NumericsError> {
        match self {
            Expr::Exp(a) => a.eval(n, prec),
            Expr::Mul(a, b) => Ok(a.eval_ln(n, prec)? + b.eval_ln(n, prec)?),
            Expr::Div(a, b) => Ok(a.eval_ln(n, prec)? - b.eval_ln(n, prec)?),
            Expr::Pow(a, b) => Ok(b.eval(n, prec)? * a.eval_ln(n, prec)?),
            Expr::Sqrt(a) => Ok(a.eval_ln(n, prec)?.div_pow2(1)),
            _ => {
                let x = self.eval(n, prec)?;
                if !x.certainly_positive() {
                    return Err(NumericsError::domain("ln", x.lo()));
                }
                x.ln()
            }
        }
    }
}

/// `x^y`, exact for small nonnegative integer exponents (which allows
/// negative bases), otherwise `exp(y ln x)`.
fn pow(base: &Real, exponent: &Expr, n: u64, prec: u32) -> Result<Real, NumericsError> {
    let y = exponent.eval(n, prec)?;
    if y.is_point() && y.lo().is_integer() && *y.lo() >= 0 && *y.lo() <= 64 {
        let k = y.lo().to_u32_saturating().unwrap_or(0);
        let mut acc = Real::one(prec);
        for _ in 0..k {
            acc = &acc * base;
        }
        return Ok(acc);
    }
    if !base.certainly_positive() {
        return Err(NumericsError::domain("pow", base.lo()));
    }
    base.pow(&y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = Expr::parse("1 - 2 - 3").unwrap();
        assert!(e.eval(1, 64).unwrap().contains_f64(-4.0));
        let e = Expr::parse("2^3^2").unwrap();
        assert!(e.eval(1, 64).unwrap().contains_f64(512.0));
        let e = Expr::parse("-n^2 + 1/(n+1)").unwrap();
        assert!(e.eval(3, 64).unwrap().contains_f64(-9.0 + 0.25));
        let e = Expr::parse("(1/2)^n").unwrap();
        assert_eq!(e.eval(4, 64).unwrap(), Real::parse("0.0625", 64).unwrap());
    }

    #[test]
    fn log_channel_survives_underflow() {
        let e = Expr::parse("exp(-n^3)").unwrap();
        let ln = e.eval_ln(2000, 128).unwrap();
        assert!(ln.contains_f64(-8.0e9));
        let e = Expr::parse("1/exp(2^n)").unwrap();
        let ln = e.eval_ln(40, 128).unwrap();
        assert!(ln.contains_f64(-((1u64 << 40) as f64)));
    }

    #[test]
    fn reports_position() {
        let err = Expr::parse("1 + foo(n)").unwrap_err();
        assert_eq!(err.pos, 4);
        assert!(Expr::parse("exp n").is_err());
        assert!(Expr::parse("(1").is_err());
        assert!(Expr::parse("1 2").is_err());
    }
}
