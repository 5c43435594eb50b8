//! Arithmetic expressions in `x`, `y` and `eps` for initial data.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, the variables
//! `x`, `y`, `eps` and the functions `tanh`, `sin`, `cos`. `^` binds
//! tightest and associates to the right.

use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("unexpected character `{1}` at offset {0}")]
    Character(usize, char),
    #[error("malformed number `{1}` at offset {0}")]
    Number(usize, String),
    #[error("unknown identifier `{1}` at offset {0}")]
    Identifier(usize, String),
    #[error("expected {expected} at offset {at}")]
    Expected { at: usize, expected: &'static str },
    #[error("trailing input at offset {0}")]
    Trailing(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Tanh,
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Eps,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let toks = lex(src)?;
        let mut p = Parser { toks, pos: 0, len: src.len() };
        let e = p.sum()?;
        if p.pos < p.toks.len() {
            return Err(ExprError::Trailing(p.toks[p.pos].0));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, y: f64, eps: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Eps => eps,
            Expr::Neg(a) => -a.eval(x, y, eps),
            Expr::Add(a, b) => a.eval(x, y, eps) + b.eval(x, y, eps),
            Expr::Sub(a, b) => a.eval(x, y, eps) - b.eval(x, y, eps),
            Expr::Mul(a, b) => a.eval(x, y, eps) * b.eval(x, y, eps),
            Expr::Div(a, b) => a.eval(x, y, eps) / b.eval(x, y, eps),
            Expr::Pow(a, b) => {
                let base = a.eval(x, y, eps);
                match b.as_ref() {
                    Expr::Num(n) if n.fract() == 0.0 && n.abs() <= 64.0 => base.powi(*n as i32),
                    e => base.powf(e.eval(x, y, eps)),
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x, y, eps);
                match f {
                    Func::Tanh => v.tanh(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Eps => f.write_str("eps"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Tanh => "tanh",
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[s..i];
            let v = text
                .parse::<f64>()
                .map_err(|_| ExprError::Number(s, text.to_string()))?;
            out.push((s, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((s, Tok::Ident(src[s..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(ExprError::Character(i, ch));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn eat(&mut self, op: char) -> bool {
        if matches!(self.toks.get(self.pos), Some((_, Tok::Op(c))) if *c == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.product()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.product()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.product()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.at();
        let tok = self.toks.get(self.pos).map(|t| t.1.clone());
        match tok {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "x" => return Ok(Expr::X),
                    "y" => return Ok(Expr::Y),
                    "eps" => return Ok(Expr::Eps),
                    "tanh" => Func::Tanh,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    _ => return Err(ExprError::Identifier(at, name)),
                };
                if !self.eat('(') {
                    return Err(ExprError::Expected { at: self.at(), expected: "`(`" });
                }
                let arg = self.sum()?;
                if !self.eat(')') {
                    return Err(ExprError::Expected { at: self.at(), expected: "`)`" });
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(ExprError::Expected { at: self.at(), expected: "`)`" });
                }
                Ok(e)
            }
            _ => Err(ExprError::Expected { at, expected: "a number, variable or `(`" }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str) -> f64 {
        Expr::parse(s).unwrap().eval(0.5, -2.0, 0.01)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3"), 7.0);
        assert_eq!(ev("(1 + 2) * 3"), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2"), 512.0);
        assert_eq!(ev("-2 ^ 2"), -4.0);
        assert_eq!(ev("8 / 4 / 2"), 1.0);
        assert_eq!(ev("1 - 2 - 3"), -4.0);
        assert_eq!(ev("2 ^ -1"), 0.5);
    }

    #[test]
    fn variables_and_functions() {
        assert_eq!(ev("x * y + eps"), -1.0 + 0.01);
        assert_eq!(ev("tanh(0)"), 0.0);
        assert!((ev("sin(x)^2 + cos(x)^2") - 1.0).abs() < 1e-15);
        assert_eq!(ev("1.5e-2 * 2E2"), 3.0);
        let u0 = "tanh(((x-0.3)^2+y^2-0.25^2)/eps)";
        let expect = (((0.5f64 - 0.3).powi(2) + 4.0 - 0.0625) / 0.01).tanh();
        assert_eq!(ev(u0), expect);
    }

    #[test]
    fn display_round_trips() {
        let e = Expr::parse("tanh((x - 0.3)^2 / eps) * -y + cos(2)").unwrap();
        assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(Expr::parse("1 + z"), Err(ExprError::Identifier(4, "z".into())));
        assert_eq!(Expr::parse("2 $ 3"), Err(ExprError::Character(2, '$')));
        assert!(matches!(Expr::parse("(1 + 2"), Err(ExprError::Expected { at: 6, .. })));
        assert!(matches!(Expr::parse("sin 2"), Err(ExprError::Expected { .. })));
        assert_eq!(Expr::parse("1 2"), Err(ExprError::Trailing(2)));
        assert!(matches!(Expr::parse(""), Err(ExprError::Expected { at: 0, .. })));
        assert!(matches!(Expr::parse("1.2.3"), Err(ExprError::Number(0, _))));
    }
}
