//! Closed-form scalar expressions over chart coordinates, evaluated on jets.
//!
//! Grammar: numbers, `pi`, coordinate names, `+ - * / ^`, unary minus,
//! parentheses and the functions `sin cos exp ln sqrt pow(a, b)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::manifold::TensorField;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Pow,
}

impl Func {
    fn from_name(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            "ln" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse().map_err(|_| Error::Parse(format!("bad number `{text}`")))?;
            out.push(Token::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    labels: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{c}`")))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    // right associative; binds tighter than unary minus on its left
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Token::Sym('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if let Some((func, arity)) = Func::from_name(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.sum()?];
                    while self.eat(',') {
                        args.push(self.sum()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(Error::Parse(format!("`{name}` takes {arity} argument(s), got {}", args.len())));
                    }
                    return Ok(Expr::Call(func, args));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                match self.labels.iter().position(|l| *l == name) {
                    Some(k) => Ok(Expr::Var(k)),
                    None => Err(Error::Parse(format!("unknown identifier `{name}`"))),
                }
            }
            Some(Token::Sym(c)) => Err(Error::Parse(format!("unexpected `{c}`"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

impl Expr {
    /// Parses `src` with coordinates named by `labels`.
    pub fn parse(src: &str, labels: &[String]) -> Result<Expr> {
        let mut p = Parser { tokens: tokenize(src)?, pos: 0, labels };
        let e = p.sum()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("trailing input after token {}", p.pos)));
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[Jet]) -> Result<Jet> {
        let like = &x[0];
        Ok(match self {
            Expr::Num(v) => Jet::constant(like.dim(), like.order(), *v),
            Expr::Var(k) => x[*k].clone(),
            Expr::Neg(e) => -&e.eval(x)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a.checked_div(&b)?,
                    Op::Pow => pow(&a, &b)?,
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln()?,
                    Func::Sqrt => a.sqrt()?,
                    Func::Pow => pow(&a, &args[1].eval(x)?)?,
                }
            }
        })
    }

    pub fn eval_f64(&self, p: &[f64]) -> Result<f64> {
        let x = crate::jet::seed_point(p, 1)?;
        Ok(self.eval(&x)?.value())
    }

    /// The expression as a scalar field.
    pub fn into_field(self) -> TensorField {
        TensorField::scalar(move |x| self.eval(x))
    }
}

/// Integer exponents use repeated products so negative bases stay legal.
fn pow(a: &Jet, b: &Jet) -> Result<Jet> {
    if b.is_constant() {
        let e = b.value();
        if e.fract() == 0.0 && e.abs() <= 64.0 {
            let m = a.powi(e.abs() as u32);
            return if e < 0.0 { m.recip() } else { Ok(m) };
        }
        return a.powf(e);
    }
    a.pow(b)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(k) => write!(f, "x{k}"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => {
                let c = match op {
                    Op::Add => '+',
                    Op::Sub => '-',
                    Op::Mul => '*',
                    Op::Div => '/',
                    Op::Pow => '^',
                };
                write!(f, "({a} {c} {b})")
            }
            Expr::Call(func, args) => {
                let name = format!("{func:?}").to_lowercase();
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{name}({})", args.join(", "))
            }
        }
    }
}

/// Parses a potential over a chart's coordinate labels.
pub fn parse_potential(src: &str, labels: &[String]) -> Result<TensorField> {
    Ok(Expr::parse(src, labels)?.into_field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::seed_point;

    fn labels() -> Vec<String> {
        ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
    }

    fn eval(src: &str, p: &[f64]) -> f64 {
        Expr::parse(src, &labels()).unwrap().eval_f64(p).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        let p = [2.0, 3.0, 0.5];
        assert_eq!(eval("1 + 2 * 3", &p), 7.0);
        assert_eq!(eval("(1 + 2) * 3", &p), 9.0);
        assert_eq!(eval("2 ^ 3 ^ 2", &p), 512.0);
        assert_eq!(eval("-x ^ 2", &p), -4.0);
        assert_eq!(eval("x - y - z", &p), -1.5);
        assert_eq!(eval("x / y * 3", &p), 2.0);
        assert!((eval("sin(pi / 2) + pow(y, 2) + sqrt(4) + exp(0) + ln(1)", &p) - 13.0).abs() < 1e-15);
        assert_eq!(eval("1.5e1 + 2E-1", &p), 15.2);
    }

    #[test]
    fn jet_derivatives_flow_through() {
        let e = Expr::parse("x^2 * y + sin(z)", &labels()).unwrap();
        let x = seed_point(&[1.0, 2.0, 0.0], 2).unwrap();
        let j = e.eval(&x).unwrap();
        assert_eq!(j.partial(&[1, 0, 0]).unwrap(), 4.0);
        assert_eq!(j.partial(&[0, 1, 0]).unwrap(), 1.0);
        assert_eq!(j.partial(&[0, 0, 1]).unwrap(), 1.0);
        assert_eq!(j.partial(&[1, 1, 0]).unwrap(), 2.0);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "x +", "(x", "foo(x)", "w", "sin(x, y)", "x $ y", "x y"] {
            assert!(matches!(Expr::parse(bad, &labels()), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn domain_errors_surface() {
        let e = Expr::parse("sqrt(x)", &labels()).unwrap();
        assert!(matches!(e.eval_f64(&[-1.0, 0.0, 0.0]), Err(Error::SqrtDomain(_))));
    }
}
