//! A small arithmetic language in one variable `x`, used by run configurations
//! to state forcing terms and initial data as formulas.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! additive       := multiplicative (("+" | "-") multiplicative)*
//! multiplicative := unary (("*" | "/") unary)*
//! unary          := "-" unary | power
//! power          := atom ("^" integer)?
//! atom           := number | "x" | ("sin" | "cos") "(" additive ")" | "(" additive ")"
//! ```
//!
//! `-x^2` therefore means `-(x^2)`. Exponents are non-negative integer
//! literals, and division by a literal zero is rejected while parsing.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("division by the literal 0 at byte {offset}")]
    DivisionByZeroLiteral { offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Self {
        Expr::Num(0.0)
    }

    /// True for the literal `0` (possibly negated or parenthesized).
    pub fn is_zero_literal(&self) -> bool {
        match self {
            Expr::Num(v) => *v == 0.0,
            Expr::Neg(e) => e.is_zero_literal(),
            _ => false,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(base, n) => base.eval(x).powi(*n as i32),
            Expr::Call(Func::Sin, e) => e.eval(x).sin(),
            Expr::Call(Func::Cos, e) => e.eval(x).cos(),
        }
    }
}

/// Fully parenthesized rendering; reparses to a structurally identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Pow(base, n) => write!(f, "({base}^{n})"),
            Expr::Call(func, e) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                };
                write!(f, "{name}({e})")
            }
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser { src: src.as_bytes(), pos: 0 };
    let expr = parser.additive()?;
    parser.skip_ws();
    if parser.pos != parser.src.len() {
        return Err(parser.error("operator or end of input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("`{}`", byte as char)))
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.multiplicative()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            self.skip_ws();
            let offset = self.pos;
            let rhs = self.unary()?;
            if op == BinOp::Div && rhs.is_zero_literal() {
                return Err(ParseError::DivisionByZeroLiteral { offset });
            }
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match digits.parse::<u32>() {
            Ok(n) if !digits.is_empty() => Ok(Expr::Pow(Box::new(base), n)),
            _ => {
                self.pos = start;
                Err(self.error("non-negative integer exponent"))
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.additive()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let func = match &self.src[start..self.pos] {
                    b"x" => return Ok(Expr::X),
                    b"sin" => Func::Sin,
                    b"cos" => Func::Cos,
                    _ => {
                        self.pos = start;
                        return Err(self.error("`x`, `sin` or `cos`"));
                    }
                };
                self.expect(b'(')?;
                let arg = self.additive()?;
                self.expect(b')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.error("number, `x`, function call or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error("digits"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark + 1;
                return Err(self.error("exponent digits"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| ParseError::Syntax {
                offset: start,
                expected: "number".into(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(src: &str, x: f64) -> f64 {
        parse(src).unwrap().eval(x)
    }

    #[test]
    fn forcing_formulas() {
        assert_eq!(eval("sin(x)", 0.0), 0.0);
        assert_eq!(eval("x", 4.0), 4.0);
        assert!((eval("-3/16*x^2 + 3/4*x", 2.0) - 0.75).abs() < 1e-15);
        assert_eq!(eval("2^3", 123.0), 8.0);
        assert_eq!(eval("cos(x)", 0.0), 1.0);
        assert_eq!(eval("x^2-4*x", 4.0), 0.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-x^2", 3.0), -9.0);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("10-4-3", 0.0), 3.0);
        assert_eq!(eval("2*3^2", 0.0), 18.0);
        assert_eq!(eval("--x", 2.0), 2.0);
        assert_eq!(eval("(x+1)^2", 2.0), 9.0);
        assert_eq!(eval("  1.5e1 *\t.5 ", 0.0), 7.5);
        assert_eq!(eval("x^0", 7.0), 1.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(
            parse("1 +"),
            Err(ParseError::Syntax {
                offset: 3,
                expected: "number, `x`, function call or `(`".into()
            })
        );
        assert!(matches!(parse("x^-1"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x^1.5"), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(parse("tan(x)"), Err(ParseError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("sin x"), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(matches!(parse("(x"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x y"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse(""), Err(ParseError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn literal_zero_divisor_is_rejected() {
        assert_eq!(
            parse("x / 0"),
            Err(ParseError::DivisionByZeroLiteral { offset: 4 })
        );
        assert!(matches!(parse("1/(0.0)"), Err(ParseError::DivisionByZeroLiteral { .. })));
        assert!(matches!(parse("1/-0"), Err(ParseError::DivisionByZeroLiteral { .. })));
        assert!(parse("1/(x-x)").is_ok());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            (0u32..20).prop_map(|n| Expr::Num(n as f64)),
            Just(Expr::X),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (inner.clone(), 0u32..4).prop_map(|(e, n)| Expr::Pow(Box::new(e), n)),
                inner.clone().prop_map(|e| Expr::Call(Func::Sin, Box::new(e))),
                inner.clone().prop_map(|e| Expr::Call(Func::Cos, Box::new(e))),
                (
                    prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)],
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(reparsed, e);
        }
    }
}
