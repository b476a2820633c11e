//! A small arithmetic language for maps and gauges.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' factor)?
//! base   := number | ident | ident '(' args ')' | '(' expr ')'
//! cond   := expr ('<' | '<=' | '>' | '>=' | '==') expr
//! ```
//!
//! Builtins: `min(a, b)`, `max(a, b)`, `exp(a)`, `ln(a)`, `abs(a)` and
//! `piecewise(cond, a, b)`. Free variables: `x`, `t`, `tau`, `s`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub const VARIABLES: [&str; 4] = ["x", "t", "tau", "s"];

/// Byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 3,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
    Exp,
    Ln,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "min" => Func::Min,
            "max" => Func::Max,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cond {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Var(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    Piecewise(Box<Cond>, Box<Expr>, Box<Expr>),
}

/// A parse tree node. Equality compares structure only, not spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env {
    pub x: Option<f64>,
    pub t: Option<f64>,
    pub tau: Option<f64>,
    pub s: Option<f64>,
}

impl Env {
    pub fn x(x: f64) -> Self {
        Env {
            x: Some(x),
            ..Env::default()
        }
    }

    fn get(&self, name: &str) -> Option<f64> {
        match name {
            "x" => self.x,
            "t" => self.t,
            "tau" => self.tau,
            "s" => self.s,
            _ => None,
        }
    }
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser {
            src,
            tokens,
            pos: 0,
        };
        let e = p.expr()?;
        match p.peek() {
            Tok::Eof => Ok(e),
            _ => Err(p.error_here("unexpected token after expression")),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match &self.kind {
            ExprKind::Num(_) => {}
            ExprKind::Var(v) => {
                out.insert(v.as_str());
            }
            ExprKind::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            ExprKind::Piecewise(c, a, b) => {
                c.lhs.collect_vars(out);
                c.rhs.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn eval(&self, env: &Env) -> Result<f64> {
        let err = |message: String| Error::Eval {
            start: self.span.start + 1,
            end: self.span.end,
            message,
        };
        let v = match &self.kind {
            ExprKind::Num(v) => *v,
            ExprKind::Var(name) => env
                .get(name)
                .ok_or_else(|| err(format!("variable `{name}` is not bound here")))?,
            ExprKind::Bin(op, a, b) => {
                let (a, b) = (a.eval(env)?, b.eval(env)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(err("division by zero".into()));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            ExprKind::Call(f, args) => {
                let a = args[0].eval(env)?;
                match f {
                    Func::Min => a.min(args[1].eval(env)?),
                    Func::Max => a.max(args[1].eval(env)?),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(err(format!("ln of non-positive value {a}")));
                        }
                        a.ln()
                    }
                }
            }
            ExprKind::Piecewise(c, a, b) => {
                let (l, r) = (c.lhs.eval(env)?, c.rhs.eval(env)?);
                let holds = match c.op {
                    CmpOp::Lt => l < r,
                    CmpOp::Le => l <= r,
                    CmpOp::Gt => l > r,
                    CmpOp::Ge => l >= r,
                    CmpOp::Eq => l == r,
                };
                if holds {
                    a.eval(env)?
                } else {
                    b.eval(env)?
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(format!("non-finite result {v}")))
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Bin(op, ..) => op.precedence(),
            _ => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v}"),
            ExprKind::Var(v) => f.write_str(v),
            ExprKind::Bin(op, a, b) => {
                let p = op.precedence();
                let right_assoc = *op == BinOp::Pow;
                let left_paren = a.precedence() < p || (right_assoc && a.precedence() == p);
                let right_paren = b.precedence() < p || (!right_assoc && b.precedence() == p);
                write_side(f, a, left_paren)?;
                write!(f, " {} ", op.symbol())?;
                write_side(f, b, right_paren)
            }
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            ExprKind::Piecewise(c, a, b) => {
                write!(
                    f,
                    "piecewise({} {} {}, {a}, {b})",
                    c.lhs,
                    c.op.symbol(),
                    c.rhs
                )
            }
        }
    }
}

fn write_side(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Op(BinOp),
    Cmp(CmpOp),
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| syntax(src, start, format!("malformed number `{text}`")))?;
            Tok::Num(v)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else {
            let next = bytes.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                ('<', Some(b'=')) => (Tok::Cmp(CmpOp::Le), 2),
                ('>', Some(b'=')) => (Tok::Cmp(CmpOp::Ge), 2),
                ('=', Some(b'=')) => (Tok::Cmp(CmpOp::Eq), 2),
                ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
                ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('+', _) => (Tok::Op(BinOp::Add), 1),
                ('-', _) => (Tok::Op(BinOp::Sub), 1),
                ('*', _) => (Tok::Op(BinOp::Mul), 1),
                ('/', _) => (Tok::Op(BinOp::Div), 1),
                ('^', _) => (Tok::Op(BinOp::Pow), 1),
                _ => return Err(syntax(src, start, format!("unexpected character `{c}`"))),
            };
            i += len;
            tok
        };
        out.push((tok, Span { start, end: i }));
    }
    out.push((
        Tok::Eof,
        Span {
            start: src.len(),
            end: src.len(),
        },
    ));
    Ok(out)
}

fn syntax(src: &str, offset: usize, message: String) -> Error {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Error::Syntax {
        line,
        column,
        message,
    }
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: &str) -> Error {
        let what = match self.peek() {
            Tok::Eof => "end of input".to_string(),
            _ => format!("`{}`", &self.src[self.span().start..self.span().end]),
        };
        syntax(self.src, self.span().start, format!("{msg}, found {what}"))
    }

    fn expect(&mut self, tok: Tok, msg: &str) -> Result<Span> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.error_here(msg))
        }
    }

    fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        let span = Span {
            start: a.span.start,
            end: b.span.end,
        };
        Expr {
            kind: ExprKind::Bin(op, Box::new(a), Box::new(b)),
            span,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Tok::Op(op @ (BinOp::Add | BinOp::Sub)) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            lhs = Self::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Tok::Op(op @ (BinOp::Mul | BinOp::Div)) = *self.peek() {
            self.bump();
            let rhs = self.factor()?;
            lhs = Self::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if let Tok::Op(BinOp::Pow) = self.peek() {
            self.bump();
            let exp = self.factor()?;
            return Ok(Self::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn cond(&mut self) -> Result<Cond> {
        let lhs = self.expr()?;
        let op = match *self.peek() {
            Tok::Cmp(op) => op,
            _ => return Err(self.error_here("expected a comparison")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond { lhs, op, rhs })
    }

    fn base(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Num(v),
                    span,
                })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                let end = self.expect(Tok::RParen, "expected `)`")?;
                Ok(Expr {
                    kind: e.kind,
                    span: Span {
                        start: span.start,
                        end: end.end,
                    },
                })
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() != Tok::LParen {
                    if !VARIABLES.contains(&name.as_str()) {
                        return Err(syntax(
                            self.src,
                            span.start,
                            format!("unknown identifier `{name}`"),
                        ));
                    }
                    return Ok(Expr {
                        kind: ExprKind::Var(name),
                        span,
                    });
                }
                self.bump();
                if name == "piecewise" {
                    let c = self.cond()?;
                    self.expect(Tok::Comma, "expected `,` after piecewise condition")?;
                    let a = self.expr()?;
                    self.expect(Tok::Comma, "piecewise takes 3 arguments; expected `,`")?;
                    let b = self.expr()?;
                    let end =
                        self.expect(Tok::RParen, "piecewise takes 3 arguments; expected `)`")?;
                    return Ok(Expr {
                        kind: ExprKind::Piecewise(Box::new(c), Box::new(a), Box::new(b)),
                        span: Span {
                            start: span.start,
                            end: end.end,
                        },
                    });
                }
                let func = Func::from_name(&name).ok_or_else(|| {
                    syntax(self.src, span.start, format!("unknown function `{name}`"))
                })?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                let end = self.expect(Tok::RParen, "expected `,` or `)` in argument list")?;
                if args.len() != func.arity() {
                    return Err(syntax(
                        self.src,
                        span.start,
                        format!(
                            "arity mismatch: `{name}` takes {} argument(s), got {}",
                            func.arity(),
                            args.len()
                        ),
                    ));
                }
                Ok(Expr {
                    kind: ExprKind::Call(func, args),
                    span: Span {
                        start: span.start,
                        end: end.end,
                    },
                })
            }
            _ => Err(self.error_here("expected a number, identifier or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_example() {
        let e = Expr::parse("exp(0 - x / t)").unwrap();
        let env = Env {
            x: Some(2.0),
            t: Some(4.0),
            ..Env::default()
        };
        assert!((e.eval(&env).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn piecewise_node() {
        let e = Expr::parse("piecewise(x <= 1, x^2, 1)").unwrap();
        assert!(matches!(e.kind, ExprKind::Piecewise(..)));
        assert_eq!(e.eval(&Env::x(0.5)).unwrap(), 0.25);
        assert_eq!(e.eval(&Env::x(3.0)).unwrap(), 1.0);
    }

    #[test]
    fn syntax_error_column() {
        match Expr::parse("x ^ ^ 2") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let v = |s: &str| Expr::parse(s).unwrap().eval(&Env::default()).unwrap();
        assert_eq!(v("1 + 2 * 3"), 7.0);
        assert_eq!(v("2 ^ 3 ^ 2"), 512.0);
        assert_eq!(v("8 - 4 - 2"), 2.0);
        assert_eq!(v("8 / 4 / 2"), 1.0);
        assert_eq!(v("(1 + 2) * 3"), 9.0);
        assert_eq!(v("min(3, max(1, 2))"), 2.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(Expr::parse("y + 1"), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("foo(1)"), Err(Error::Syntax { .. })));
        let arity = Expr::parse("min(1)").unwrap_err().to_string();
        assert!(arity.contains("arity"), "{arity}");
        assert!(Expr::parse("exp(1, 2)").is_err());
        assert!(Expr::parse("(1 + 2").is_err());
        assert!(Expr::parse("").is_err());
        let e = Expr::parse("1 + ln(x)").unwrap();
        match e.eval(&Env::x(0.0)) {
            Err(Error::Eval { start, end, .. }) => assert_eq!((start, end), (5, 9)),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("x / 0").unwrap().eval(&Env::x(1.0)).is_err());
        assert!(Expr::parse("t").unwrap().eval(&Env::x(1.0)).is_err());
    }

    #[test]
    fn print_roundtrip_examples() {
        for src in [
            "8 - (4 - 2)",
            "(2 ^ 3) ^ 2",
            "2 ^ 3 ^ 2",
            "x / (t * s)",
            "piecewise(x < 1, 0, x - 1)",
        ] {
            let e = Expr::parse(src).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
        assert_eq!(Expr::parse("(1+2)*3").unwrap().to_string(), "(1 + 2) * 3");
    }

    #[test]
    fn free_variables() {
        let e = Expr::parse("x * t + tau").unwrap();
        assert_eq!(
            e.free_vars().into_iter().collect::<Vec<_>>(),
            vec!["t", "tau", "x"]
        );
    }
}
