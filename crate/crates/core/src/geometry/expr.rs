//! A small expression language for defining scalar fields on the torus.
//!
//! Grammar (see `docs/expr_grammar.md` for the EBNF):
//! real/complex literals, coordinates `x0`..`x5`, `+ - * / ^`, unary minus,
//! `sin cos exp ln abs`, parentheses, constants `pi` and `i`.

use crate::error::{Error, Result};
use crate::geometry::field::ScalarField;
use crate::geometry::grid::TorusGrid;
use num_complex::Complex64;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    ImagUnit,
    Pi,
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        Ok(match self {
            Expr::Num(v) => Complex64::new(*v, 0.0),
            Expr::ImagUnit => Complex64::new(0.0, 1.0),
            Expr::Pi => Complex64::new(std::f64::consts::PI, 0.0),
            Expr::Coord(k) => {
                if *k >= x.len() {
                    return Err(Error::Eval(format!(
                        "coordinate x{k} not available on a {}-dimensional grid",
                        x.len()
                    )));
                }
                Complex64::new(x[*k], 0.0)
            }
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d.norm() == 0.0 {
                    return Err(Error::Eval("division by zero".into()));
                }
                a.eval(x)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                let exp = b.eval(x)?;
                if base.norm() == 0.0 && exp.re <= 0.0 && exp.norm() != 0.0 {
                    return Err(Error::Eval("zero raised to non-positive power".into()));
                }
                base.powc(exp)
            }
            Expr::Call(f, e) => {
                let v = e.eval(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Ln => {
                        if v.norm() == 0.0 {
                            return Err(Error::Eval("ln of zero".into()));
                        }
                        v.ln()
                    }
                    Func::Abs => Complex64::new(v.norm(), 0.0),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, parent: u8, tight: bool) -> fmt::Result {
            let need = e.precedence() < parent || (tight && e.precedence() == parent);
            if need {
                write!(f, "(")?;
            }
            write!(f, "{e}")?;
            if need {
                write!(f, ")")?;
            }
            Ok(())
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::ImagUnit => write!(f, "i"),
            Expr::Pi => write!(f, "pi"),
            Expr::Coord(k) => write!(f, "x{k}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                child(f, e, 3, true)
            }
            Expr::Add(a, b) => {
                child(f, a, 1, false)?;
                write!(f, " + ")?;
                child(f, b, 1, true)
            }
            Expr::Sub(a, b) => {
                child(f, a, 1, false)?;
                write!(f, " - ")?;
                child(f, b, 1, true)
            }
            Expr::Mul(a, b) => {
                child(f, a, 2, false)?;
                write!(f, " * ")?;
                child(f, b, 2, true)
            }
            Expr::Div(a, b) => {
                child(f, a, 2, false)?;
                write!(f, " / ")?;
                child(f, b, 2, true)
            }
            Expr::Pow(a, b) => {
                child(f, a, 4, true)?;
                write!(f, "^")?;
                child(f, b, 4, false)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// A parsed field expression; evaluate at points or on a whole grid.
#[derive(Debug, Clone)]
pub struct FieldExpr {
    ast: Expr,
    source: String,
}

impl FieldExpr {
    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval_at(&self, x: &[f64]) -> Result<Complex64> {
        self.ast.eval(x)
    }

    /// Evaluates at every grid point.
    pub fn evaluate_on(&self, grid: &TorusGrid) -> Result<ScalarField> {
        let mut data = Vec::with_capacity(grid.num_points());
        for p in 0..grid.num_points() {
            data.push(self.ast.eval(&grid.coords(p))?);
        }
        Ok(ScalarField::new(grid.clone(), data))
    }

    pub fn pretty(&self) -> String {
        self.ast.to_string()
    }
}

pub fn parse_field_expr(source: &str) -> Result<FieldExpr> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        source,
    };
    let ast = parser.expression()?;
    if parser.pos != parser.tokens.len() {
        let tok = &parser.tokens[parser.pos];
        return Err(parse_err(source, tok.offset, "unexpected trailing input"));
    }
    Ok(FieldExpr {
        ast,
        source: source.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn parse_err(source: &str, offset: usize, msg: &str) -> Error {
    let upto = &source[..offset.min(source.len())];
    let line = upto.matches('\n').count() + 1;
    let col = offset - upto.rfind('\n').map(|k| k + 1).unwrap_or(0) + 1;
    Error::Parse {
        line,
        col,
        msg: msg.to_string(),
    }
}

fn tokenize(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let ch = bytes[k] as char;
        let offset = k;
        match ch {
            ' ' | '\t' | '\n' | '\r' => {
                k += 1;
            }
            '+' => {
                out.push(Token { tok: Tok::Plus, offset });
                k += 1;
            }
            '-' => {
                out.push(Token { tok: Tok::Minus, offset });
                k += 1;
            }
            '*' => {
                out.push(Token { tok: Tok::Star, offset });
                k += 1;
            }
            '/' => {
                out.push(Token { tok: Tok::Slash, offset });
                k += 1;
            }
            '^' => {
                out.push(Token { tok: Tok::Caret, offset });
                k += 1;
            }
            '(' => {
                out.push(Token { tok: Tok::LParen, offset });
                k += 1;
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, offset });
                k += 1;
            }
            '0'..='9' | '.' => {
                let start = k;
                while k < bytes.len() && matches!(bytes[k] as char, '0'..='9' | '.') {
                    k += 1;
                }
                // exponent part
                if k < bytes.len() && matches!(bytes[k] as char, 'e' | 'E') {
                    let mut j = k + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        k = j;
                        while k < bytes.len() && (bytes[k] as char).is_ascii_digit() {
                            k += 1;
                        }
                    }
                }
                let text = &source[start..k];
                let v: f64 = text
                    .parse()
                    .map_err(|_| parse_err(source, start, "malformed number"))?;
                out.push(Token {
                    tok: Tok::Num(v),
                    offset,
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = k;
                while k < bytes.len()
                    && matches!(bytes[k] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    k += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(source[start..k].to_string()),
                    offset,
                });
            }
            _ => return Err(parse_err(source, k, &format!("unexpected character `{ch}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    source: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: &str) -> Error {
        let offset = self
            .tokens
            .get(self.pos)
            .map(|t| t.offset)
            .unwrap_or(self.source.len());
        parse_err(self.source, offset, msg)
    }

    fn expression(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            // right associative; allow unary minus in the exponent
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.bump().ok_or_else(|| self.err_here("unexpected end of input"))?;
        match tok.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expression()?;
                match self.bump() {
                    Some(Token { tok: Tok::RParen, .. }) => Ok(e),
                    _ => Err(parse_err(self.source, tok.offset, "unbalanced parenthesis")),
                }
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(Expr::Pi),
                "i" => Ok(Expr::ImagUnit),
                "sin" | "cos" | "exp" | "ln" | "abs" => {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "ln" => Func::Ln,
                        _ => Func::Abs,
                    };
                    match self.bump() {
                        Some(Token { tok: Tok::LParen, .. }) => {}
                        _ => {
                            return Err(parse_err(
                                self.source,
                                tok.offset,
                                "function call requires parentheses",
                            ))
                        }
                    }
                    let arg = self.expression()?;
                    match self.bump() {
                        Some(Token { tok: Tok::RParen, .. }) => {}
                        _ => {
                            return Err(parse_err(
                                self.source,
                                tok.offset,
                                "unbalanced parenthesis in call",
                            ))
                        }
                    }
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                _ => {
                    if let Some(rest) = name.strip_prefix('x') {
                        if let Ok(k) = rest.parse::<usize>() {
                            if k <= 5 {
                                return Ok(Expr::Coord(k));
                            }
                        }
                    }
                    Err(parse_err(
                        self.source,
                        tok.offset,
                        &format!("unknown identifier `{name}`"),
                    ))
                }
            },
            _ => Err(parse_err(self.source, tok.offset, "expected a value")),
        }
    }
}
