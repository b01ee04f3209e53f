//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | base ("^" exponent)?
//! base   := number | "pi" | ident | "(" expr ")" | func "(" expr ")"
//! ident  := "a" digits | "t"
//! func   := sqrt | sin | cos | exp | log | atan
//! ```
//!
//! Exponents must be rational literals: `^2`, `^-1`, `^(3/2)`, `^(-1/2)`.
//! A literal `p/q` written without whitespace is one rational token, so
//! `a1^2/3` is `a1^(2/3)`. Decimals such as `0.25` or `1e-3` are read as
//! exact rationals. `t` is an alias for `a1`.

use std::sync::Arc;

use num_bigint::BigInt;

type BigRational = Ratio<BigInt>;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::{BinaryOp, Expr, Rational, UnaryOp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
    VariableOutOfRange { name: String, arity: usize },
    NumberTooLarge(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{} at byte {offset}", describe(.kind))]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Syntax(msg) => format!("syntax error: {msg}"),
        ParseErrorKind::UnknownIdentifier(name) => format!("unknown identifier `{name}`"),
        ParseErrorKind::VariableOutOfRange { name, arity } => {
            format!("variable index out of range: `{name}` with arity {arity}")
        }
        ParseErrorKind::NumberTooLarge(text) => format!("number `{text}` does not fit in 64 bits"),
    }
}

/// Parses `text` as an expression in `arity` variables `a1..a{arity}`.
pub fn parse(text: &str, arity: usize) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        arity,
        end: text.len(),
    };
    let expr = parser.expr()?;
    match parser.peek() {
        None => Ok(expr),
        Some(tok) => Err(syntax(tok.offset, format!("unexpected {}", tok.kind.describe()))),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Number(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(r) => format!("number {r}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Caret => "`^`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn syntax(offset: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        offset,
        kind: ParseErrorKind::Syntax(msg.into()),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => TokenKind::Plus,
            b'-' => TokenKind::Minus,
            b'*' => TokenKind::Star,
            b'/' => TokenKind::Slash,
            b'^' => TokenKind::Caret,
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b'0'..=b'9' | b'.' => {
                let (value, next) = lex_number(bytes, i)?;
                i = next;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    offset: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(text[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        tokens.push(Token { kind, offset: start });
    }
    Ok(tokens)
}

/// Reads a decimal literal, optionally followed by `/digits` with no
/// whitespace, which forms a rational literal.
fn lex_number(bytes: &[u8], start: usize) -> Result<(Rational, usize), ParseError> {
    let (numer, mut i) = lex_decimal(bytes, start)?;
    if i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit() {
        let (denom, next) = lex_decimal(bytes, i + 1)?;
        if denom.is_zero() {
            return Err(syntax(i + 1, "zero denominator"));
        }
        i = next;
        let value = numer / denom;
        return Ok((to_small(value, bytes, start, i)?, i));
    }
    Ok((to_small(numer, bytes, start, i)?, i))
}

fn lex_decimal(bytes: &[u8], start: usize) -> Result<(BigRational, usize), ParseError> {
    let mut i = start;
    let mut digits = String::new();
    let mut frac_len: i64 = 0;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        digits.push(bytes[i] as char);
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            frac_len += 1;
            i += 1;
        }
    }
    if digits.is_empty() {
        return Err(syntax(start, "malformed number"));
    }
    let mut exponent: i64 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        let mut negative = false;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            negative = bytes[j] == b'-';
            j += 1;
        }
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j == exp_start {
            return Err(syntax(i, "malformed exponent"));
        }
        let text = std::str::from_utf8(&bytes[exp_start..j]).unwrap_or("0");
        exponent = text
            .parse::<i64>()
            .ok()
            .filter(|e| *e <= 400)
            .ok_or_else(|| syntax(exp_start, "exponent too large"))?;
        if negative {
            exponent = -exponent;
        }
        i = j;
    }
    let mantissa: BigInt = digits.parse().map_err(|_| syntax(start, "malformed number"))?;
    let shift = exponent - frac_len;
    let ten = BigInt::from(10);
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    let value = if shift >= 0 {
        BigRational::from_integer(mantissa * scale)
    } else {
        BigRational::new(mantissa, scale)
    };
    Ok((value, i))
}

fn to_small(value: BigRational, bytes: &[u8], start: usize, end: usize) -> Result<Rational, ParseError> {
    match (value.numer().to_i64(), value.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Ratio::new(n, d)),
        _ => Err(ParseError {
            offset: start,
            kind: ParseErrorKind::NumberTooLarge(
                String::from_utf8_lossy(&bytes[start..end]).into_owned(),
            ),
        }),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    arity: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn bump(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ParseError> {
        match self.peek() {
            Some(tok) if tok.kind == kind => {
                self.pos += 1;
                Ok(())
            }
            Some(tok) => Err(syntax(
                tok.offset,
                format!("expected {}, found {}", kind.describe(), tok.kind.describe()),
            )),
            None => Err(syntax(self.end, format!("expected {}, found end of input", kind.describe()))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Plus) => BinaryOp::Add,
                Some(TokenKind::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Star) => BinaryOp::Mul,
                Some(TokenKind::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Arc::new(lhs), Arc::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek_kind() == Some(&TokenKind::Minus) {
            self.pos += 1;
            // `-2` is a negative literal unless it is the base of a power.
            if let Some(TokenKind::Number(r)) = self.peek_kind() {
                let r = *r;
                let followed_by_caret =
                    matches!(self.tokens.get(self.pos + 1), Some(t) if t.kind == TokenKind::Caret);
                if !followed_by_caret && !r.is_zero() {
                    self.pos += 1;
                    return Ok(Expr::Const(-r));
                }
            }
            let inner = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Arc::new(inner)));
        }
        let base = self.base()?;
        if self.peek_kind() == Some(&TokenKind::Caret) {
            self.pos += 1;
            let exponent = self.exponent()?;
            return Ok(Expr::Pow(Arc::new(base), exponent));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        let offset = self.offset();
        let parenthesized = self.peek_kind() == Some(&TokenKind::LParen);
        if parenthesized {
            self.pos += 1;
        }
        let negative = self.peek_kind() == Some(&TokenKind::Minus);
        if negative {
            self.pos += 1;
        }
        let value = match self.bump() {
            Some(Token {
                kind: TokenKind::Number(r),
                ..
            }) => r,
            _ => return Err(syntax(offset, "exponent must be a rational literal")),
        };
        if parenthesized {
            self.expect(TokenKind::RParen)?;
        }
        Ok(if negative { -value } else { value })
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        let tok = self
            .bump()
            .ok_or_else(|| syntax(self.end, "unexpected end of input"))?;
        match tok.kind {
            TokenKind::Number(r) => Ok(Expr::Const(r)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => self.identifier(name, offset),
            other => Err(syntax(offset, format!("unexpected {}", other.describe()))),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Expr, ParseError> {
        if let Some(op) = UnaryOp::from_name(&name) {
            self.expect(TokenKind::LParen)?;
            let arg = self.expr()?;
            self.expect(TokenKind::RParen)?;
            return Ok(Expr::Unary(op, Arc::new(arg)));
        }
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        let index = if name == "t" {
            Some(0)
        } else {
            name.strip_prefix('a')
                .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                .map(|d| d.parse::<usize>().ok().filter(|k| *k >= 1).map(|k| k - 1))
                .map(|k| k.unwrap_or(usize::MAX))
        };
        match index {
            Some(i) if i < self.arity => Ok(Expr::Var(i)),
            Some(_) => Err(ParseError {
                offset,
                kind: ParseErrorKind::VariableOutOfRange {
                    name,
                    arity: self.arity,
                },
            }),
            None => Err(ParseError {
                offset,
                kind: ParseErrorKind::UnknownIdentifier(name),
            }),
        }
    }
}
