//! Closed-form expressions over simplex coordinates.
//!
//! An [`Expr`] describes one real-valued function of `arity` variables. It is
//! the concrete representation behind simplex component maps, scaling
//! profiles and form coefficients. Expressions are immutable; subtrees are
//! shared through [`Arc`], so cloning is cheap and evaluation can run from
//! any number of threads.
//!
//! Variables are stored zero-based: `Var(0)` is printed and parsed as `a1`.

mod diff;
mod normal;
mod parse;

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use normal::is_identically_zero;
pub use parse::{parse, ParseError, ParseErrorKind};

/// Exact rational used for constants and exponents.
pub type Rational = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
    Atan,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Atan => "atan",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sqrt" => UnaryOp::Sqrt,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "atan" => UnaryOp::Atan,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
        }
    }
}

/// Expression tree node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    Pi,
    Var(usize),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
    /// Power with an exact rational exponent in lowest terms.
    Pow(Arc<Expr>, Rational),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    /// `sqrt` of a negative number.
    Sqrt,
    /// `log` of a nonpositive number.
    Log,
    /// Division by zero.
    Division,
    /// Fractional power of a negative base, or nonpositive power of zero.
    Power,
    /// Result overflowed or otherwise became non-finite.
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Sqrt => "square root of a negative number",
            DomainKind::Log => "logarithm of a nonpositive number",
            DomainKind::Division => "division by zero",
            DomainKind::Power => "power outside its domain",
            DomainKind::NonFinite => "non-finite value",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("{kind} in `{subexpr}`")]
    Domain { kind: DomainKind, subexpr: String },
    #[error("variable a{} is not bound (point has {len} coordinates)", .index + 1)]
    Unbound { index: usize, len: usize },
}

impl Expr {
    pub fn constant(value: i64) -> Expr {
        Expr::Const(Rational::from_integer(value))
    }

    pub fn rational(numer: i64, denom: i64) -> Expr {
        Expr::Const(Rational::new(numer, denom))
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn as_const(&self) -> Option<Rational> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// One past the largest variable index used, i.e. the smallest arity
    /// under which the expression is well formed.
    pub fn min_arity(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Pi => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.min_arity(),
            Expr::Binary(_, a, b) => a.min_arity().max(b.min_arity()),
        }
    }

    /// Number of nodes in the tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Pi | Expr::Var(_) => 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// True when the expression contains an operation whose derivative can
    /// blow up at the boundary of its domain (roots, fractional or negative
    /// powers, quotients, logarithms).
    pub fn may_be_singular(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Pi | Expr::Var(_) => false,
            Expr::Unary(op, a) => {
                matches!(op, UnaryOp::Sqrt | UnaryOp::Log) || a.may_be_singular()
            }
            Expr::Binary(BinaryOp::Div, a, b) => {
                b.as_const().is_none() || a.may_be_singular() || b.may_be_singular()
            }
            Expr::Binary(_, a, b) => a.may_be_singular() || b.may_be_singular(),
            Expr::Pow(a, r) => !r.is_integer() || r.is_negative() || a.may_be_singular(),
        }
    }

    /// Evaluates at `point`, whose coordinate `i` binds `Var(i)`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Const(c) => rational_to_f64(*c),
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(i) => *point.get(*i).ok_or(EvalError::Unbound {
                index: *i,
                len: point.len(),
            })?,
            Expr::Unary(op, a) => {
                let x = a.eval(point)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain(DomainKind::Sqrt));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log => {
                        if x <= 0.0 {
                            return Err(self.domain(DomainKind::Log));
                        }
                        x.ln()
                    }
                    UnaryOp::Atan => x.atan(),
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval(point)?;
                let y = b.eval(point)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == 0.0 {
                            return Err(self.domain(DomainKind::Division));
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(a, r) => {
                let x = a.eval(point)?;
                self.eval_pow(x, *r)?
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.domain(DomainKind::NonFinite))
        }
    }

    fn eval_pow(&self, base: f64, exponent: Rational) -> Result<f64, EvalError> {
        if exponent.is_integer() {
            let n = *exponent.numer();
            if base == 0.0 && n < 0 {
                return Err(self.domain(DomainKind::Power));
            }
            return Ok(match i32::try_from(n) {
                Ok(n) => base.powi(n),
                Err(_) => base.powf(n as f64),
            });
        }
        if base < 0.0 {
            return Err(self.domain(DomainKind::Power));
        }
        if base == 0.0 {
            return if exponent.is_positive() {
                Ok(0.0)
            } else {
                Err(self.domain(DomainKind::Power))
            };
        }
        if exponent == Rational::new(1, 2) {
            Ok(base.sqrt())
        } else {
            Ok(base.powf(rational_to_f64(exponent)))
        }
    }

    fn domain(&self, kind: DomainKind) -> EvalError {
        EvalError::Domain {
            kind,
            subexpr: self.to_string(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Const(c) if c.is_negative() => 3,
            Expr::Pow(_, _) => 4,
            _ => 5,
        }
    }

    /// Atomic enough to be the base of `^` without parentheses.
    fn is_pow_base_atom(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Pi => true,
            Expr::Unary(op, _) => *op != UnaryOp::Neg,
            Expr::Const(c) => c.is_integer() && !c.is_negative(),
            _ => false,
        }
    }
}

pub(crate) fn rational_to_f64(r: Rational) -> f64 {
    if r.is_integer() {
        *r.numer() as f64
    } else {
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_rational(c, f),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(i) => write!(f, "a{}", i + 1),
            Expr::Unary(UnaryOp::Neg, a) => match a.as_ref() {
                Expr::Const(_) => write!(f, "-({a})"),
                inner if inner.precedence() >= 4 => write!(f, "-{a}"),
                _ => write!(f, "-({a})"),
            },
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                if a.precedence() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.precedence() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Expr::Pow(a, r) => {
                if a.is_pow_base_atom() {
                    write!(f, "{a}")?;
                } else {
                    write!(f, "({a})")?;
                }
                if r.is_integer() && !r.is_negative() {
                    write!(f, "^{}", r.numer())
                } else {
                    f.write_str("^(")?;
                    fmt_rational(r, f)?;
                    f.write_str(")")
                }
            }
        }
    }
}
