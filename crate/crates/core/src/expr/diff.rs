//! Folding constructors, symbolic differentiation and substitution.

use std::sync::Arc;

use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

use super::{BinaryOp, Expr, Rational, UnaryOp};

impl Expr {
    /// `a + b`, folding constants and additive identities.
    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(z) = x.checked_add(&y) {
                return Expr::Const(z);
            }
        }
        if let Expr::Unary(UnaryOp::Neg, inner) = &b {
            return Expr::Binary(BinaryOp::Sub, Arc::new(a), inner.clone());
        }
        Expr::Binary(BinaryOp::Add, Arc::new(a), Arc::new(b))
    }

    /// `a - b`, folding constants and additive identities.
    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if a == b {
            return Expr::zero();
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(z) = x.checked_sub(&y) {
                return Expr::Const(z);
            }
        }
        Expr::Binary(BinaryOp::Sub, Arc::new(a), Arc::new(b))
    }

    /// `a * b`, folding constants, zeros and ones.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(z) = x.checked_mul(&y) {
                return Expr::Const(z);
            }
        }
        if a.as_const() == Some(-Rational::one()) {
            return Expr::neg(b);
        }
        if b.as_const() == Some(-Rational::one()) {
            return Expr::neg(a);
        }
        // Keep constants on the left so products print as `3 * x`.
        if b.as_const().is_some() && a.as_const().is_none() {
            return Expr::Binary(BinaryOp::Mul, Arc::new(b), Arc::new(a));
        }
        Expr::Binary(BinaryOp::Mul, Arc::new(a), Arc::new(b))
    }

    /// `a / b`, folding constants and a unit denominator. A constant zero
    /// denominator is kept so that evaluation reports the domain error.
    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            return a;
        }
        if a.is_zero() && !b.is_zero() {
            return Expr::zero();
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(z) = x.checked_div(&y) {
                return Expr::Const(z);
            }
        }
        Expr::Binary(BinaryOp::Div, Arc::new(a), Arc::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) if *c.numer() != i64::MIN => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, inner) => Arc::unwrap_or_clone(inner),
            other => Expr::Unary(UnaryOp::Neg, Arc::new(other)),
        }
    }

    /// `a^r`, folding trivial exponents and nested powers.
    pub fn pow(a: Expr, r: Rational) -> Expr {
        if r.is_zero() {
            return Expr::one();
        }
        if r.is_one() {
            return a;
        }
        if a.is_one() {
            return Expr::one();
        }
        if a.is_zero() && r.is_positive() {
            return Expr::zero();
        }
        if let Some(c) = a.as_const() {
            if r.is_integer() {
                if let Ok(n) = i32::try_from(*r.numer()) {
                    if n.unsigned_abs() <= 64 && !(c.is_zero() && n < 0) {
                        if let Some(value) = checked_powi(c, n) {
                            return Expr::Const(value);
                        }
                    }
                }
            }
        }
        // (x^p)^q = x^(pq) holds on the nonnegative domain when p is not an
        // even integer that could hide a sign; restrict to that case.
        if let Expr::Pow(base, p) = &a {
            let parity_safe = !(p.is_integer() && p.numer() % 2 == 0) || r.is_integer();
            if parity_safe {
                if let Some(pq) = p.checked_mul(&r) {
                    return Expr::pow(base.as_ref().clone(), pq);
                }
            }
        }
        Expr::Pow(Arc::new(a), r)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if op == UnaryOp::Neg {
            return Expr::neg(a);
        }
        if let Some(c) = a.as_const() {
            if c.is_zero() {
                match op {
                    UnaryOp::Sqrt | UnaryOp::Sin | UnaryOp::Atan => return Expr::zero(),
                    UnaryOp::Cos | UnaryOp::Exp => return Expr::one(),
                    _ => {}
                }
            }
            if c.is_one() {
                match op {
                    UnaryOp::Sqrt => return Expr::one(),
                    UnaryOp::Log => return Expr::zero(),
                    _ => {}
                }
            }
        }
        Expr::Unary(op, Arc::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => Expr::add(a, b),
            BinaryOp::Sub => Expr::sub(a, b),
            BinaryOp::Mul => Expr::mul(a, b),
            BinaryOp::Div => Expr::div(a, b),
        }
    }

    /// Sum of terms, folding as it goes.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), Expr::add)
    }

    /// Product of factors, folding as it goes.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        factors.into_iter().fold(Expr::one(), Expr::mul)
    }

    /// Partial derivative with respect to `Var(var)`.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi => Expr::zero(),
            Expr::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Unary(op, a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let a = a.as_ref().clone();
                let outer = match op {
                    UnaryOp::Neg => return Expr::neg(da),
                    // d sqrt(u) = u' / (2 sqrt(u))
                    UnaryOp::Sqrt => {
                        return Expr::div(da, Expr::mul(Expr::constant(2), Expr::unary(UnaryOp::Sqrt, a)))
                    }
                    UnaryOp::Sin => Expr::unary(UnaryOp::Cos, a),
                    UnaryOp::Cos => Expr::neg(Expr::unary(UnaryOp::Sin, a)),
                    UnaryOp::Exp => Expr::unary(UnaryOp::Exp, a),
                    UnaryOp::Log => return Expr::div(da, a),
                    UnaryOp::Atan => {
                        return Expr::div(da, Expr::add(Expr::one(), Expr::pow(a, Rational::from_integer(2))))
                    }
                };
                Expr::mul(outer, da)
            }
            Expr::Binary(op, a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinaryOp::Div => {
                        if db.is_zero() {
                            return Expr::div(da, b);
                        }
                        let numer = Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db));
                        Expr::div(numer, Expr::pow(b, Rational::from_integer(2)))
                    }
                }
            }
            Expr::Pow(a, r) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let lowered = r - Rational::one();
                let outer = Expr::mul(Expr::Const(*r), Expr::pow(a.as_ref().clone(), lowered));
                Expr::mul(outer, da)
            }
        }
    }

    /// Replaces every `Var(i)` by `values[i]`, folding constants on the way
    /// back up. Variables without a replacement are left in place.
    pub fn substitute(&self, values: &[Expr]) -> Expr {
        match self {
            Expr::Const(_) | Expr::Pi => self.clone(),
            Expr::Var(i) => values.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute(values)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(values), b.substitute(values)),
            Expr::Pow(a, r) => Expr::pow(a.substitute(values), *r),
        }
    }

    /// Renames variables: `Var(i)` becomes `Var(map[i])`.
    pub fn reindex(&self, map: &[usize]) -> Expr {
        let values: Vec<Expr> = map.iter().map(|&j| Expr::Var(j)).collect();
        self.substitute(&values)
    }
}

fn checked_powi(base: Rational, n: i32) -> Option<Rational> {
    let mut acc = Rational::one();
    let b = if n < 0 { base.recip() } else { base };
    for _ in 0..n.unsigned_abs() {
        acc = acc.checked_mul(&b)?;
    }
    Some(acc)
}
