//! Best-effort canonical form used to recognise expressions that are
//! identically zero.
//!
//! Expressions are expanded into sums of monomials over atoms (variables,
//! `pi`, function applications on normalised arguments, and non-monomial
//! bases raised to negative or fractional powers), with exact rational
//! coefficients and exponents. Two expressions with the same normal form are
//! equal as functions on their common domain. The converse does not hold, so
//! a `false` answer only means "not shown to be zero".

use std::collections::BTreeMap;

use num_traits::{CheckedAdd, CheckedMul, One, Signed, Zero};

use super::{BinaryOp, Expr, Rational, UnaryOp};

const MAX_TERMS: usize = 4096;
const MAX_EXPANDED_POWER: i64 = 6;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Var(usize),
    Pi,
    Func(UnaryOp, Poly),
    Base(Poly),
}

type Mono = Vec<(Atom, Rational)>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Poly(BTreeMap<Mono, Rational>);

/// Returns true when `e` is shown to vanish identically.
pub fn is_identically_zero(e: &Expr) -> bool {
    Poly::from_expr(e).is_some_and(|p| p.0.is_empty())
}

impl Poly {
    fn constant(c: Rational) -> Poly {
        let mut map = BTreeMap::new();
        if !c.is_zero() {
            map.insert(Vec::new(), c);
        }
        Poly(map)
    }

    fn atom(a: Atom) -> Poly {
        let mut map = BTreeMap::new();
        map.insert(vec![(a, Rational::one())], Rational::one());
        Poly(map)
    }

    fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => self.0.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    fn from_expr(e: &Expr) -> Option<Poly> {
        match e {
            Expr::Const(c) => Some(Poly::constant(*c)),
            Expr::Pi => Some(Poly::atom(Atom::Pi)),
            Expr::Var(i) => Some(Poly::atom(Atom::Var(*i))),
            Expr::Unary(op, a) => {
                let arg = Poly::from_expr(a)?;
                Poly::apply(*op, arg)
            }
            Expr::Binary(op, a, b) => {
                let x = Poly::from_expr(a)?;
                let y = Poly::from_expr(b)?;
                match op {
                    BinaryOp::Add => x.add(&y),
                    BinaryOp::Sub => x.add(&y.scale(-Rational::one())?),
                    BinaryOp::Mul => x.mul(&y),
                    BinaryOp::Div => {
                        if y.0.is_empty() {
                            return None;
                        }
                        x.mul(&y.pow(-Rational::one())?)
                    }
                }
            }
            Expr::Pow(a, r) => Poly::from_expr(a)?.pow(*r),
        }
    }

    fn apply(op: UnaryOp, arg: Poly) -> Option<Poly> {
        if let Some(c) = arg.as_constant() {
            if c.is_zero() {
                match op {
                    UnaryOp::Neg | UnaryOp::Sin | UnaryOp::Atan | UnaryOp::Sqrt => {
                        return Some(Poly::default())
                    }
                    UnaryOp::Cos | UnaryOp::Exp => return Some(Poly::constant(Rational::one())),
                    UnaryOp::Log => return None,
                }
            }
        }
        match op {
            UnaryOp::Neg => arg.scale(-Rational::one()),
            UnaryOp::Sqrt => arg.pow(Rational::new(1, 2)),
            other => Some(Poly::atom(Atom::Func(other, arg))),
        }
    }

    fn scale(&self, c: Rational) -> Option<Poly> {
        if c.is_zero() {
            return Some(Poly::default());
        }
        let mut out = BTreeMap::new();
        for (m, k) in &self.0 {
            out.insert(m.clone(), k.checked_mul(&c)?);
        }
        Some(Poly(out))
    }

    fn add(&self, other: &Poly) -> Option<Poly> {
        let mut out = self.0.clone();
        for (m, k) in &other.0 {
            let entry = out.entry(m.clone()).or_insert_with(Rational::zero);
            *entry = entry.checked_add(k)?;
            if entry.is_zero() {
                out.remove(m);
            }
        }
        (out.len() <= MAX_TERMS).then_some(Poly(out))
    }

    fn mul(&self, other: &Poly) -> Option<Poly> {
        if self.0.len().saturating_mul(other.0.len()) > MAX_TERMS * 4 {
            return None;
        }
        let mut out: BTreeMap<Mono, Rational> = BTreeMap::new();
        for (m1, k1) in &self.0 {
            for (m2, k2) in &other.0 {
                let m = mono_mul(m1, m2)?;
                let k = k1.checked_mul(k2)?;
                let entry = out.entry(m.clone()).or_insert_with(Rational::zero);
                *entry = entry.checked_add(&k)?;
                if entry.is_zero() {
                    out.remove(&m);
                }
            }
        }
        (out.len() <= MAX_TERMS).then_some(Poly(out))
    }

    fn pow(&self, r: Rational) -> Option<Poly> {
        if r.is_zero() {
            return Some(Poly::constant(Rational::one()));
        }
        if r.is_one() {
            return Some(self.clone());
        }
        if self.0.is_empty() {
            return r.is_positive().then(Poly::default);
        }
        if self.0.len() == 1 {
            let (m, c) = self.0.iter().next()?;
            if r.is_integer() {
                let n = i32::try_from(*r.numer()).ok()?;
                let coef = rational_powi(*c, n)?;
                let mono = m
                    .iter()
                    .map(|(a, e)| Some((a.clone(), e.checked_mul(&r)?)))
                    .collect::<Option<Mono>>()?;
                let mut map = BTreeMap::new();
                map.insert(mono, coef);
                return Some(Poly(map));
            }
            // A lone atom with an exponent that cannot hide a sign.
            if c.is_one() && m.len() == 1 {
                let (a, e) = &m[0];
                if !(e.is_integer() && e.numer() % 2 == 0) {
                    let mut map = BTreeMap::new();
                    map.insert(vec![(a.clone(), e.checked_mul(&r)?)], Rational::one());
                    return Some(Poly(map));
                }
            }
        } else if r.is_integer() && *r.numer() > 0 && *r.numer() <= MAX_EXPANDED_POWER {
            let mut acc = self.clone();
            for _ in 1..*r.numer() {
                acc = acc.mul(self)?;
            }
            return Some(acc);
        }
        let mut map = BTreeMap::new();
        map.insert(vec![(Atom::Base(self.clone()), r)], Rational::one());
        Some(Poly(map))
    }
}

fn mono_mul(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut out: Mono = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, _) => std::cmp::Ordering::Greater,
        };
        match take {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let e = a[i].1.checked_add(&b[j].1)?;
                if !e.is_zero() {
                    out.push((a[i].0.clone(), e));
                }
                i += 1;
                j += 1;
            }
        }
    }
    Some(out)
}

fn rational_powi(c: Rational, n: i32) -> Option<Rational> {
    if c.is_zero() && n < 0 {
        return None;
    }
    let base = if n < 0 { c.recip() } else { c };
    let mut acc = Rational::one();
    for _ in 0..n.unsigned_abs() {
        acc = acc.checked_mul(&base)?;
    }
    Some(acc)
}
