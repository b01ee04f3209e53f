use std::sync::Arc;

use periodlab_core::expr::{parse, BinaryOp, Expr, Rational, UnaryOp};
use proptest::prelude::*;

const ARITY: usize = 3;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0..ARITY).prop_map(Expr::Var),
        (-50i64..50, 1i64..12).prop_map(|(n, d)| Expr::rational(n, d)),
        Just(Expr::Pi),
    ]
}

fn unary_op() -> impl Strategy<Value = UnaryOp> {
    prop_oneof![
        Just(UnaryOp::Neg),
        Just(UnaryOp::Sqrt),
        Just(UnaryOp::Sin),
        Just(UnaryOp::Cos),
        Just(UnaryOp::Exp),
        Just(UnaryOp::Log),
        Just(UnaryOp::Atan),
    ]
}

fn binary_op() -> impl Strategy<Value = BinaryOp> {
    prop_oneof![
        Just(BinaryOp::Add),
        Just(BinaryOp::Sub),
        Just(BinaryOp::Mul),
        Just(BinaryOp::Div),
    ]
}

/// Arbitrary trees of depth at most 6, including negative and fractional
/// constants and exponents, for printer round-trips.
fn any_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            (unary_op(), inner.clone()).prop_map(|(op, a)| Expr::Unary(op, Arc::new(a))),
            (binary_op(), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expr::Binary(op, Arc::new(a), Arc::new(b))),
            (inner, -7i64..8, 1i64..5)
                .prop_map(|(a, n, d)| Expr::Pow(Arc::new(a), Rational::new(n, d))),
        ]
    })
}

fn one_plus_square(a: Expr) -> Expr {
    Expr::Binary(
        BinaryOp::Add,
        Arc::new(Expr::one()),
        Arc::new(Expr::Pow(Arc::new(a), Rational::from_integer(2))),
    )
}

/// Trees of depth at most 6 whose singular operations only see arguments
/// bounded away from their singularities, so they are smooth everywhere.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..ARITY).prop_map(Expr::Var),
        (-3i64..4, 1i64..4).prop_map(|(n, d)| Expr::rational(n, d)),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Unary(UnaryOp::Neg, Arc::new(a))),
            inner.clone().prop_map(|a| Expr::Unary(UnaryOp::Sin, Arc::new(a))),
            inner.clone().prop_map(|a| Expr::Unary(UnaryOp::Cos, Arc::new(a))),
            inner.clone().prop_map(|a| Expr::Unary(UnaryOp::Atan, Arc::new(a))),
            inner.clone().prop_map(|a| {
                let bounded = Expr::Unary(UnaryOp::Sin, Arc::new(a));
                Expr::Unary(UnaryOp::Exp, Arc::new(bounded))
            }),
            inner.clone().prop_map(|a| Expr::Unary(UnaryOp::Sqrt, Arc::new(one_plus_square(a)))),
            inner.clone().prop_map(|a| Expr::Unary(UnaryOp::Log, Arc::new(one_plus_square(a)))),
            (inner.clone(), prop_oneof![Just((1, 2)), Just((3, 2)), Just((-1, 1)), Just((-1, 3))])
                .prop_map(|(a, (n, d))| Expr::Pow(Arc::new(one_plus_square(a)), Rational::new(n, d))),
            (inner.clone(), 2i64..4).prop_map(|(a, n)| Expr::Pow(Arc::new(a), Rational::from_integer(n))),
            (prop_oneof![Just(BinaryOp::Add), Just(BinaryOp::Sub), Just(BinaryOp::Mul)], inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expr::Binary(op, Arc::new(a), Arc::new(b))),
            (inner.clone(), inner)
                .prop_map(|(a, b)| Expr::Binary(BinaryOp::Div, Arc::new(a), Arc::new(one_plus_square(b)))),
        ]
    })
}

/// Interior point of the standard 3-simplex.
fn interior_point() -> impl Strategy<Value = Vec<f64>> {
    prop::array::uniform4(0.05f64..1.0).prop_map(|w| {
        let total: f64 = w.iter().sum();
        w[1..].iter().map(|x| x / total).collect()
    })
}

fn central_difference(e: &Expr, var: usize, x: &[f64], h: f64) -> Option<f64> {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[var] += h;
    minus[var] -= h;
    Some((e.eval(&plus).ok()? - e.eval(&minus).ok()?) / (2.0 * h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_identity(e in any_expr()) {
        let text = e.to_string();
        let back = parse(&text, ARITY).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, e, "printed as {}", text);
    }

    #[test]
    fn derivative_matches_central_difference(e in smooth_expr(), var in 0..ARITY, x in interior_point()) {
        let value = e.eval(&x);
        prop_assume!(matches!(value, Ok(v) if v.abs() < 1e4));
        let derivative = e.diff(var).eval(&x).unwrap();
        prop_assume!(derivative.abs() < 1e4);
        let fd = central_difference(&e, var, &x, 1e-6).unwrap();
        prop_assert!(
            (derivative - fd).abs() <= 1e-5 * (1.0 + derivative.abs()),
            "{} d/da{}: symbolic {} vs difference {}", e, var + 1, derivative, fd
        );
    }

    #[test]
    fn evaluation_is_bit_reproducible(e in any_expr(), x in interior_point()) {
        let first = e.eval(&x).map(f64::to_bits);
        let second = e.clone().eval(&x).map(f64::to_bits);
        prop_assert_eq!(first, second);
    }
}
