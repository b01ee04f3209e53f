//! Benchmark inputs shared by the criterion targets.

use periodlab_core::{parse, Form, SingularSimplex};

/// The quarter circle `(cos(πt/2), sin(πt/2))` and the angle form.
pub fn circle_arc() -> (SingularSimplex, Form) {
    let sigma = SingularSimplex::parse(1, &["cos(pi*a1/2)", "sin(pi*a1/2)"]).unwrap();
    let dtheta = Form::from_terms(
        1,
        2,
        vec![
            (vec![0], parse("-a2/(a1^2 + a2^2)", 2).unwrap()),
            (vec![1], parse("a1/(a1^2 + a2^2)", 2).unwrap()),
        ],
    )
    .unwrap();
    (sigma, dtheta)
}

/// A 2-simplex with a square-root edge and a smooth area form.
pub fn root_triangle() -> (SingularSimplex, Form) {
    let sigma = SingularSimplex::parse(2, &["a1 + a2^2", "sqrt(a2) + a1*a2"]).unwrap();
    let area = Form::from_terms(2, 2, vec![(vec![0, 1], parse("1 + a1*a2^2", 2).unwrap())]).unwrap();
    (sigma, area)
}
