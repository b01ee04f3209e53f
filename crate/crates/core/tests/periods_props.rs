use std::f64::consts::{PI, TAU};

use periodlab_core::chains::{Chain, SingularSimplex};
use periodlab_core::expr::parse;
use periodlab_core::forms::Form;
use periodlab_core::periods::{compare_representatives, period_matrix, GeometricCycle, NamedForm};
use periodlab_core::quad::QuadConfig;

fn one_form(ambient: usize, terms: &[(usize, &str)]) -> Form {
    Form::from_terms(
        1,
        ambient,
        terms.iter().map(|(i, h)| (vec![*i], parse(h, ambient).unwrap())).collect(),
    )
    .unwrap()
}

/// `(x dy − y dx)/(x² + y²)` on the coordinates `i, j` of `R^n`.
fn angular(n: usize, i: usize, j: usize, name: &str) -> NamedForm {
    let (x, y) = (format!("a{}", i + 1), format!("a{}", j + 1));
    let r2 = format!("({x}^2 + {y}^2)");
    NamedForm::new(name, one_form(n, &[(i, &format!("-{y}/{r2}")), (j, &format!("{x}/{r2}"))]))
}

fn cycle(name: &str, pieces: &[[&str; 2]]) -> GeometricCycle {
    let terms = pieces.iter().map(|c| (SingularSimplex::parse(1, c).unwrap(), 1));
    GeometricCycle::new(name, Chain::from_terms(1, terms).unwrap()).unwrap()
}

fn trig_circle() -> GeometricCycle {
    cycle(
        "trig",
        &[["cos(pi*a1)", "sin(pi*a1)"], ["cos(pi*(1 + a1))", "sin(pi*(1 + a1))"]],
    )
}

fn root_circle() -> GeometricCycle {
    cycle(
        "root",
        &[["1 - 2*a1", "2*sqrt(a1 - a1^2)"], ["-1 + 2*a1", "-2*sqrt(a1 - a1^2)"]],
    )
}

fn exact_forms() -> Vec<NamedForm> {
    [("x^2*y + sin(x)", "a1^2*a2 + sin(a1)"), ("exp(x*y)", "exp(a1*a2)")]
        .iter()
        .map(|(name, f)| {
            let f = parse(f, 2).unwrap();
            let df = Form::function(2, f).unwrap().exterior_derivative();
            NamedForm::new(format!("d({name})"), df)
        })
        .collect()
}

#[test]
fn circle_period_is_two_pi() {
    let m = period_matrix(&[trig_circle(), root_circle()], &[angular(2, 0, 1, "dtheta")], &QuadConfig::default(), 1).unwrap();
    for row in m.values() {
        assert!((row[0] - TAU).abs() <= 1e-6, "{row:?}");
    }
}

#[test]
fn flat_torus_period_matrix() {
    let n = 4;
    let s = SingularSimplex::parse(1, &["cos(2*pi*a1)", "sin(2*pi*a1)", "1", "0"]).unwrap();
    let t = SingularSimplex::parse(1, &["1", "0", "cos(2*pi*a1)", "sin(2*pi*a1)"]).unwrap();
    let cycles = [
        GeometricCycle::new("s", Chain::from_simplex(s)).unwrap(),
        GeometricCycle::new("t", Chain::from_simplex(t)).unwrap(),
    ];
    let forms = [angular(n, 0, 1, "dtheta1"), angular(n, 2, 3, "dtheta2")];
    let m = period_matrix(&cycles, &forms, &QuadConfig::default(), 3).unwrap();
    let v = m.values();
    assert!((v[0][0] - TAU).abs() <= 1e-6 && (v[1][1] - TAU).abs() <= 1e-6, "{v:?}");
    assert!(v[0][1].abs() <= 1e-6 && v[1][0].abs() <= 1e-6, "{v:?}");
}

#[test]
fn exact_forms_have_zero_periods() {
    let m = period_matrix(&[trig_circle(), root_circle()], &exact_forms(), &QuadConfig::default(), 5).unwrap();
    for row in m.values() {
        for v in row {
            assert!(v.abs() <= 1e-6, "{v}");
        }
    }
}

#[test]
fn smooth_and_root_representatives_agree() {
    let r = compare_representatives(&trig_circle(), &root_circle(), &[angular(2, 0, 1, "dtheta")], &QuadConfig::default(), 2e-6, 1).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn periods_survive_subdivision() {
    for c in [trig_circle(), root_circle()] {
        let sd = GeometricCycle::new("sd", c.chain.barycentric_subdivide().barycentric_subdivide()).unwrap();
        let r = compare_representatives(&c, &sd, &[angular(2, 0, 1, "dtheta")], &QuadConfig::default(), 2e-6, 1).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn reparametrized_arcs_have_the_same_period() {
    let slow = cycle(
        "slow",
        &[["cos(pi*a1^2)", "sin(pi*a1^2)"], ["cos(pi*(1 + a1^(3/2)))", "sin(pi*(1 + a1^(3/2)))"]],
    );
    let r = compare_representatives(&trig_circle(), &slow, &[angular(2, 0, 1, "dtheta")], &QuadConfig::default(), 2e-6, 1).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn pairing_is_bilinear() {
    let w = angular(2, 0, 1, "dtheta");
    let ex = &exact_forms()[0];
    let combo = NamedForm::new("combo", w.form.scaled(parse("3", 2).unwrap()).plus(&ex.form).unwrap());
    let doubled = GeometricCycle::new("twice", trig_circle().chain * 2).unwrap();
    let m = period_matrix(&[doubled], &[combo], &QuadConfig::default(), 1).unwrap();
    assert!((m.values()[0][0] - 6.0 * TAU).abs() <= 1e-5);
}

#[test]
fn sphere_around_the_origin_has_solid_angle_four_pi() {
    let v = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let tet = SingularSimplex::affine(v.iter().map(|p| p.to_vec()).collect()).unwrap();
    let sphere = GeometricCycle::new("tetra", Chain::from_simplex(tet).boundary().unwrap()).unwrap();
    let r3 = "(a1^2 + a2^2 + a3^2)^(3/2)";
    let omega = Form::from_terms(
        2,
        3,
        vec![
            (vec![1, 2], parse(&format!("a1/{r3}"), 3).unwrap()),
            (vec![0, 2], parse(&format!("-a2/{r3}"), 3).unwrap()),
            (vec![0, 1], parse(&format!("a3/{r3}"), 3).unwrap()),
        ],
    )
    .unwrap();
    let m = period_matrix(&[sphere], &[NamedForm::new("solid", omega)], &QuadConfig::default(), 2).unwrap();
    assert!((m.values()[0][0].abs() - 4.0 * PI).abs() <= 1e-6, "{:?}", m.values());
}
