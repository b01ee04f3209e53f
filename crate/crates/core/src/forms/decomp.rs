use nalgebra::DMatrix;

use crate::chains::{MapError, SingularSimplex};
use crate::expr::Expr;

use super::{minor_det, multi_indices, Form, FormError};

/// Splitting of `τ*(η)` for `τ(t, b) = f(t)·σ(b)` and
/// `η = h dx_1 ∧ … ∧ dx_d` into
///
/// * `A = h(τ) f^d det(∂σ_{1..d}/∂b) db_1 ∧ … ∧ db_d`, and
/// * `B = f′ f^{d−1} h(τ) dt ∧ Σ_i (−1)^{i−1} σ_i dσ_1 ∧ … ∧ \widehat{dσ_i} ∧ … ∧ dσ_d`.
///
/// `B` is `dt ∧ f′ f^{d−1}` times the pullback along `σ` (not `τ`) of `C`
/// with its coefficient `h` evaluated at `τ`; pulling `C` back along `τ`
/// would add a spurious factor `f^d`.
///
/// Components are reported on `[0,1] × Δ_d` with coordinate 0 for `t` and
/// `1..=d` for `b`.
#[derive(Clone, Debug)]
pub struct DecompAB {
    sigma: SingularSimplex,
    profile: Expr,
    profile_derivative: Expr,
    h: Expr,
    d: usize,
}

/// Prepares the `A + B` splitting of `τ*(η)`. `η` must be a single term
/// `h dx_1 ∧ … ∧ dx_d` on the first `d` ambient coordinates, `d = dim σ`.
pub fn decompose_ab(sigma: &SingularSimplex, profile: &Expr, eta: &Form) -> Result<DecompAB, FormError> {
    let d = sigma.dim();
    if eta.degree() != d {
        return Err(FormError::Mismatch {
            form: eta.degree(),
            simplex: d,
        });
    }
    if eta.ambient() != sigma.ambient() || sigma.ambient() < d {
        return Err(FormError::Ambient {
            form: eta.ambient(),
            simplex: sigma.ambient(),
        });
    }
    let leading: Vec<usize> = (0..d).collect();
    let mut terms = eta.terms();
    let h = match (terms.next(), terms.next()) {
        (None, _) => Expr::zero(),
        (Some((idx, h)), None) if idx == leading.as_slice() => h.clone(),
        _ => {
            return Err(FormError::Degree {
                degree: d,
                found: eta.terms().count(),
            })
        }
    };
    if profile.min_arity() > 1 {
        return Err(FormError::Coefficient(profile.to_string()));
    }
    Ok(DecompAB {
        sigma: sigma.clone(),
        profile: profile.clone(),
        profile_derivative: profile.diff(0),
        h,
        d,
    })
}

struct Sample {
    f: f64,
    df: f64,
    value: Vec<f64>,
    jac: DMatrix<f64>,
    h_tau: f64,
}

impl DecompAB {
    pub fn dim(&self) -> usize {
        self.d
    }

    fn sample(&self, t: f64, b: &[f64]) -> Result<Sample, MapError> {
        let f = self.profile.eval(&[t])?;
        let df = self.profile_derivative.eval(&[t])?;
        let value = self.sigma.eval(b)?;
        let jac = self.sigma.jacobian(b)?;
        let tau: Vec<f64> = value.iter().map(|x| f * x).collect();
        let h_tau = self.h.eval(&tau)?;
        Ok(Sample {
            f,
            df,
            value,
            jac,
            h_tau,
        })
    }

    /// Coefficient of `A` on `db_1 ∧ … ∧ db_d`.
    pub fn a(&self, t: f64, b: &[f64]) -> Result<f64, MapError> {
        let s = self.sample(t, b)?;
        let rows: Vec<usize> = (0..self.d).collect();
        Ok(s.h_tau * s.f.powi(self.d as i32) * minor_det(&s.jac, &rows, None))
    }

    /// Coefficients of `B` on `dt ∧ db_K`, one per `K = {1..d} \ {k}`,
    /// ordered by the omitted index `k`.
    pub fn b(&self, t: f64, b: &[f64]) -> Result<Vec<f64>, MapError> {
        let s = self.sample(t, b)?;
        let d = self.d;
        let scale = s.df * s.f.powi(d as i32 - 1) * s.h_tau;
        Ok((0..d)
            .map(|k| {
                let cols: Vec<usize> = (0..d).filter(|&c| c != k).collect();
                let sum: f64 = (0..d)
                    .map(|i| {
                        let rows: Vec<usize> = (0..d).filter(|&r| r != i).collect();
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        sign * s.value[i] * minor_det(&s.jac, &rows, Some(&cols))
                    })
                    .sum();
                scale * sum
            })
            .collect())
    }

    /// `A` as `(multi-index, coefficient)` pairs on `[0,1] × Δ_d`.
    pub fn a_components(&self, t: f64, b: &[f64]) -> Result<Vec<(Vec<usize>, f64)>, MapError> {
        Ok(vec![((1..=self.d).collect(), self.a(t, b)?)])
    }

    /// `B` as `(multi-index, coefficient)` pairs on `[0,1] × Δ_d`.
    pub fn b_components(&self, t: f64, b: &[f64]) -> Result<Vec<(Vec<usize>, f64)>, MapError> {
        let d = self.d;
        Ok(self
            .b(t, b)?
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                let mut idx = vec![0];
                idx.extend((1..=d).filter(|&c| c != k + 1));
                (idx, v)
            })
            .collect())
    }

    /// `τ*(η)` computed directly from the Jacobian of `τ`, as pairs over
    /// all `d`-subsets of the `d + 1` prism coordinates.
    pub fn direct(&self, t: f64, b: &[f64]) -> Result<Vec<(Vec<usize>, f64)>, MapError> {
        let s = self.sample(t, b)?;
        let n = self.sigma.ambient();
        let d = self.d;
        let jt = DMatrix::from_fn(n, d + 1, |r, c| if c == 0 { s.df * s.value[r] } else { s.f * s.jac[(r, c - 1)] });
        let rows: Vec<usize> = (0..d).collect();
        Ok(multi_indices(d + 1, d)
            .into_iter()
            .map(|cols| {
                let v = s.h_tau * minor_det(&jt, &rows, Some(&cols));
                (cols, v)
            })
            .collect())
    }

    /// `C = h Σ_i (−1)^{i−1} x_i dx_1 ∧ … ∧ \widehat{dx_i} ∧ … ∧ dx_d`.
    pub fn c_form(&self) -> Form {
        let d = self.d;
        let n = self.sigma.ambient();
        let mut c = Form::zero(d.saturating_sub(1), n);
        if d == 0 {
            return c;
        }
        for i in 0..d {
            let idx: Vec<usize> = (0..d).filter(|&j| j != i).collect();
            let coeff = Expr::mul(self.h.clone(), Expr::Var(i));
            let coeff = if i % 2 == 0 { coeff } else { Expr::neg(coeff) };
            c.add_term(idx, coeff).expect("indices within ambient dimension");
        }
        c
    }
}

/// Pullback of a form given by `(multi-index, coefficient)` pairs at one
/// point along a map with Jacobian `jac` (rows: form coordinates, columns:
/// parameters). The form degree must equal the number of columns.
pub fn restrict_components(components: &[(Vec<usize>, f64)], jac: &DMatrix<f64>) -> f64 {
    components
        .iter()
        .map(|(idx, c)| c * minor_det(jac, idx, None))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn constant_profile_has_no_b() {
        let s = SingularSimplex::parse(2, &["a1 + a2^2", "a1*a2", "a2"]).unwrap();
        let eta = Form::from_terms(2, 3, vec![(vec![0, 1], parse("a3 + 1", 3).unwrap())]).unwrap();
        let dec = decompose_ab(&s, &Expr::one(), &eta).unwrap();
        assert!(dec.b(0.3, &[0.2, 0.1]).unwrap().iter().all(|v| *v == 0.0));
        let a0 = dec.a(0.1, &[0.2, 0.1]).unwrap();
        let a1 = dec.a(0.9, &[0.2, 0.1]).unwrap();
        assert_eq!(a0, a1);
        assert!((a0 - eta.pullback_density(&s, &[0.2, 0.1]).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn interval_example() {
        let s = SingularSimplex::identity(1);
        let eta = Form::standard(1, vec![0]).unwrap();
        let f = parse("1 - t", 1).unwrap();
        let dec = decompose_ab(&s, &f, &eta).unwrap();
        let (t, b) = (0.3, 0.6);
        assert!((dec.a(t, &[b]).unwrap() - 0.7).abs() < 1e-15);
        assert!((dec.b(t, &[b]).unwrap()[0] + 0.6).abs() < 1e-15);
    }

    #[test]
    fn c_form_of_plane() {
        let s = SingularSimplex::identity(2);
        let eta = Form::standard(2, vec![0, 1]).unwrap();
        let dec = decompose_ab(&s, &Expr::one(), &eta).unwrap();
        // C = x dy - y dx, whose derivative is 2 dx∧dy.
        let dc = dec.c_form().exterior_derivative();
        assert_eq!(dc.coefficient(&[0, 1]), Some(&Expr::constant(2)));
    }

    #[test]
    fn rejects_other_terms() {
        let s = SingularSimplex::identity(2);
        let eta = Form::standard(2, vec![0]).unwrap();
        assert!(decompose_ab(&s, &Expr::one(), &eta).is_err());
    }
}
