use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::expr::{Expr, Rational};

use super::embedding::Embedding;
use super::{Chain, ChainError, MapError, SingularSimplex};

/// The map `q(t, b) = ((1−t)(1−Σb), (1−t)b_1, …, (1−t)b_d)` from
/// `[0,1] × Δ_d` onto `Δ_{d+1}`. It satisfies `σ̄ = ĥσ ∘ q`.
pub fn prism_q(t: f64, b: &[f64]) -> Vec<f64> {
    let s = 1.0 - t;
    let total: f64 = b.iter().sum();
    let mut out = Vec::with_capacity(b.len() + 1);
    out.push(s * (1.0 - total));
    out.extend(b.iter().map(|x| s * x));
    out
}

/// Inverse of [`prism_q`] away from the collapsed slice `t = 1`:
/// `i(a) = (1 − A, a_1/A, …, a_d/A)` with `A = Σ a_i`.
pub fn prism_q_inverse(a: &[f64]) -> Option<(f64, Vec<f64>)> {
    let total: f64 = a.iter().sum();
    if total <= 0.0 {
        return None;
    }
    Some((1.0 - total, a[1..].iter().map(|x| x / total).collect()))
}

/// The map `(t, b) ↦ f(t)·σ(b)` on `[0,1] × Δ_d`. With `f = 1 − t` this is
/// the prism `σ̄` of the cone construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Prism {
    base: SingularSimplex,
    profile: Expr,
    profile_derivative: Expr,
}

impl Prism {
    /// `profile` is an expression in one variable, the prism coordinate `t`.
    pub fn new(base: SingularSimplex, profile: Expr) -> Result<Prism, ChainError> {
        if profile.min_arity() > 1 {
            return Err(ChainError::Shape(format!("profile `{profile}` must depend on t only")));
        }
        let profile_derivative = profile.diff(0);
        Ok(Prism {
            base,
            profile,
            profile_derivative,
        })
    }

    /// The cone prism `(t, b) ↦ (1 − t)σ(b)`.
    pub fn cone(base: SingularSimplex) -> Prism {
        let profile = Expr::sub(Expr::one(), Expr::Var(0));
        Prism::new(base, profile).expect("1 - t is a valid profile")
    }

    /// The prism map restricted to the affine simplex `e` of `[0,1] × Δ_d`,
    /// written in `Δ_{d+1}` coordinates `(t, b)`.
    pub fn piece(&self, e: Embedding) -> Result<SingularSimplex, ChainError> {
        if e.target_dim() != self.dim() + 1 {
            return Err(ChainError::Shape(format!(
                "a prism piece of a {}-prism needs an embedding into Δ_{}",
                self.dim(),
                self.dim() + 1
            )));
        }
        Ok(SingularSimplex::prism_piece(self.clone(), e))
    }

    pub fn base(&self) -> &SingularSimplex {
        &self.base
    }

    pub fn profile(&self) -> &Expr {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    pub fn eval(&self, t: f64, b: &[f64]) -> Result<Vec<f64>, MapError> {
        let f = self.profile.eval(&[t])?;
        Ok(self.base.eval(b)?.into_iter().map(|x| f * x).collect())
    }

    /// Jacobian with respect to `(t, b_1, …, b_d)`.
    pub fn jacobian(&self, t: f64, b: &[f64]) -> Result<DMatrix<f64>, MapError> {
        let f = self.profile.eval(&[t])?;
        let df = self.profile_derivative.eval(&[t])?;
        let value = self.base.eval(b)?;
        let jb = self.base.jacobian(b)?;
        let n = self.base.ambient();
        let d = self.base.dim();
        Ok(DMatrix::from_fn(n, d + 1, |r, c| if c == 0 { df * value[r] } else { f * jb[(r, c - 1)] }))
    }

    /// Cells of the staircase triangulation of `[0,1] × Δ_d` in `(t, b)`
    /// coordinates: cell `k` has vertices `(0,v_0), …, (0,v_k), (1,v_k), …,
    /// (1,v_d)`. Signs orient every cell like `dt ∧ db_1 ∧ … ∧ db_d`.
    pub fn cells(d: usize) -> Vec<(Embedding, i32)> {
        (0..=d)
            .map(|k| {
                let mut vertices = Vec::with_capacity(d + 2);
                for (t, range) in [(0, 0..=k), (1, k..=d)] {
                    for j in range {
                        let mut v = vec![Rational::zero(); d + 1];
                        v[0] = Rational::from_integer(t);
                        if j > 0 {
                            v[j] = Rational::one();
                        }
                        vertices.push(v);
                    }
                }
                let e = Embedding::new(vertices).expect("prism cell");
                let sign = e.orientation();
                (e, sign)
            })
            .collect()
    }

    /// The prism as a chain of `d + 1` simplices, oriented like
    /// `dt ∧ db_1 ∧ … ∧ db_d`.
    pub fn chain(&self) -> Chain {
        let d = self.base.dim();
        let mut chain = Chain::zero(d + 1);
        for (e, sign) in Prism::cells(d) {
            chain.add_term(SingularSimplex::prism_piece(self.clone(), e), sign as i64);
        }
        chain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_examples() {
        let p = prism_q(0.0, &[0.3]);
        assert!((p[0] - 0.7).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15);
        assert_eq!(prism_q(1.0, &[0.2, 0.5]), vec![0.0, 0.0, 0.0]);
        let (t, b) = prism_q_inverse(&prism_q(0.4, &[0.2, 0.1])).unwrap();
        assert!((t - 0.4).abs() < 1e-15);
        assert!((b[0] - 0.2).abs() < 1e-15 && (b[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cells_cover_prism_with_positive_orientation() {
        for d in 0..=3 {
            let cells = Prism::cells(d);
            assert_eq!(cells.len(), d + 1);
            assert!(cells.iter().all(|(_, s)| s.abs() == 1));
        }
    }

    #[test]
    fn prism_equals_cone_after_q() {
        let s = SingularSimplex::parse(1, &["cos(pi * a1)", "sin(pi * a1)"]).unwrap();
        let prism = Prism::cone(s.clone());
        let cone = s.cone();
        for &(t, b) in &[(0.1, 0.2), (0.7, 0.9), (0.0, 0.5)] {
            let lhs = prism.eval(t, &[b]).unwrap();
            let rhs = cone.eval(&prism_q(t, &[b])).unwrap();
            for (x, y) in lhs.iter().zip(&rhs) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
