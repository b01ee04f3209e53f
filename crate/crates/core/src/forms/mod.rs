//! Differential forms on `R^N` with expression coefficients.

mod decomp;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::chains::{MapError, SingularSimplex};
use crate::expr::{is_identically_zero, Expr};

pub use decomp::{decompose_ab, restrict_components, DecompAB};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FormError {
    #[error("form index {index} out of range for ambient dimension {ambient}")]
    Index { index: usize, ambient: usize },
    #[error("term has {found} indices but the form has degree {degree}")]
    Degree { degree: usize, found: usize },
    #[error("coefficient `{0}` uses a variable beyond the ambient dimension")]
    Coefficient(String),
    #[error("a {form}-form cannot be pulled back along a {simplex}-simplex")]
    Mismatch { form: usize, simplex: usize },
    #[error("form lives in R^{form} but the simplex maps into R^{simplex}")]
    Ambient { form: usize, simplex: usize },
}

/// A `p`-form `Σ_I h_I dx_I` on `R^N`.
///
/// Multi-indices are zero-based and strictly increasing; coefficients are
/// expressions in the ambient coordinates `x_1, …, x_N` (printed `a1..aN`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Form {
    degree: usize,
    ambient: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (idx, h)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({h})")?;
            for (n, i) in idx.iter().enumerate() {
                f.write_str(if n == 0 { " " } else { "∧" })?;
                write!(f, "dx{}", i + 1)?;
            }
        }
        Ok(())
    }
}

/// Sorts `indices` in place and returns the sign of the sorting
/// permutation, or `None` when an index repeats.
fn sort_with_sign(indices: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if indices.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl Form {
    pub fn zero(degree: usize, ambient: usize) -> Form {
        Form {
            degree,
            ambient,
            terms: BTreeMap::new(),
        }
    }

    /// The 0-form `h`.
    pub fn function(ambient: usize, h: Expr) -> Result<Form, FormError> {
        Form::from_terms(0, ambient, vec![(Vec::new(), h)])
    }

    /// Builds a form from `(indices, coefficient)` pairs; indices are
    /// zero-based and may come in any order.
    pub fn from_terms(degree: usize, ambient: usize, terms: Vec<(Vec<usize>, Expr)>) -> Result<Form, FormError> {
        let mut form = Form::zero(degree, ambient);
        for (idx, h) in terms {
            form.add_term(idx, h)?;
        }
        Ok(form)
    }

    /// Adds `h dx_{i_1} ∧ … ∧ dx_{i_p}`.
    pub fn add_term(&mut self, mut indices: Vec<usize>, h: Expr) -> Result<(), FormError> {
        if indices.len() != self.degree {
            return Err(FormError::Degree {
                degree: self.degree,
                found: indices.len(),
            });
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= self.ambient) {
            return Err(FormError::Index {
                index,
                ambient: self.ambient,
            });
        }
        if h.min_arity() > self.ambient {
            return Err(FormError::Coefficient(h.to_string()));
        }
        let Some(sign) = sort_with_sign(&mut indices) else {
            return Ok(());
        };
        let h = if sign < 0 { Expr::neg(h) } else { h };
        self.accumulate(indices, h);
        Ok(())
    }

    fn accumulate(&mut self, indices: Vec<usize>, h: Expr) {
        let merged = match self.terms.remove(&indices) {
            Some(old) => Expr::add(old, h),
            None => h,
        };
        if !merged.is_zero() {
            self.terms.insert(indices, merged);
        }
    }

    /// Drops terms whose coefficients are shown to vanish identically.
    fn prune(mut self) -> Form {
        self.terms.retain(|_, h| !is_identically_zero(h));
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Expr)> {
        self.terms.iter().map(|(i, h)| (i.as_slice(), h))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, indices: &[usize]) -> Option<&Expr> {
        self.terms.get(indices)
    }

    /// `d(h dx_I) = Σ_j ∂h/∂x_j dx_j ∧ dx_I`, with terms that cancel
    /// symbolically removed.
    pub fn exterior_derivative(&self) -> Form {
        let mut out = Form::zero(self.degree + 1, self.ambient);
        for (idx, h) in &self.terms {
            for j in 0..self.ambient {
                if idx.contains(&j) {
                    continue;
                }
                let dh = h.diff(j);
                if dh.is_zero() {
                    continue;
                }
                let pos = idx.iter().filter(|&&i| i < j).count();
                let mut new_idx = idx.clone();
                new_idx.insert(pos, j);
                let term = if pos % 2 == 0 { dh } else { Expr::neg(dh) };
                out.accumulate(new_idx, term);
            }
        }
        out.prune()
    }

    /// Sum of two forms of the same degree and ambient dimension.
    pub fn plus(&self, other: &Form) -> Result<Form, FormError> {
        if self.degree != other.degree {
            return Err(FormError::Degree {
                degree: self.degree,
                found: other.degree,
            });
        }
        let mut out = self.clone();
        for (idx, h) in &other.terms {
            out.accumulate(idx.clone(), h.clone());
        }
        Ok(out)
    }

    /// The form with every coefficient multiplied by `c`.
    pub fn scaled(&self, c: Expr) -> Form {
        let mut out = Form::zero(self.degree, self.ambient);
        for (idx, h) in &self.terms {
            out.accumulate(idx.clone(), Expr::mul(c.clone(), h.clone()));
        }
        out
    }

    /// Coefficients evaluated at `x`, in index order.
    pub fn eval_coefficients(&self, x: &[f64]) -> Result<Vec<(&[usize], f64)>, MapError> {
        self.terms
            .iter()
            .map(|(i, h)| Ok((i.as_slice(), h.eval(x)?)))
            .collect()
    }

    /// True when the form is shown closed symbolically.
    pub fn is_closed_symbolically(&self) -> bool {
        self.exterior_derivative().is_zero()
    }

    /// The density of `σ*ω` against `da_1 ∧ … ∧ da_d` at `a`:
    /// `Σ_I h_I(σ(a)) · det(∂σ_I/∂a)`.
    pub fn pullback_density(&self, sigma: &SingularSimplex, a: &[f64]) -> Result<f64, MapError> {
        let value = sigma.eval(a)?;
        if self.degree == 0 {
            return match self.terms.get(&Vec::new()) {
                Some(h) => Ok(h.eval(&value)?),
                None => Ok(0.0),
            };
        }
        let jac = sigma.jacobian(a)?;
        let mut total = 0.0;
        for (idx, h) in &self.terms {
            let det = minor_det(&jac, idx, None);
            if det != 0.0 {
                total += h.eval(&value)? * det;
            }
        }
        Ok(total)
    }

    /// Checks that the form can be pulled back along `sigma`.
    pub fn check_pullback(&self, sigma: &SingularSimplex) -> Result<(), FormError> {
        if self.degree != sigma.dim() {
            return Err(FormError::Mismatch {
                form: self.degree,
                simplex: sigma.dim(),
            });
        }
        if self.ambient != sigma.ambient() {
            return Err(FormError::Ambient {
                form: self.ambient,
                simplex: sigma.ambient(),
            });
        }
        Ok(())
    }

    /// The standard form `dx_I`.
    pub fn standard(ambient: usize, indices: Vec<usize>) -> Result<Form, FormError> {
        let degree = indices.len();
        Form::from_terms(degree, ambient, vec![(indices, Expr::one())])
    }
}

/// Determinant of the square submatrix of `m` on `rows`, and on `cols`
/// (all columns when `None`).
pub(crate) fn minor_det(m: &DMatrix<f64>, rows: &[usize], cols: Option<&[usize]>) -> f64 {
    let all: Vec<usize>;
    let cols = match cols {
        Some(c) => c,
        None => {
            all = (0..m.ncols()).collect();
            &all
        }
    };
    let k = rows.len();
    debug_assert_eq!(k, cols.len());
    match k {
        0 => 1.0,
        1 => m[(rows[0], cols[0])],
        2 => m[(rows[0], cols[0])] * m[(rows[1], cols[1])] - m[(rows[0], cols[1])] * m[(rows[1], cols[0])],
        _ => DMatrix::from_fn(k, k, |r, c| m[(rows[r], cols[c])]).determinant(),
    }
}

/// All increasing `k`-subsets of `0..n`.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(text: &str, n: usize) -> Expr {
        parse(text, n).unwrap()
    }

    #[test]
    fn derivative_of_x_dy() {
        let w = Form::from_terms(1, 2, vec![(vec![1], e("a1", 2))]).unwrap();
        let dw = w.exterior_derivative();
        assert_eq!(dw, Form::standard(2, vec![0, 1]).unwrap());
    }

    #[test]
    fn derivative_of_rotation_form() {
        let w = Form::from_terms(1, 2, vec![(vec![1], e("a1", 2)), (vec![0], e("-a2", 2))]).unwrap();
        let dw = w.exterior_derivative();
        assert_eq!(dw.coefficient(&[0, 1]), Some(&Expr::constant(2)));
        assert_eq!(dw.terms().count(), 1);
    }

    #[test]
    fn d_squared_vanishes() {
        let f = Form::function(2, e("a1^2 * a2 + sin(a1)", 2)).unwrap();
        assert!(f.exterior_derivative().exterior_derivative().is_zero());
        let w = Form::from_terms(1, 3, vec![(vec![0], e("a2 * exp(a3) / (1 + a1^2)", 3)), (vec![2], e("sqrt(1 + a1*a2)", 3))])
            .unwrap();
        assert!(w.exterior_derivative().exterior_derivative().is_zero());
    }

    #[test]
    fn unordered_and_repeated_indices() {
        let w = Form::from_terms(2, 2, vec![(vec![1, 0], Expr::one())]).unwrap();
        assert_eq!(w.coefficient(&[0, 1]), Some(&Expr::constant(-1)));
        let z = Form::from_terms(2, 2, vec![(vec![1, 1], Expr::one())]).unwrap();
        assert!(z.is_zero());
        assert!(Form::from_terms(1, 2, vec![(vec![2], Expr::one())]).is_err());
    }

    #[test]
    fn densities() {
        let id = SingularSimplex::identity(2);
        let area = Form::standard(2, vec![0, 1]).unwrap();
        assert_eq!(area.pullback_density(&id, &[0.2, 0.3]).unwrap(), 1.0);

        let root = SingularSimplex::parse(1, &["a1", "sqrt(a1)"]).unwrap();
        let dy = Form::standard(2, vec![1]).unwrap();
        assert!((dy.pullback_density(&root, &[0.25]).unwrap() - 1.0).abs() < 1e-15);

        let square = SingularSimplex::parse(2, &["a1^2", "a2"]).unwrap();
        assert!((area.pullback_density(&square, &[0.5, 0.1]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_enumeration() {
        assert_eq!(multi_indices(4, 2).len(), 6);
        assert_eq!(multi_indices(3, 0), vec![Vec::<usize>::new()]);
    }
}
