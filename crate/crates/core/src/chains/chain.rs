use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use indexmap::IndexMap;

use super::embedding::subdivision_cells;
use super::{ChainError, MapError, SingularSimplex};

/// Finite integer combination of singular simplices of one degree.
///
/// Terms keep their insertion order, so iteration and everything computed
/// from it is reproducible. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct Chain {
    degree: usize,
    terms: IndexMap<SingularSimplex, i64>,
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chain[{}]", self.degree)?;
        f.debug_map().entries(self.terms.iter().map(|(s, c)| (c, s))).finish()
    }
}

impl Chain {
    pub fn zero(degree: usize) -> Chain {
        Chain {
            degree,
            terms: IndexMap::new(),
        }
    }

    pub fn from_simplex(simplex: SingularSimplex) -> Chain {
        let mut c = Chain::zero(simplex.dim());
        c.add_term(simplex, 1);
        c
    }

    /// Builds a chain from `(simplex, coefficient)` pairs of one dimension.
    pub fn from_terms<I>(degree: usize, terms: I) -> Result<Chain, ChainError>
    where
        I: IntoIterator<Item = (SingularSimplex, i64)>,
    {
        let mut c = Chain::zero(degree);
        for (s, k) in terms {
            if s.dim() != degree {
                return Err(ChainError::Degree {
                    expected: degree,
                    found: s.dim(),
                });
            }
            c.add_term(s, k);
        }
        Ok(c)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SingularSimplex, i64)> {
        self.terms.iter().map(|(s, k)| (s, *k))
    }

    pub fn coefficient(&self, s: &SingularSimplex) -> i64 {
        self.terms.get(s).copied().unwrap_or(0)
    }

    /// Adds `k · s`, merging with an equal simplex already present.
    ///
    /// # Panics
    /// If the simplex dimension differs from the chain degree.
    pub fn add_term(&mut self, s: SingularSimplex, k: i64) {
        assert_eq!(s.dim(), self.degree, "simplex dimension must match chain degree");
        if k == 0 {
            return;
        }
        match self.terms.get_mut(&s) {
            Some(v) => {
                *v += k;
                if *v == 0 {
                    self.terms.shift_remove(&s);
                }
            }
            None => {
                self.terms.insert(s, k);
            }
        }
    }

    /// `∂c = Σ (−1)^i c ∘ F_i`, extended linearly.
    pub fn boundary(&self) -> Result<Chain, ChainError> {
        if self.degree == 0 {
            return Err(ChainError::BoundaryOfPoint);
        }
        let mut out = Chain::zero(self.degree - 1);
        for (s, k) in self.iter() {
            for i in 0..=self.degree {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                out.add_term(s.face(i)?, sign * k);
            }
        }
        Ok(out)
    }

    /// First barycentric subdivision, applied termwise.
    pub fn barycentric_subdivide(&self) -> Chain {
        let cells = subdivision_cells(self.degree);
        let mut out = Chain::zero(self.degree);
        for (s, k) in self.iter() {
            for (e, sign) in &cells {
                let piece = s.compose(e).expect("subdivision cell lies in the simplex");
                out.add_term(piece, k * *sign as i64);
            }
        }
        out
    }

    /// Termwise cone with apex at the origin.
    pub fn cone(&self) -> Chain {
        let mut out = Chain::zero(self.degree + 1);
        for (s, k) in self.iter() {
            out.add_term(s.cone(), k);
        }
        out
    }

    /// Merges terms whose simplices agree pointwise within `tol` on a
    /// sample grid, then drops zero coefficients. Used to recognise cycles
    /// whose faces coincide geometrically but not structurally.
    pub fn geometric_reduce(&self, tol: f64) -> Result<Chain, MapError> {
        let samples = sample_grid(self.degree);
        let mut reps: Vec<(SingularSimplex, Vec<f64>, i64)> = Vec::new();
        for (s, k) in self.iter() {
            let mut values = Vec::new();
            for p in &samples {
                values.extend(s.eval(p)?);
            }
            match reps.iter_mut().find(|(_, v, _)| {
                v.len() == values.len() && v.iter().zip(&values).all(|(a, b)| (a - b).abs() <= tol)
            }) {
                Some(entry) => entry.2 += k,
                None => reps.push((s.clone(), values, k)),
            }
        }
        let mut out = Chain::zero(self.degree);
        for (s, _, k) in reps {
            out.add_term(s, k);
        }
        Ok(out)
    }

    /// True when `∂c` vanishes after geometric merging within `tol`.
    pub fn is_geometric_cycle(&self, tol: f64) -> Result<bool, ChainError> {
        if self.degree == 0 {
            return Ok(true);
        }
        Ok(self.boundary()?.geometric_reduce(tol)?.is_empty())
    }
}

/// Points of `Δ_d` with barycentric coordinates in multiples of `1/4`,
/// plus two interior points off that lattice.
pub(crate) fn sample_grid(d: usize) -> Vec<Vec<f64>> {
    let m = 4usize;
    let mut out = Vec::new();
    let mut current = vec![0usize; d];
    fn rec(i: usize, left: usize, current: &mut Vec<usize>, m: usize, out: &mut Vec<Vec<f64>>) {
        if i == current.len() {
            out.push(current.iter().map(|&c| c as f64 / m as f64).collect());
            return;
        }
        for c in 0..=left {
            current[i] = c;
            rec(i + 1, left - c, current, m, out);
        }
    }
    rec(0, m, &mut current, m, &mut out);
    if d > 0 {
        let scale = 1.0 / (d as f64 + 1.7);
        out.push((0..d).map(|i| scale * (1.0 + 0.1 * i as f64)).collect());
        out.push((0..d).map(|i| 0.3 * scale * (1.0 + 0.37 * i as f64)).collect());
    }
    out
}

impl Add for Chain {
    type Output = Chain;

    fn add(mut self, rhs: Chain) -> Chain {
        assert_eq!(self.degree, rhs.degree, "cannot add chains of different degrees");
        for (s, k) in rhs.terms {
            self.add_term(s, k);
        }
        self
    }
}

impl Neg for Chain {
    type Output = Chain;

    fn neg(mut self) -> Chain {
        for k in self.terms.values_mut() {
            *k = -*k;
        }
        self
    }
}

impl Sub for Chain {
    type Output = Chain;

    fn sub(self, rhs: Chain) -> Chain {
        self + (-rhs)
    }
}

impl Mul<i64> for Chain {
    type Output = Chain;

    fn mul(self, k: i64) -> Chain {
        if k == 0 {
            return Chain::zero(self.degree);
        }
        Chain {
            degree: self.degree,
            terms: self.terms.into_iter().map(|(s, c)| (s, c * k)).collect(),
        }
    }
}
