use std::fmt;

use nalgebra::DMatrix;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, Zero};

use crate::expr::{rational_to_f64, Expr, Rational};

use super::ChainError;

/// Affine map `Δ_k → R^m` given by exact rational images of the vertices.
///
/// Vertex 0 of `Δ_k` is the origin and vertex `i` is `e_i`, so the point
/// `a` maps to `v_0 + Σ a_i (v_i − v_0)`. Used for face maps, subdivision
/// cells and prism pieces; composing two embeddings is exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Embedding {
    domain_dim: usize,
    target_dim: usize,
    vertices: Vec<Vec<Rational>>,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Embedding[")?;
        for (k, v) in self.vertices.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            f.write_str("(")?;
            for (j, c) in v.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        f.write_str("]")
    }
}

fn overflow() -> ! {
    panic!("embedding coordinates overflowed 64-bit rationals")
}

/// Coordinates of vertex `j` of the standard simplex `Δ_d`.
pub fn std_vertex(d: usize, j: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    if j > 0 {
        v[j - 1] = Rational::one();
    }
    v
}

impl Embedding {
    /// Builds an embedding from `k + 1` vertex images of equal length.
    pub fn new(vertices: Vec<Vec<Rational>>) -> Result<Embedding, ChainError> {
        let target_dim = vertices.first().map_or(0, Vec::len);
        if vertices.is_empty() || vertices.iter().any(|v| v.len() != target_dim) {
            return Err(ChainError::Shape("embedding vertices must be nonempty and of equal length".into()));
        }
        Ok(Embedding {
            domain_dim: vertices.len() - 1,
            target_dim,
            vertices,
        })
    }

    /// The embedding of `Δ_k` sending its vertices to the listed vertices of
    /// `Δ_d` (0 is the origin, `j ≥ 1` is `e_j`).
    pub fn from_vertex_indices(d: usize, indices: &[usize]) -> Embedding {
        Embedding {
            domain_dim: indices.len() - 1,
            target_dim: d,
            vertices: indices.iter().map(|&j| std_vertex(d, j)).collect(),
        }
    }

    pub fn identity(d: usize) -> Embedding {
        let indices: Vec<usize> = (0..=d).collect();
        Embedding::from_vertex_indices(d, &indices)
    }

    /// Face of `Δ_d` opposite vertex `i`, with the remaining vertices in
    /// their original order.
    pub fn face(d: usize, i: usize) -> Result<Embedding, ChainError> {
        if d == 0 || i > d {
            return Err(ChainError::FaceIndex { dim: d, index: i });
        }
        let indices: Vec<usize> = (0..=d).filter(|&j| j != i).collect();
        Ok(Embedding::from_vertex_indices(d, &indices))
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn is_identity(&self) -> bool {
        self.domain_dim == self.target_dim && *self == Embedding::identity(self.domain_dim)
    }

    /// Exact image of a rational point.
    pub fn apply_exact(&self, a: &[Rational]) -> Vec<Rational> {
        let v0 = &self.vertices[0];
        let mut out = v0.clone();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            let vi = &self.vertices[i + 1];
            for j in 0..self.target_dim {
                let delta = vi[j].checked_sub(&v0[j]).unwrap_or_else(|| overflow());
                let term = ai.checked_mul(&delta).unwrap_or_else(|| overflow());
                out[j] = out[j].checked_add(&term).unwrap_or_else(|| overflow());
            }
        }
        out
    }

    /// Floating-point image of a point.
    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        let v0: Vec<f64> = self.vertices[0].iter().map(|c| rational_to_f64(*c)).collect();
        let mut out = v0.clone();
        for (i, ai) in a.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                let delta = self.vertices[i + 1][j] - self.vertices[0][j];
                if !delta.is_zero() {
                    *o += ai * rational_to_f64(delta);
                }
            }
        }
        out
    }

    /// Linear part as a `target_dim × domain_dim` matrix.
    pub fn linear_part(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.target_dim, self.domain_dim, |j, i| {
            rational_to_f64(self.vertices[i + 1][j] - self.vertices[0][j])
        })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Embedding) -> Embedding {
        assert_eq!(inner.target_dim, self.domain_dim, "embedding dimensions do not chain");
        Embedding {
            domain_dim: inner.domain_dim,
            target_dim: self.target_dim,
            vertices: inner.vertices.iter().map(|v| self.apply_exact(v)).collect(),
        }
    }

    /// If every vertex image is a vertex of `Δ_target`, their indices.
    pub fn vertex_indices(&self) -> Option<Vec<usize>> {
        self.vertices
            .iter()
            .map(|v| {
                let nonzero: Vec<usize> = (0..v.len()).filter(|&j| !v[j].is_zero()).collect();
                match nonzero.as_slice() {
                    [] => Some(0),
                    [j] if v[*j].is_one() => Some(j + 1),
                    _ => None,
                }
            })
            .collect()
    }

    /// Sign of the determinant of the linear part for a square embedding;
    /// zero when degenerate.
    pub fn orientation(&self) -> i32 {
        assert_eq!(self.domain_dim, self.target_dim, "orientation needs a square embedding");
        let n = self.domain_dim;
        if n == 0 {
            return 1;
        }
        let mut m: Vec<Vec<Rational>> = (0..n)
            .map(|j| (0..n).map(|i| self.vertices[i + 1][j] - self.vertices[0][j]).collect())
            .collect();
        let mut sign = 1;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return 0;
            };
            if pivot != col {
                m.swap(pivot, col);
                sign = -sign;
            }
            if m[col][col].is_negative() {
                sign = -sign;
            }
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = m[r][col] / m[col][col];
                for c in col..n {
                    let sub = factor * m[col][c];
                    m[r][c] = m[r][c] - sub;
                }
            }
        }
        sign
    }

    /// The embedding's coordinates as expressions in the domain variables.
    pub fn to_exprs(&self) -> Vec<Expr> {
        (0..self.target_dim)
            .map(|j| {
                let v0 = self.vertices[0][j];
                let mut terms = vec![Expr::Const(v0)];
                for i in 0..self.domain_dim {
                    let delta = self.vertices[i + 1][j] - v0;
                    terms.push(Expr::mul(Expr::Const(delta), Expr::Var(i)));
                }
                Expr::sum(terms)
            })
            .collect()
    }
}

/// Face map of `Δ_d` opposite vertex `i`.
pub fn face_map(d: usize, i: usize) -> Result<Embedding, ChainError> {
    Embedding::face(d, i)
}

/// Cells of the first barycentric subdivision of `Δ_d` with their
/// orientation signs relative to `Δ_d`.
///
/// For a permutation `π` of the vertices, the cell has vertex `k` at the
/// barycenter of `{v_π(0), …, v_π(k)}`.
pub fn subdivision_cells(d: usize) -> Vec<(Embedding, i32)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..=d).collect();
    permutations(&mut perm, 0, &mut |p| {
        let mut vertices = Vec::with_capacity(d + 1);
        let mut sum = vec![Rational::zero(); d];
        for (k, &v) in p.iter().enumerate() {
            let vertex = std_vertex(d, v);
            for j in 0..d {
                sum[j] += vertex[j];
            }
            let scale = Rational::new(1, (k + 1) as i64);
            vertices.push(sum.iter().map(|c| c * scale).collect());
        }
        let e = Embedding::new(vertices).expect("well-formed subdivision cell");
        let sign = e.orientation();
        out.push((e, sign));
    });
    out
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn face_maps_of_interval_and_triangle() {
        assert_eq!(face_map(1, 0).unwrap().apply(&[]), vec![1.0]);
        assert_eq!(face_map(1, 1).unwrap().apply(&[]), vec![0.0]);
        let f = face_map(2, 0).unwrap();
        assert_eq!(f.apply(&[0.25]), vec![0.75, 0.25]);
        assert!(face_map(2, 3).is_err());
        assert!(face_map(0, 0).is_err());
    }

    #[test]
    fn orientation_signs() {
        assert_eq!(Embedding::identity(3).orientation(), 1);
        assert_eq!(Embedding::from_vertex_indices(2, &[0, 2, 1]).orientation(), -1);
        assert_eq!(Embedding::from_vertex_indices(2, &[1, 0, 2]).orientation(), -1);
        assert_eq!(Embedding::new(vec![vec![r(0)], vec![r(0)]]).unwrap().orientation(), 0);
    }

    #[test]
    fn subdivision_counts_and_volume() {
        for d in 1..=3usize {
            let cells = subdivision_cells(d);
            let count: usize = (1..=d + 1).product();
            assert_eq!(cells.len(), count);
            assert!(cells.iter().all(|(_, s)| s.abs() == 1));
            let positive = cells.iter().filter(|(_, s)| *s > 0).count();
            assert_eq!(positive * 2, count);
        }
    }

    #[test]
    fn composition_is_exact() {
        let f = face_map(3, 1).unwrap();
        let g = face_map(2, 2).unwrap();
        let h = f.compose(&g);
        assert_eq!(h, Embedding::from_vertex_indices(3, &[0, 2]));
        assert_eq!(h.vertex_indices(), Some(vec![0, 2]));
    }
}
