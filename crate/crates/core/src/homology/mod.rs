//! Integer simplicial homology via Smith normal form.
//!
//! Abstract simplices are strictly increasing vertex tuples and carry the
//! orientation of that order.

mod matrix;
mod snf;

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use matrix::IntMatrix;
pub use snf::{smith_normal_form, SnfResult};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HomologyError {
    #[error("vertex {vertex} out of range for a complex on {count} vertices")]
    Vertex { vertex: usize, count: usize },
    #[error("simplex {0:?} repeats a vertex")]
    Repeated(Vec<usize>),
    #[error("simplex {0:?} has no vertices")]
    Empty(Vec<usize>),
    #[error("degree {degree} out of range (complex has dimension {dim})")]
    Degree { degree: usize, dim: isize },
    #[error("simplex {0:?} is not in the complex")]
    Missing(Vec<usize>),
}

/// Finite abstract simplicial complex, closed under taking faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertex_count: usize,
    /// `simplices[d]` lists the `d`-simplices in lexicographic order.
    simplices: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl SimplicialComplex {
    /// The smallest complex on `vertex_count` vertices containing the given
    /// simplices (in any vertex order) and all their faces. Every vertex is
    /// included as a 0-simplex.
    pub fn new<I, S>(vertex_count: usize, simplices: I) -> Result<SimplicialComplex, HomologyError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[usize]>,
    {
        let mut levels: Vec<BTreeSet<Vec<usize>>> = vec![(0..vertex_count).map(|v| vec![v]).collect()];
        for s in simplices {
            let s = s.as_ref();
            let mut sorted = s.to_vec();
            sorted.sort_unstable();
            if sorted.is_empty() {
                return Err(HomologyError::Empty(s.to_vec()));
            }
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(HomologyError::Repeated(s.to_vec()));
            }
            if let Some(&v) = sorted.iter().find(|&&v| v >= vertex_count) {
                return Err(HomologyError::Vertex {
                    vertex: v,
                    count: vertex_count,
                });
            }
            add_with_faces(&mut levels, sorted);
        }
        if vertex_count == 0 {
            levels.clear();
        }
        let simplices: Vec<Vec<Vec<usize>>> = levels.into_iter().map(|l| l.into_iter().collect()).collect();
        let index = simplices
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        Ok(SimplicialComplex {
            vertex_count,
            simplices,
            index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Dimension, or −1 for the empty complex.
    pub fn dim(&self) -> isize {
        self.simplices.len() as isize - 1
    }

    /// The `d`-simplices in lexicographic order (empty beyond the dimension).
    pub fn simplices(&self, d: usize) -> &[Vec<usize>] {
        self.simplices.get(d).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, d: usize) -> usize {
        self.simplices(d).len()
    }

    /// Position of a sorted simplex in [`Self::simplices`].
    pub fn index_of(&self, simplex: &[usize]) -> Option<usize> {
        self.index.get(simplex.len().checked_sub(1)?)?.get(simplex).copied()
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        let mut sorted = simplex.to_vec();
        sorted.sort_unstable();
        self.index_of(&sorted).is_some()
    }

    /// Simplices not a proper face of any other simplex.
    pub fn maximal_simplices(&self) -> Vec<Vec<usize>> {
        let mut covered: BTreeSet<Vec<usize>> = BTreeSet::new();
        for level in self.simplices.iter().skip(1) {
            for s in level {
                for i in 0..s.len() {
                    covered.insert(remove(s, i));
                }
            }
        }
        self.simplices
            .iter()
            .flatten()
            .filter(|s| !covered.contains(*s))
            .cloned()
            .collect()
    }

    /// `Σ (−1)^d · #d-simplices`.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(d, l)| if d % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) })
            .sum()
    }

    /// The boundary map `C_d → C_{d−1}`: entry `(F, σ)` is `(−1)^i` when
    /// `F` is `σ` without its `i`-th vertex.
    pub fn boundary_matrix(&self, d: usize) -> Result<IntMatrix, HomologyError> {
        if d == 0 || d as isize > self.dim() + 1 {
            return Err(HomologyError::Degree { degree: d, dim: self.dim() });
        }
        let mut m = IntMatrix::zeros(self.count(d - 1), self.count(d));
        for (j, s) in self.simplices(d).iter().enumerate() {
            for i in 0..s.len() {
                let f = remove(s, i);
                let r = self.index_of(&f).expect("complex is closed under faces");
                m[(r, j)] = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            }
        }
        Ok(m)
    }

    /// First barycentric subdivision. Vertex `k` of the result is the
    /// barycenter of `origin[k]`; simplices are flags of faces.
    pub fn barycentric_subdivision(&self) -> (SimplicialComplex, Vec<Vec<usize>>) {
        let origin: Vec<Vec<usize>> = self.simplices.iter().flatten().cloned().collect();
        let vertex_of: HashMap<&[usize], usize> = origin.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let mut flags = Vec::new();
        for s in self.simplices.iter().flatten() {
            for perm in permutations(s.len()) {
                let mut flag = Vec::with_capacity(s.len());
                let mut face: Vec<usize> = Vec::with_capacity(s.len());
                for &p in &perm {
                    face.push(s[p]);
                    face.sort_unstable();
                    flag.push(vertex_of[face.as_slice()]);
                }
                flags.push(flag);
            }
        }
        let sd = SimplicialComplex::new(origin.len(), flags).expect("flags are valid simplices");
        (sd, origin)
    }

    /// Sub-complex spanned by simplices all of whose vertices satisfy `keep`.
    pub fn full_subcomplex(&self, keep: impl Fn(usize) -> bool) -> SimplicialComplex {
        let kept: Vec<Vec<usize>> = self
            .simplices
            .iter()
            .flatten()
            .filter(|s| s.iter().all(|&v| keep(v)))
            .cloned()
            .collect();
        SimplicialComplex::new(self.vertex_count, kept).expect("subsets of valid simplices")
    }
}

fn remove(s: &[usize], i: usize) -> Vec<usize> {
    s.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .collect()
}

fn add_with_faces(levels: &mut Vec<BTreeSet<Vec<usize>>>, s: Vec<usize>) {
    let d = s.len() - 1;
    if levels.len() <= d {
        levels.resize(d + 1, BTreeSet::new());
    }
    if !levels[d].insert(s.clone()) || d == 0 {
        return;
    }
    for i in 0..s.len() {
        add_with_faces(levels, remove(&s, i));
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn serialize_bigints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn serialize_terms<S: Serializer>(v: &[(Vec<usize>, BigInt)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(simplex, k)| (simplex, k.to_string())))
}

/// Integer combination of oriented simplices of one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegerCycle {
    pub degree: usize,
    #[serde(serialize_with = "serialize_terms")]
    pub terms: Vec<(Vec<usize>, BigInt)>,
}

impl IntegerCycle {
    fn from_column(complex: &SimplicialComplex, degree: usize, column: &[BigInt]) -> IntegerCycle {
        let terms = column
            .iter()
            .enumerate()
            .filter(|(_, k)| !k.is_zero())
            .map(|(i, k)| (complex.simplices(degree)[i].clone(), k.clone()))
            .collect();
        IntegerCycle { degree, terms }
    }

    /// Coefficient vector in the simplex order of `complex`.
    pub fn to_vector(&self, complex: &SimplicialComplex) -> Result<Vec<BigInt>, HomologyError> {
        let mut v = vec![BigInt::zero(); complex.count(self.degree)];
        for (s, k) in &self.terms {
            let i = complex.index_of(s).ok_or_else(|| HomologyError::Missing(s.clone()))?;
            v[i] += k;
        }
        Ok(v)
    }

    /// True when the boundary vanishes exactly.
    pub fn is_cycle(&self, complex: &SimplicialComplex) -> Result<bool, HomologyError> {
        if self.degree == 0 {
            return Ok(true);
        }
        let v = self.to_vector(complex)?;
        let m = complex.boundary_matrix(self.degree)?;
        Ok((0..m.rows()).all(|r| {
            let mut s = BigInt::zero();
            for (c, x) in v.iter().enumerate() {
                s += &m[(r, c)] * x;
            }
            s.is_zero()
        }))
    }
}

/// `H_d` as `Z^betti ⊕ ⊕ Z/t_i`, with a generating cycle per summand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub degree: usize,
    pub betti: usize,
    #[serde(serialize_with = "serialize_bigints")]
    pub torsion: Vec<BigInt>,
    pub free_generators: Vec<IntegerCycle>,
    /// One per entry of `torsion`, in the same order.
    pub torsion_generators: Vec<IntegerCycle>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyResult {
    pub groups: Vec<HomologyGroup>,
}

impl HomologyResult {
    pub fn betti(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.betti).collect()
    }

    /// Alternating sum of Betti numbers.
    pub fn euler_characteristic(&self) -> i64 {
        self.groups
            .iter()
            .map(|g| if g.degree % 2 == 0 { g.betti as i64 } else { -(g.betti as i64) })
            .sum()
    }
}

/// Integer homology in every degree up to the dimension of `complex`.
///
/// The cycles `Z_d` get the basis `K` of the last columns of `V` in the
/// normal form of `∂_d`. In that basis `∂_{d+1}` is `A = (V⁻¹∂_{d+1})`
/// restricted to the same rows, and the normal form `P·A·Q` of `A`
/// exhibits `H_d = Z_d / im A`; the columns of `K·P⁻¹` generate the
/// summands.
pub fn homology(complex: &SimplicialComplex) -> HomologyResult {
    let top = complex.dim();
    let mut groups = Vec::new();
    if top < 0 {
        return HomologyResult { groups };
    }
    let top = top as usize;
    let snfs: Vec<Option<SnfResult>> = (0..=top + 1)
        .map(|d| {
            if d == 0 || d > top {
                None
            } else {
                Some(smith_normal_form(&complex.boundary_matrix(d).expect("degree in range")))
            }
        })
        .collect();
    for d in 0..=top {
        let n = complex.count(d);
        let (kernel, v_inv_rows) = match &snfs[d] {
            None => (IntMatrix::identity(n), IntMatrix::identity(n)),
            Some(s) => (s.v.cols_from(s.rank()), s.v_inv.rows_from(s.rank())),
        };
        let image = match complex.boundary_matrix(d + 1) {
            Ok(b) if d < top => &v_inv_rows * &b,
            _ => IntMatrix::zeros(kernel.cols(), 0),
        };
        let a = smith_normal_form(&image);
        let generators = &kernel * &a.u_inv;
        let mut torsion = Vec::new();
        let mut torsion_generators = Vec::new();
        for (i, s) in a.diagonal.iter().enumerate() {
            if !s.is_one() {
                torsion.push(s.abs());
                torsion_generators.push(IntegerCycle::from_column(complex, d, &generators.column(i)));
            }
        }
        let free_generators: Vec<IntegerCycle> = (a.rank()..generators.cols())
            .map(|c| IntegerCycle::from_column(complex, d, &generators.column(c)))
            .collect();
        groups.push(HomologyGroup {
            degree: d,
            betti: free_generators.len(),
            torsion,
            free_generators,
            torsion_generators,
        });
    }
    HomologyResult { groups }
}

/// Standard test complexes.
pub mod examples {
    use super::SimplicialComplex;

    /// Boundary of a triangle.
    pub fn hollow_triangle() -> SimplicialComplex {
        SimplicialComplex::new(3, [[0, 1], [1, 2], [0, 2]]).expect("valid")
    }

    /// Boundary of the 3-simplex.
    pub fn tetrahedron_boundary() -> SimplicialComplex {
        SimplicialComplex::new(4, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).expect("valid")
    }

    /// The 7-vertex torus: triangles `{i, i+1, i+3}` and `{i, i+2, i+3}`
    /// modulo 7.
    pub fn seven_vertex_torus() -> SimplicialComplex {
        let tris: Vec<[usize; 3]> = (0..7)
            .flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 2) % 7, (i + 3) % 7]])
            .collect();
        SimplicialComplex::new(7, tris).expect("valid")
    }

    /// The 6-vertex real projective plane.
    pub fn projective_plane() -> SimplicialComplex {
        let tris = [
            [0, 1, 2],
            [0, 2, 3],
            [0, 3, 4],
            [0, 4, 5],
            [0, 5, 1],
            [1, 2, 4],
            [2, 3, 5],
            [3, 4, 1],
            [4, 5, 2],
            [5, 1, 3],
        ];
        SimplicialComplex::new(6, tris).expect("valid")
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;

    fn check_representatives(k: &SimplicialComplex, h: &HomologyResult) {
        for g in &h.groups {
            for c in g.free_generators.iter().chain(&g.torsion_generators) {
                assert!(c.is_cycle(k).unwrap(), "{c:?}");
            }
        }
    }

    #[test]
    fn circle() {
        let k = hollow_triangle();
        let h = homology(&k);
        assert_eq!(h.betti(), vec![1, 1]);
        assert!(h.groups.iter().all(|g| g.torsion.is_empty()));
        check_representatives(&k, &h);
        assert_eq!(h.groups[1].free_generators[0].terms.len(), 3);
    }

    #[test]
    fn sphere() {
        let k = tetrahedron_boundary();
        assert_eq!(homology(&k).betti(), vec![1, 0, 1]);
    }

    #[test]
    fn torus() {
        let k = seven_vertex_torus();
        assert_eq!((k.count(0), k.count(1), k.count(2)), (7, 21, 14));
        let h = homology(&k);
        assert_eq!(h.betti(), vec![1, 2, 1]);
        check_representatives(&k, &h);
        let b2 = k.boundary_matrix(2).unwrap();
        for r in 0..b2.rows() {
            let nonzero = (0..b2.cols()).filter(|&c| !b2[(r, c)].is_zero()).count();
            assert_eq!(nonzero, 2);
        }
    }

    #[test]
    fn projective_plane_torsion() {
        let k = projective_plane();
        let h = homology(&k);
        assert_eq!(h.betti(), vec![1, 0, 0]);
        assert_eq!(h.groups[1].torsion, vec![BigInt::from(2)]);
        assert!(h.groups[0].torsion.is_empty() && h.groups[2].torsion.is_empty());
        check_representatives(&k, &h);
    }

    #[test]
    fn boundary_squares_to_zero() {
        for k in [seven_vertex_torus(), projective_plane(), tetrahedron_boundary()] {
            let prod = &k.boundary_matrix(1).unwrap() * &k.boundary_matrix(2).unwrap();
            assert!(prod.is_zero());
        }
        let full = SimplicialComplex::new(3, [[0, 1, 2]]).unwrap();
        assert!((&full.boundary_matrix(1).unwrap() * &full.boundary_matrix(2).unwrap()).is_zero());
    }

    #[test]
    fn subdivision_preserves_betti() {
        let k = seven_vertex_torus();
        let (sd, origin) = k.barycentric_subdivision();
        assert_eq!(origin.len(), 42);
        assert_eq!(sd.count(2), 84);
        assert_eq!(homology(&sd).betti(), vec![1, 2, 1]);
    }

    #[test]
    fn euler_characteristic_matches() {
        for k in [hollow_triangle(), tetrahedron_boundary(), seven_vertex_torus(), projective_plane()] {
            assert_eq!(k.euler_characteristic(), homology(&k).euler_characteristic());
        }
    }

    #[test]
    fn invalid_input() {
        assert!(SimplicialComplex::new(2, [[0, 2]]).is_err());
        assert!(SimplicialComplex::new(2, [[1, 1]]).is_err());
        assert!(hollow_triangle().boundary_matrix(0).is_err());
    }

    #[test]
    fn empty_complex() {
        let k = SimplicialComplex::new(0, Vec::<Vec<usize>>::new()).unwrap();
        assert_eq!(k.dim(), -1);
        assert!(homology(&k).groups.is_empty());
    }
}
