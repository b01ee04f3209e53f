use std::collections::{BTreeMap, BTreeSet};

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::chains::{sample_grid, Chain, Embedding, MapError, SingularSimplex};
use crate::expr::Rational;
use crate::homology::{IntegerCycle, SimplicialComplex};

use super::inverse::invert;
use super::GlueError;

/// Pointwise tolerance for evaluators to agree on shared faces.
pub const FACE_TOL: f64 = 1e-10;
/// Two samples of different points closer than this (relative to the size
/// of the image) count as a collision.
pub const COLLISION_TOL: f64 = 1e-9;

/// A top simplex of a triangulation with its geometric evaluator. Vertex
/// `i` of `Δ_d` corresponds to the `i`-th smallest label.
#[derive(Clone, Debug)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub map: SingularSimplex,
    /// The chart or piece the cell came from.
    pub chart: Option<String>,
}

/// A simplicial complex with an evaluator for each maximal simplex and
/// named sets of simplices.
#[derive(Clone, Debug)]
pub struct Triangulation {
    complex: SimplicialComplex,
    cells: Vec<Cell>,
    marks: BTreeMap<String, BTreeSet<Vec<usize>>>,
    ambient: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Largest disagreement between evaluators on a shared face.
    pub face_mismatch: f64,
    pub samples: usize,
    /// Pairs of distinct sample points with (numerically) equal images.
    pub collisions: usize,
    /// Injectivity is checked on samples only.
    pub certified: bool,
    pub valid: bool,
}

impl Triangulation {
    /// Checks that every maximal simplex of the complex spanned by the
    /// cells has exactly one cell and that marks name simplices of it.
    pub fn new(
        vertex_count: usize,
        cells: Vec<Cell>,
        marks: BTreeMap<String, BTreeSet<Vec<usize>>>,
    ) -> Result<Triangulation, GlueError> {
        let mut ambient = None;
        for c in &cells {
            if c.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GlueError::Invalid(format!("cell vertices {:?} must be strictly increasing", c.vertices)));
            }
            if c.map.dim() + 1 != c.vertices.len() {
                return Err(GlueError::Invalid(format!(
                    "cell {:?} has a {}-dimensional evaluator",
                    c.vertices,
                    c.map.dim()
                )));
            }
            if *ambient.get_or_insert(c.map.ambient()) != c.map.ambient() {
                return Err(GlueError::Invalid("evaluators have different target dimensions".into()));
            }
        }
        let complex = SimplicialComplex::new(vertex_count, cells.iter().map(|c| c.vertices.clone()))
            .map_err(|e| GlueError::Invalid(e.to_string()))?;
        let maximal: BTreeSet<Vec<usize>> = complex.maximal_simplices().into_iter().collect();
        let given: BTreeSet<Vec<usize>> = cells.iter().map(|c| c.vertices.clone()).collect();
        if given.len() != cells.len() {
            return Err(GlueError::Invalid("a simplex has two cells".into()));
        }
        if let Some(extra) = given.difference(&maximal).next() {
            return Err(GlueError::Invalid(format!("cell {extra:?} is a face of another cell")));
        }
        if let Some(missing) = maximal.difference(&given).next() {
            return Err(GlueError::Invalid(format!("vertex {missing:?} lies in no cell")));
        }
        for (name, set) in &marks {
            if let Some(s) = set.iter().find(|s| complex.index_of(s).is_none()) {
                return Err(GlueError::Invalid(format!("mark `{name}` names {s:?}, which is not a simplex")));
            }
        }
        Ok(Triangulation {
            complex,
            cells,
            marks,
            ambient: ambient.unwrap_or(0),
        })
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn marks(&self) -> &BTreeMap<String, BTreeSet<Vec<usize>>> {
        &self.marks
    }

    pub fn mark(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.marks.get(name)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn vertex_count(&self) -> usize {
        self.complex.vertex_count()
    }

    pub(crate) fn set_mark(&mut self, name: &str, set: BTreeSet<Vec<usize>>) {
        self.marks.insert(name.to_string(), set);
    }

    /// A cell containing `simplex` (sorted) and the positions of its
    /// vertices in that cell.
    pub fn cell_containing(&self, simplex: &[usize]) -> Option<(&Cell, Vec<usize>)> {
        self.cells.iter().find_map(|c| {
            let pos: Option<Vec<usize>> = simplex.iter().map(|v| c.vertices.iter().position(|u| u == v)).collect();
            pos.map(|p| (c, p))
        })
    }

    /// Evaluator of any simplex, restricted from the first cell containing it.
    pub fn simplex_map(&self, simplex: &[usize]) -> Result<SingularSimplex, GlueError> {
        let (cell, pos) = self
            .cell_containing(simplex)
            .ok_or_else(|| GlueError::Invalid(format!("{simplex:?} is not a simplex")))?;
        Ok(cell
            .map
            .compose(&Embedding::from_vertex_indices(cell.map.dim(), &pos))?)
    }

    pub fn vertex_position(&self, v: usize) -> Result<Vec<f64>, GlueError> {
        Ok(self.simplex_map(&[v])?.eval(&[])?)
    }

    /// The chain `Σ k·Φ_σ` of a simplicial chain.
    pub fn chain_of(&self, cycle: &IntegerCycle) -> Result<Chain, GlueError> {
        let mut chain = Chain::zero(cycle.degree);
        for (s, k) in &cycle.terms {
            let k = k
                .to_i64()
                .ok_or_else(|| GlueError::Invalid(format!("coefficient {k} does not fit in 64 bits")))?;
            chain.add_term(self.simplex_map(s)?, k);
        }
        Ok(chain)
    }

    /// First barycentric subdivision. Vertex `k` of the result is the
    /// barycenter of the `k`-th simplex of the complex in dimension-then-
    /// lexicographic order. A new simplex carries a mark when the largest
    /// simplex in its flag does.
    pub fn subdivide(&self) -> Result<Triangulation, GlueError> {
        let (sd, origin) = self.complex.barycentric_subdivision();
        let mut cells = Vec::new();
        for top in sd.maximal_simplices() {
            let largest = top
                .iter()
                .map(|&k| &origin[k])
                .max_by_key(|s| s.len())
                .expect("nonempty flag");
            let cell = self
                .cells
                .iter()
                .find(|c| &c.vertices == largest)
                .ok_or_else(|| GlueError::Invalid(format!("subdivided simplex {top:?} lies in no cell")))?;
            let d = cell.map.dim();
            let vertices: Vec<Vec<Rational>> = top
                .iter()
                .map(|&k| {
                    let face = &origin[k];
                    let w = Rational::new(1, face.len() as i64);
                    let mut p = vec![Rational::zero(); d];
                    for v in face {
                        let pos = cell.vertices.iter().position(|u| u == v).expect("face of cell");
                        if pos > 0 {
                            p[pos - 1] += w;
                        }
                    }
                    p
                })
                .collect();
            let e = Embedding::new(vertices)?;
            cells.push(Cell {
                vertices: top,
                map: cell.map.compose(&e)?,
                chart: cell.chart.clone(),
            });
        }
        let mut marks = BTreeMap::new();
        for (name, set) in &self.marks {
            let mut out = BTreeSet::new();
            for d in 0..=sd.dim().max(0) as usize {
                for s in sd.simplices(d) {
                    let largest = s.iter().map(|&k| &origin[k]).max_by_key(|f| f.len()).expect("nonempty");
                    if set.contains(largest) {
                        out.insert(s.clone());
                    }
                }
            }
            marks.insert(name.clone(), out);
        }
        Triangulation::new(sd.vertex_count(), cells, marks)
    }

    /// The smallest simplex whose image contains `x`, with barycentric
    /// coordinates on it, searching cells in order.
    pub fn locate(&self, x: &[f64]) -> Result<Option<(Vec<usize>, Vec<f64>)>, MapError> {
        for cell in &self.cells {
            if let Some(loc) = invert(&cell.map, x)? {
                let labels: Vec<usize> = loc.face.iter().map(|&i| cell.vertices[i]).collect();
                let bary = loc.barycentric(cell.map.dim());
                let weights = loc.face.iter().map(|&i| bary[i]).collect();
                return Ok(Some((labels, weights)));
            }
        }
        Ok(None)
    }

    /// True when every sample point of the simplex lies in the image of `other`.
    pub(crate) fn simplex_inside(&self, simplex: &[usize], other: &Triangulation) -> Result<bool, GlueError> {
        let map = self.simplex_map(simplex)?;
        for p in sample_grid(map.dim()) {
            if other.locate(&map.eval(&p)?)?.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Samples face agreement and injectivity.
    pub fn validate(&self) -> Result<ValidationReport, GlueError> {
        let mut face_mismatch: f64 = 0.0;
        let mut samples: Vec<(Vec<f64>, usize)> = Vec::new();
        let mut id = 0usize;
        for d in 0..=self.complex.dim().max(0) as usize {
            for s in self.complex.simplices(d) {
                let maps: Vec<SingularSimplex> = self
                    .cells
                    .iter()
                    .filter_map(|c| {
                        let pos: Option<Vec<usize>> = s.iter().map(|v| c.vertices.iter().position(|u| u == v)).collect();
                        pos.map(|p| c.map.compose(&Embedding::from_vertex_indices(c.map.dim(), &p)))
                    })
                    .collect::<Result<_, _>>()?;
                for p in sample_grid(d) {
                    let first = maps[0].eval(&p)?;
                    for other in &maps[1..] {
                        let v = other.eval(&p)?;
                        for (a, b) in first.iter().zip(&v) {
                            face_mismatch = face_mismatch.max((a - b).abs());
                        }
                    }
                }
                for p in interior_lattice(d, 4) {
                    samples.push((maps[0].eval(&p)?, id));
                    id += 1;
                }
            }
        }
        let scale = samples
            .iter()
            .flat_map(|(x, _)| x.iter())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = COLLISION_TOL * scale;
        samples.sort_by(|a, b| a.0.first().unwrap_or(&0.0).total_cmp(b.0.first().unwrap_or(&0.0)));
        let mut collisions = 0;
        for i in 0..samples.len() {
            for j in i + 1..samples.len() {
                let (xi, xj) = (&samples[i].0, &samples[j].0);
                if xi.is_empty() || xj[0] - xi[0] > tol {
                    if !xi.is_empty() {
                        break;
                    }
                }
                let dist = xi.iter().zip(xj).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if dist <= tol {
                    collisions += 1;
                }
            }
        }
        Ok(ValidationReport {
            face_mismatch,
            samples: samples.len(),
            collisions,
            certified: false,
            valid: face_mismatch <= FACE_TOL && collisions == 0,
        })
    }
}

/// Points of the open simplex `Δ_d` with barycentric coordinates in
/// positive multiples of `1/q`; the single point of `Δ_0`.
fn interior_lattice(d: usize, q: usize) -> Vec<Vec<f64>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; d + 1];
    fn rec(i: usize, left: usize, current: &mut Vec<usize>, q: usize, out: &mut Vec<Vec<f64>>) {
        let n = current.len();
        if i == n - 1 {
            if left >= 1 {
                current[i] = left;
                out.push(current[1..].iter().map(|&c| c as f64 / q as f64).collect());
            }
            return;
        }
        for c in 1..left {
            current[i] = c;
            rec(i + 1, left - c, current, q, out);
        }
    }
    rec(0, q, &mut current, q, &mut out);
    if out.is_empty() {
        out.push(vec![1.0 / (d as f64 + 1.0); d]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment() -> Triangulation {
        let map = SingularSimplex::affine(vec![vec![0.0], vec![1.0]]).unwrap();
        Triangulation::new(
            2,
            vec![Cell {
                vertices: vec![0, 1],
                map,
                chart: None,
            }],
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn subdivided_segment() {
        let t = segment().subdivide().unwrap();
        assert_eq!(t.vertex_count(), 3);
        assert_eq!(t.cells().len(), 2);
        assert_eq!(t.vertex_position(2).unwrap(), vec![0.5]);
        let r = t.validate().unwrap();
        assert!(r.valid, "{r:?}");
    }

    #[test]
    fn folded_map_collides() {
        let map = SingularSimplex::parse(1, &["(2*a1 - 1)^2"]).unwrap();
        let t = Triangulation::new(
            2,
            vec![Cell {
                vertices: vec![0, 1],
                map,
                chart: None,
            }],
            BTreeMap::new(),
        )
        .unwrap();
        assert!(t.validate().unwrap().collisions > 0);
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(interior_lattice(1, 4).len(), 3);
        assert_eq!(interior_lattice(2, 4).len(), 3);
        assert_eq!(interior_lattice(3, 4).len(), 1);
        assert_eq!(interior_lattice(4, 4).len(), 1);
    }
}
