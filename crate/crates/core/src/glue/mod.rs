//! Gluing triangulated pieces along a common subspace.
//!
//! Given triangulations `T₁` of `X₁` and `T₂` of `X₂` whose restrictions to
//! `B = X₁ ∩ X₂` are subcomplexes, with `T₂|_B` refining `T₁|_B`, every
//! simplex `v ∪ b` of `T₁` (`b` the part in `B`) is replaced by the joins
//! `v ∪ τ` over the simplices `τ` of `T₂|_B` inside `b`. The evaluator of
//! `v ∪ τ` is [`GluedMap`].

mod inverse;
mod map;
mod triangulation;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::chains::{ChainError, Embedding, MapError, SingularSimplex};

pub use inverse::{invert, Located, INVERSE_ACCEPT, INVERSE_TOL};
pub use map::GluedMap;
pub use triangulation::{Cell, Triangulation, ValidationReport, COLLISION_TOL, FACE_TOL};

/// Name of the mark holding the shared subcomplex.
pub const SHARED_MARK: &str = "B";
/// Maximum number of barycentric subdivisions applied to make an input
/// satisfy the gluing conditions.
pub const MAX_REFINEMENTS: usize = 5;

#[derive(Debug, Error)]
pub enum GlueError {
    #[error("invalid triangulation: {0}")]
    Invalid(String),
    #[error("incompatible pieces: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// The two sides of a gluing. Both triangulations carry a [`SHARED_MARK`]
/// subcomplex; `carriers` sends each shared vertex of `t2` to the smallest
/// shared simplex of `t1` containing it.
#[derive(Clone, Debug)]
pub struct GlueInput {
    pub t1: Triangulation,
    pub t2: Triangulation,
    pub carriers: BTreeMap<usize, Vec<usize>>,
}

fn shared(t: &Triangulation) -> BTreeSet<Vec<usize>> {
    t.mark(SHARED_MARK).cloned().unwrap_or_default()
}

/// Simplices whose vertices are all marked but which are not marked themselves.
fn condition_violations(t: &Triangulation, mark: &str) -> Vec<Vec<usize>> {
    let set = t.mark(mark).cloned().unwrap_or_default();
    let complex = t.complex();
    let mut out = Vec::new();
    for d in 1..=complex.dim().max(0) as usize {
        for s in complex.simplices(d) {
            if !set.contains(s) && s.iter().all(|&v| set.contains(&vec![v])) {
                out.push(s.clone());
            }
        }
    }
    out
}

/// Subdivides until every simplex spanned by marked vertices is marked.
/// One barycentric subdivision always suffices when the mark is a subcomplex.
pub fn enforce_b_condition(t: &Triangulation, mark: &str) -> Result<Triangulation, GlueError> {
    let mut current = t.clone();
    for _ in 0..=MAX_REFINEMENTS {
        if condition_violations(&current, mark).is_empty() {
            return Ok(current);
        }
        current = current.subdivide()?;
    }
    Err(GlueError::Incompatible(format!(
        "mark `{mark}` is not full after {MAX_REFINEMENTS} subdivisions"
    )))
}

/// The shared simplex of `t1` spanned by the carriers of `tau`'s vertices.
fn carrier_of(tau: &[usize], carriers: &BTreeMap<usize, Vec<usize>>) -> Option<Vec<usize>> {
    let mut out = BTreeSet::new();
    for v in tau {
        out.extend(carriers.get(v)?.iter().copied());
    }
    Some(out.into_iter().collect())
}

impl GlueInput {
    /// Checks that the shared marks are subcomplexes, that `t1` satisfies
    /// the fullness condition and that every shared simplex of `t2` lies in
    /// a shared simplex of `t1`.
    pub fn check(&self) -> Result<(), GlueError> {
        let b1 = shared(&self.t1);
        let b2 = shared(&self.t2);
        for (b, side) in [(&b1, "first"), (&b2, "second")] {
            for s in b {
                for i in 0..s.len() {
                    if s.len() > 1 {
                        let mut f = s.clone();
                        f.remove(i);
                        if !b.contains(&f) {
                            return Err(GlueError::Invalid(format!(
                                "shared simplices of the {side} piece are not closed under faces: {s:?}"
                            )));
                        }
                    }
                }
            }
        }
        if let Some(s) = condition_violations(&self.t1, SHARED_MARK).first() {
            return Err(GlueError::Incompatible(format!(
                "{s:?} has all vertices shared but is not shared"
            )));
        }
        for s in &b2 {
            let c = carrier_of(s, &self.carriers)
                .ok_or_else(|| GlueError::Incompatible(format!("shared vertex of {s:?} has no carrier")))?;
            if !b1.contains(&c) {
                return Err(GlueError::Incompatible(format!(
                    "shared simplex {s:?} of the second piece spans {c:?}, which is not a shared simplex of the first"
                )));
            }
        }
        Ok(())
    }

    /// Computes the shared parts of two triangulations from their images
    /// and refines both until they can be glued.
    pub fn from_geometry(t1: &Triangulation, t2: &Triangulation) -> Result<GlueInput, GlueError> {
        let mut t1 = t1.clone();
        let b1 = shared_by_geometry(&t1, t2)?;
        t1.set_mark(SHARED_MARK, b1);
        let t1 = enforce_b_condition(&t1, SHARED_MARK)?;
        let mut t2 = t2.clone();
        let b2 = shared_by_geometry(&t2, &t1)?;
        t2.set_mark(SHARED_MARK, b2);
        let mut last = None;
        for _ in 0..=MAX_REFINEMENTS {
            let carriers = vertex_carriers(&t1, &t2)?;
            let input = GlueInput {
                t1: t1.clone(),
                t2: t2.clone(),
                carriers,
            };
            match input.check() {
                Ok(()) => return Ok(input),
                Err(GlueError::Incompatible(msg)) => {
                    last = Some(msg);
                    t2 = t2.subdivide()?;
                }
                Err(e) => return Err(e),
            }
        }
        Err(GlueError::Incompatible(last.unwrap_or_default()))
    }
}

/// Simplices of `t` whose sampled images lie in the image of `other`.
fn shared_by_geometry(t: &Triangulation, other: &Triangulation) -> Result<BTreeSet<Vec<usize>>, GlueError> {
    let mut out = BTreeSet::new();
    let complex = t.complex();
    for d in 0..=complex.dim().max(0) as usize {
        for s in complex.simplices(d) {
            let faces_shared = d == 0
                || (0..s.len()).all(|i| {
                    let mut f = s.clone();
                    f.remove(i);
                    out.contains(&f)
                });
            if faces_shared && t.simplex_inside(s, other)? {
                out.insert(s.clone());
            }
        }
    }
    Ok(out)
}

fn vertex_carriers(t1: &Triangulation, t2: &Triangulation) -> Result<BTreeMap<usize, Vec<usize>>, GlueError> {
    let mut out = BTreeMap::new();
    for s in shared(t2) {
        if s.len() != 1 {
            continue;
        }
        let x = t2.vertex_position(s[0])?;
        let (labels, _) = t1
            .locate(&x)?
            .ok_or_else(|| GlueError::Incompatible(format!("vertex {} of the second piece is not in the first", s[0])))?;
        out.insert(s[0], labels);
    }
    Ok(out)
}

/// Glues `t1` onto `t2`. Vertices `0..n₂` of the result are those of `t2`;
/// the unshared vertices of `t1` follow in increasing order. Marks other
/// than [`SHARED_MARK`] carry over: a joined simplex `v ∪ τ` is marked when
/// `v ∪ carrier(τ)` is marked in `t1`.
pub fn glue(input: &GlueInput) -> Result<Triangulation, GlueError> {
    input.check()?;
    let GlueInput { t1, t2, carriers } = input;
    let b1 = shared(t1);
    let b2 = shared(t2);
    let n2 = t2.vertex_count();
    let is_shared = |v: usize| b1.contains(&vec![v]);
    let mut relabel = BTreeMap::new();
    for v in 0..t1.vertex_count() {
        if !is_shared(v) {
            relabel.insert(v, n2 + relabel.len());
        }
    }
    let back: BTreeMap<usize, usize> = relabel.iter().map(|(&k, &v)| (v, k)).collect();

    let mut cells: Vec<Cell> = t2.cells().to_vec();
    for cell in t1.cells() {
        let (v, b): (Vec<usize>, Vec<usize>) = cell.vertices.iter().partition(|&&u| !is_shared(u));
        if v.is_empty() {
            continue;
        }
        let new_v: Vec<usize> = v.iter().map(|u| relabel[u]).collect();
        if b.is_empty() {
            cells.push(Cell {
                vertices: new_v,
                map: cell.map.clone(),
                chart: cell.chart.clone(),
            });
            continue;
        }
        let order: Vec<usize> = v
            .iter()
            .chain(&b)
            .map(|u| cell.vertices.iter().position(|w| w == u).expect("cell vertex"))
            .collect();
        let d = cell.map.dim();
        let h1 = cell.map.compose(&Embedding::from_vertex_indices(d, &order))?;
        let inside: Vec<Vec<usize>> = b2
            .iter()
            .filter(|tau| carrier_of(tau, carriers).is_some_and(|c| c.iter().all(|u| b.contains(u))))
            .cloned()
            .collect();
        for tau in &inside {
            let maximal = !inside
                .iter()
                .any(|o| o.len() > tau.len() && tau.iter().all(|u| o.contains(u)));
            if !maximal {
                continue;
            }
            let h2 = t2.simplex_map(tau)?;
            let m = v.len() - 1;
            let joined = SingularSimplex::glued(GluedMap::new(h1.clone(), h2, m)?);
            let s = tau.len() - 1;
            let perm: Vec<usize> = (m + 1..=m + 1 + s).chain(0..=m).collect();
            let map = joined.compose(&Embedding::from_vertex_indices(m + s + 1, &perm))?;
            let mut vertices = tau.clone();
            vertices.extend(&new_v);
            cells.push(Cell {
                vertices,
                map,
                chart: cell.chart.clone(),
            });
        }
    }

    // Shared cells of `t2` can become faces of joined cells.
    let sets: Vec<BTreeSet<usize>> = cells.iter().map(|c| c.vertices.iter().copied().collect()).collect();
    let keep: Vec<bool> = sets
        .iter()
        .map(|a| !sets.iter().any(|b| b.len() > a.len() && a.is_subset(b)))
        .collect();
    let cells: Vec<Cell> = cells.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect();

    let mut names: BTreeSet<&String> = t1.marks().keys().collect();
    names.extend(t2.marks().keys());
    names.remove(&SHARED_MARK.to_string());
    let mut provisional = Triangulation::new(n2 + relabel.len(), cells, BTreeMap::new())?;
    for name in names {
        let m1 = t1.mark(name);
        let m2 = t2.mark(name);
        let mut set = BTreeSet::new();
        let complex = provisional.complex().clone();
        for d in 0..=complex.dim().max(0) as usize {
            for s in complex.simplices(d) {
                let (tau, v): (Vec<usize>, Vec<usize>) = s.iter().partition(|&&u| u < n2);
                let v: Vec<usize> = v.iter().map(|u| back[u]).collect();
                let marked = if v.is_empty() {
                    m2.is_some_and(|m| m.contains(&tau))
                        || (b2.contains(&tau)
                            && carrier_of(&tau, carriers).is_some_and(|c| m1.is_some_and(|m| m.contains(&c))))
                } else {
                    let mut source: BTreeSet<usize> = v.into_iter().collect();
                    if !tau.is_empty() {
                        match carrier_of(&tau, carriers) {
                            Some(c) => source.extend(c),
                            None => continue,
                        }
                    }
                    let source: Vec<usize> = source.into_iter().collect();
                    m1.is_some_and(|m| m.contains(&source))
                };
                if marked {
                    set.insert(s.clone());
                }
            }
        }
        provisional.set_mark(name, set);
    }
    Ok(provisional)
}

/// Glues a sequence of pieces, each onto the union of the previous ones.
pub fn cover_and_triangulate(pieces: &[Triangulation]) -> Result<Triangulation, GlueError> {
    let (first, rest) = pieces
        .split_first()
        .ok_or_else(|| GlueError::Invalid("no pieces to glue".into()))?;
    let mut acc = first.clone();
    for piece in rest {
        let input = GlueInput::from_geometry(piece, &acc)?;
        acc = glue(&input)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::homology;

    fn arc(components: [&str; 2], chart: &str) -> Triangulation {
        let map = SingularSimplex::parse(1, &components).unwrap();
        Triangulation::new(
            2,
            vec![Cell {
                vertices: vec![0, 1],
                map,
                chart: Some(chart.into()),
            }],
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn two_semicircles_make_a_circle() {
        let upper = arc(["cos(pi*a1)", "sin(pi*a1)"], "upper");
        let lower = arc(["cos(pi*(1 + a1))", "sin(pi*(1 + a1))"], "lower");
        let t = cover_and_triangulate(&[upper, lower]).unwrap();
        assert_eq!(homology(t.complex()).betti(), vec![1, 1]);
        let r = t.validate().unwrap();
        assert!(r.valid, "{r:?}");
    }

    #[test]
    fn three_arcs_make_a_circle() {
        let pieces: Vec<Triangulation> = (0..3)
            .map(|k| {
                let start = format!("2*pi*({k} + a1)/3");
                arc([&format!("cos({start})"), &format!("sin({start})")], &format!("arc{k}"))
            })
            .collect();
        let t = cover_and_triangulate(&pieces).unwrap();
        assert_eq!(homology(t.complex()).betti(), vec![1, 1]);
        assert!(t.validate().unwrap().valid);
    }

    #[test]
    fn disjoint_pieces() {
        let a = arc(["a1", "0"], "a");
        let b = arc(["a1", "1"], "b");
        let t = cover_and_triangulate(&[a, b]).unwrap();
        assert_eq!(t.vertex_count(), 4);
        assert_eq!(homology(t.complex()).betti(), vec![2, 0]);
    }

    #[test]
    fn identical_pieces_give_the_second() {
        let a = arc(["a1", "0"], "a");
        let b = arc(["a1", "0"], "b");
        let t = cover_and_triangulate(&[a, b]).unwrap();
        assert_eq!(t.vertex_count(), 2);
        assert_eq!(t.cells().len(), 1);
        assert_eq!(t.cells()[0].chart.as_deref(), Some("a"));
    }

    fn single(vertices: Vec<usize>, map: SingularSimplex) -> Triangulation {
        let n = vertices.len();
        Triangulation::new(n, vec![Cell { vertices, map, chart: None }], BTreeMap::new()).unwrap()
    }

    #[test]
    fn triangle_onto_its_edge() {
        let triangle = single(vec![0, 1, 2], SingularSimplex::parse(2, &["a1 + 0.5*a1*a2", "a2"]).unwrap());
        let edge = single(vec![0, 1], SingularSimplex::parse(1, &["1 - a1", "0"]).unwrap());
        let input = GlueInput::from_geometry(&triangle, &edge).unwrap();
        assert_eq!(shared(&input.t1).len(), 3);
        let t = glue(&input).unwrap();
        assert_eq!(t.vertex_count(), 3);
        assert_eq!(t.cells().len(), 1);
        let r = t.validate().unwrap();
        assert!(r.valid, "{r:?}");
        let apex = t.vertex_position(2).unwrap();
        assert!(apex[0].abs() < 1e-12 && (apex[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_edge_is_incompatible() {
        let triangle = single(vec![0, 1, 2], SingularSimplex::parse(2, &["a1", "a2"]).unwrap());
        let segment = single(vec![0, 1], SingularSimplex::parse(1, &["0.25 + 0.5*a1", "0"]).unwrap());
        assert!(matches!(
            GlueInput::from_geometry(&triangle, &segment),
            Err(GlueError::Incompatible(_))
        ));
    }

    #[test]
    fn marks_follow_glued_simplices() {
        let mut upper = arc(["cos(pi*a1)", "sin(pi*a1)"], "upper");
        upper.set_mark("top", [vec![0, 1], vec![0], vec![1]].into_iter().collect());
        let lower = arc(["cos(pi*(1 + a1))", "sin(pi*(1 + a1))"], "lower");
        let t = cover_and_triangulate(&[upper, lower]).unwrap();
        // The accumulated piece keeps its cells; the lower arc is subdivided.
        let top = t.mark("top").unwrap();
        let edges: Vec<&Vec<usize>> = top.iter().filter(|s| s.len() == 2).collect();
        assert_eq!(edges, vec![&vec![0, 1]]);
        assert!(t.mark(SHARED_MARK).is_none());
    }
}
