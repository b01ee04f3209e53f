//! Numerical inversion of a simplex map onto a given point of its image.

use nalgebra::{DMatrix, DVector};

use crate::chains::{Embedding, MapError, SimplexKind, SingularSimplex};

/// Newton stops once the residual is below this, relative to `1 + |y|`.
pub const INVERSE_TOL: f64 = 1e-12;
/// A preimage is accepted when its residual is below this, relative to
/// `1 + |y|`.
pub const INVERSE_ACCEPT: f64 = 1e-10;

const MAX_ITER: usize = 100;
/// Newton iterates are kept this far inside the simplex so that maps which
/// are only `C¹` on the open simplex are never differentiated on its boundary.
const MARGIN: f64 = 1e-15;

/// A preimage `x` of a point under `σ: Δ_n → R^N`: the smallest face of
/// `Δ_n` containing `x` and the coordinates of `x` in that face.
#[derive(Clone, Debug, PartialEq)]
pub struct Located {
    /// Vertices of `Δ_n` spanning the carrier face, increasing.
    pub face: Vec<usize>,
    /// Standard coordinates of the point in `Δ_k`, `k = face.len() − 1`.
    pub coords: Vec<f64>,
    pub residual: f64,
}

impl Located {
    /// Barycentric coordinates on all `n + 1` vertices of `Δ_n`.
    pub fn barycentric(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        let first = 1.0 - self.coords.iter().sum::<f64>();
        out[self.face[0]] = first;
        for (i, c) in self.coords.iter().enumerate() {
            out[self.face[i + 1]] = *c;
        }
        out
    }

    /// Standard coordinates in `Δ_n`.
    pub fn point(&self, n: usize) -> Vec<f64> {
        self.barycentric(n)[1..].to_vec()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(map: &SingularSimplex, c: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let v = map.eval(c).ok()?;
    let r: Vec<f64> = v.iter().zip(y).map(|(a, b)| a - b).collect();
    r.iter().all(|x| x.is_finite()).then_some(r)
}

/// Pulls `c` into the simplex, `MARGIN` away from every facet.
fn project(c: &mut [f64]) {
    for x in c.iter_mut() {
        if !(*x >= MARGIN) {
            *x = MARGIN;
        }
    }
    let total: f64 = c.iter().sum();
    let cap = 1.0 - MARGIN;
    if total > cap {
        let scale = cap / total;
        for x in c.iter_mut() {
            *x *= scale;
        }
    }
}

fn least_squares(j: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let svd = j.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let sol = svd.solve(&DVector::from_column_slice(rhs), max_sv * 1e-14).ok()?;
    let out: Vec<f64> = sol.iter().copied().collect();
    out.iter().all(|x| x.is_finite()).then_some(out)
}

/// Gauss–Newton with backtracking from one seed.
fn newton(map: &SingularSimplex, y: &[f64], seed: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let scale = 1.0 + norm(y);
    let mut c = seed;
    project(&mut c);
    let mut r = residual(map, &c, y)?;
    let mut rn = norm(&r);
    for _ in 0..MAX_ITER {
        if rn <= INVERSE_TOL * scale {
            break;
        }
        let j = map.jacobian(&c).ok()?;
        if j.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let step = least_squares(&j, &neg)?;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let mut trial: Vec<f64> = c.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            project(&mut trial);
            if let Some(tr) = residual(map, &trial, y) {
                let tn = norm(&tr);
                if tn < rn {
                    c = trial;
                    r = tr;
                    rn = tn;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Some((c, rn))
}

/// Preimage in the open simplex `Δ_k` of `map`, or `None`.
fn invert_open(map: &SingularSimplex, y: &[f64]) -> Result<Option<(Vec<f64>, f64)>, MapError> {
    let k = map.dim();
    let scale = 1.0 + norm(y);
    let inside = |c: &[f64]| c.iter().all(|&x| x > 0.0) && c.iter().sum::<f64>() < 1.0;
    if matches!(map.kind(), SimplexKind::Affine(_)) {
        let p0 = map.eval(&vec![0.0; k])?;
        let mut j = DMatrix::zeros(y.len(), k);
        for i in 0..k {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            let p = map.eval(&e)?;
            for r in 0..y.len() {
                j[(r, i)] = p[r] - p0[r];
            }
        }
        let rhs: Vec<f64> = y.iter().zip(&p0).map(|(a, b)| a - b).collect();
        let Some(c) = least_squares(&j, &rhs) else {
            return Ok(None);
        };
        let r = norm(&residual(map, &c, y).unwrap_or_else(|| vec![f64::INFINITY]));
        return Ok((r <= INVERSE_ACCEPT * scale && inside(&c)).then_some((c, r)));
    }
    let mut seeds = vec![vec![1.0 / (k as f64 + 1.0); k]];
    for v in 0..=k {
        let mut bary = vec![0.3 / k as f64; k + 1];
        bary[v] = 0.7;
        seeds.push(bary[1..].to_vec());
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for seed in seeds {
        if let Some((c, rn)) = newton(map, y, seed) {
            if rn <= INVERSE_TOL * scale {
                return Ok(Some((c, rn)));
            }
            if best.as_ref().is_none_or(|(_, b)| rn < *b) {
                best = Some((c, rn));
            }
        }
    }
    Ok(best.filter(|(_, rn)| *rn <= INVERSE_ACCEPT * scale))
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    crate::forms::multi_indices(n, size)
}

/// Finds `x ∈ Δ̄_n` with `map(x) = y`. Vertices are tried first, then the
/// open simplex, then the remaining faces by increasing dimension, so the
/// reported carrier is the smallest face containing the preimage.
pub fn invert(map: &SingularSimplex, y: &[f64]) -> Result<Option<Located>, MapError> {
    let n = map.dim();
    let scale = 1.0 + norm(y);
    for v in 0..=n {
        let face = Embedding::from_vertex_indices(n, &[v]);
        let p = map.compose(&face).map_err(|e| MapError::Inverse(e.to_string()))?.eval(&[])?;
        let r = norm(&p.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
        if r <= INVERSE_ACCEPT * scale {
            return Ok(Some(Located {
                face: vec![v],
                coords: Vec::new(),
                residual: r,
            }));
        }
    }
    if n == 0 {
        return Ok(None);
    }
    if let Some((c, r)) = invert_open(map, y)? {
        return Ok(Some(Located {
            face: (0..=n).collect(),
            coords: c,
            residual: r,
        }));
    }
    for size in 2..=n {
        for face in subsets(n + 1, size) {
            let sub = map
                .compose(&Embedding::from_vertex_indices(n, &face))
                .map_err(|e| MapError::Inverse(e.to_string()))?;
            if let Some((c, r)) = invert_open(&sub, y)? {
                return Ok(Some(Located {
                    face,
                    coords: c,
                    residual: r,
                }));
            }
        }
    }
    Ok(None)
}
