//! Numerical checks of `∫_σ dω = ∫_{∂σ} ω` for simplices, chains and
//! triangulated regions.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::chains::{Chain, SingularSimplex};
use crate::forms::{Form, FormError};
use crate::quad::{integrate_simplex, QuadConfig, QuadError, QuadResult};

#[derive(Debug, Error)]
pub enum StokesError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("a {degree}-form cannot be checked on a {dim}-simplex (need degree dim - 1)")]
    Degree { degree: usize, dim: usize },
    #[error("face {face:?} lies in {count} top simplices")]
    NonManifold { face: Vec<usize>, count: usize },
    #[error("face {face:?} is induced with the same orientation by both adjacent simplices")]
    Orientation { face: Vec<usize> },
    #[error("cell {index} has {found} vertices, expected {expected}")]
    Cell { index: usize, expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StokesVerdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Verdict threshold `max(abs, rel·(|lhs| + |rhs|))`. A bare `f64`
/// converts to an absolute threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Tolerance {
        Tolerance { rel, abs }
    }

    pub fn bound(&self, lhs: f64, rhs: f64) -> f64 {
        self.abs.max(self.rel * (lhs.abs() + rhs.abs()))
    }
}

impl Default for Tolerance {
    fn default() -> Tolerance {
        Tolerance { rel: 1e-6, abs: 1e-6 }
    }
}

impl From<f64> for Tolerance {
    fn from(abs: f64) -> Tolerance {
        Tolerance { rel: 0.0, abs }
    }
}

impl StokesVerdict {
    fn decide(converged: bool, residual: f64, tol: f64) -> StokesVerdict {
        if !converged {
            StokesVerdict::Inconclusive
        } else if residual <= tol {
            StokesVerdict::Pass
        } else {
            StokesVerdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceIntegral {
    pub index: usize,
    pub sign: i64,
    pub result: QuadResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StokesReport {
    /// `∫σ*(dω)`.
    pub lhs: QuadResult,
    /// `∫(σ∘F_i)*ω` with sign `(−1)^i`.
    pub faces: Vec<FaceIntegral>,
    /// `Σ_i (−1)^i ∫(σ∘F_i)*ω`.
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: StokesVerdict,
}

impl StokesReport {
    pub fn converged(&self) -> bool {
        self.lhs.converged && self.faces.iter().all(|f| f.result.converged)
    }
}

fn sign(i: usize) -> i64 {
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Compares `∫σ*(dω)` with `Σ_i (−1)^i ∫(σ∘F_i)*ω`. The verdict is `pass`
/// when the residual is within `tol` and every integral converged.
pub fn stokes_residual(
    sigma: &SingularSimplex,
    omega: &Form,
    cfg: &QuadConfig,
    tol: impl Into<Tolerance>,
) -> Result<StokesReport, StokesError> {
    let tol = tol.into();
    let d = sigma.dim();
    if d == 0 || omega.degree() + 1 != d {
        return Err(StokesError::Degree {
            degree: omega.degree(),
            dim: d,
        });
    }
    let lhs = integrate_simplex(sigma, &omega.exterior_derivative(), cfg)?;
    let mut faces = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let face = sigma.face(i).map_err(QuadError::from)?;
        faces.push(FaceIntegral {
            index: i,
            sign: sign(i),
            result: integrate_simplex(&face, omega, cfg)?,
        });
    }
    let rhs: f64 = faces.iter().map(|f| f.sign as f64 * f.result.value).sum();
    let residual = (lhs.value - rhs).abs();
    let converged = lhs.converged && faces.iter().all(|f| f.result.converged);
    let tolerance = tol.bound(lhs.value, rhs);
    Ok(StokesReport {
        lhs,
        faces,
        rhs,
        residual,
        tolerance,
        verdict: StokesVerdict::decide(converged, residual, tolerance),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainStokesReport {
    pub terms: Vec<(i64, StokesReport)>,
    /// `Σ k ∫σ*(dω)`.
    pub lhs: f64,
    /// `Σ k Σ_i (−1)^i ∫(σ∘F_i)*ω`.
    pub rhs: f64,
    /// `|lhs − rhs|`.
    pub residual: f64,
    /// `Σ |k| · residual(σ)`, an upper bound for `residual`.
    pub residual_sum: f64,
    pub tolerance: f64,
    pub verdict: StokesVerdict,
}

/// Termwise [`stokes_residual`]; the verdict uses the summed residuals.
pub fn check_chain(
    chain: &Chain,
    omega: &Form,
    cfg: &QuadConfig,
    tol: impl Into<Tolerance>,
) -> Result<ChainStokesReport, StokesError> {
    let tol = tol.into();
    let mut terms = Vec::with_capacity(chain.len());
    for (s, k) in chain.iter() {
        terms.push((k, stokes_residual(s, omega, cfg, tol)?));
    }
    let lhs = terms.iter().map(|(k, r)| *k as f64 * r.lhs.value).sum::<f64>();
    let rhs = terms.iter().map(|(k, r)| *k as f64 * r.rhs).sum::<f64>();
    let residual_sum = terms.iter().map(|(k, r)| k.unsigned_abs() as f64 * r.residual).sum::<f64>();
    let converged = terms.iter().all(|(_, r)| r.converged());
    let tolerance = tol.bound(lhs, rhs);
    Ok(ChainStokesReport {
        terms,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        residual_sum,
        tolerance,
        verdict: StokesVerdict::decide(converged, residual_sum, tolerance),
    })
}

/// A top simplex of a triangulated region: its vertex labels in the order
/// matching the vertices of `map`, and the sign it carries in the
/// fundamental chain.
#[derive(Clone, Debug)]
pub struct OrientedCell {
    pub vertices: Vec<usize>,
    pub map: SingularSimplex,
    pub sign: i64,
}

/// An interior face with the two contributions that should cancel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteriorFace {
    pub vertices: Vec<usize>,
    pub contributions: [f64; 2],
    /// `|sum of contributions|`.
    pub mismatch: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangulatedStokesReport {
    /// `Σ_τ ±∫τ*(dω)`.
    pub lhs: f64,
    /// `Σ_τ ±∫_{∂Δ_d} τ*ω` over all faces, interior ones included.
    pub rhs: f64,
    pub interior: Vec<InteriorFace>,
    pub max_interior_mismatch: f64,
    /// The uncancelled faces.
    #[serde(skip)]
    pub boundary: Chain,
    /// Vertex labels and signs of the faces in `boundary`.
    pub boundary_faces: Vec<(Vec<usize>, i64)>,
    /// `∫_Σ ω` over the boundary chain.
    pub boundary_integral: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub verdict: StokesVerdict,
}

/// Parity of the permutation sorting `v` (distinct entries).
fn permutation_sign(v: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                s = -s;
            }
        }
    }
    s
}

struct FaceUse {
    cell: usize,
    /// Sign with which the face enters `∂` of the signed cell.
    sign: i64,
    /// Orientation of the face's vertex order relative to sorted order.
    orientation: i64,
    simplex: SingularSimplex,
    integral: QuadResult,
}

/// Stokes over a triangulated region. Faces are matched by their vertex
/// sets; a face shared by two cells must be induced with opposite
/// orientations, and its two contributions should cancel. The remaining
/// faces form the boundary chain.
pub fn triangulated_stokes(
    cells: &[OrientedCell],
    omega: &Form,
    cfg: &QuadConfig,
    tol: impl Into<Tolerance>,
) -> Result<TriangulatedStokesReport, StokesError> {
    let tol = tol.into();
    let d = omega.degree() + 1;
    let mut lhs = 0.0;
    let mut converged = true;
    let domega = omega.exterior_derivative();
    let mut uses: BTreeMap<Vec<usize>, Vec<FaceUse>> = BTreeMap::new();
    for (c, cell) in cells.iter().enumerate() {
        if cell.vertices.len() != d + 1 || cell.map.dim() != d {
            return Err(StokesError::Cell {
                index: c,
                expected: d + 1,
                found: cell.vertices.len(),
            });
        }
        let r = integrate_simplex(&cell.map, &domega, cfg)?;
        converged &= r.converged;
        lhs += cell.sign as f64 * r.value;
        for i in 0..=d {
            let labels: Vec<usize> = cell
                .vertices
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .collect();
            let simplex = cell.map.face(i).map_err(QuadError::from)?;
            let integral = integrate_simplex(&simplex, omega, cfg)?;
            converged &= integral.converged;
            let mut key = labels.clone();
            key.sort_unstable();
            uses.entry(key).or_default().push(FaceUse {
                cell: c,
                sign: cell.sign * sign(i),
                orientation: permutation_sign(&labels),
                simplex,
                integral,
            });
        }
    }
    let mut rhs = 0.0;
    let mut interior = Vec::new();
    let mut boundary = Chain::zero(d - 1);
    let mut boundary_faces = Vec::new();
    let mut boundary_integral = 0.0;
    for (face, list) in &uses {
        for u in list {
            rhs += u.sign as f64 * u.integral.value;
        }
        match list.as_slice() {
            [u] => {
                boundary.add_term(u.simplex.clone(), u.sign);
                boundary_faces.push((face.clone(), u.sign * u.orientation));
                boundary_integral += u.sign as f64 * u.integral.value;
            }
            [a, b] => {
                if a.sign * a.orientation != -(b.sign * b.orientation) || a.cell == b.cell {
                    return Err(StokesError::Orientation { face: face.clone() });
                }
                let contributions = [a.sign as f64 * a.integral.value, b.sign as f64 * b.integral.value];
                interior.push(InteriorFace {
                    vertices: face.clone(),
                    contributions,
                    mismatch: (contributions[0] + contributions[1]).abs(),
                });
            }
            _ => {
                return Err(StokesError::NonManifold {
                    face: face.clone(),
                    count: list.len(),
                })
            }
        }
    }
    let max_interior_mismatch = interior.iter().map(|f| f.mismatch).fold(0.0, f64::max);
    let residual = (lhs - boundary_integral).abs();
    let tolerance = tol.bound(lhs, boundary_integral);
    let verdict = StokesVerdict::decide(converged, residual.max(max_interior_mismatch), tolerance);
    Ok(TriangulatedStokesReport {
        lhs,
        rhs,
        interior,
        max_interior_mismatch,
        boundary,
        boundary_faces,
        boundary_integral,
        residual,
        tolerance,
        converged,
        verdict,
    })
}
