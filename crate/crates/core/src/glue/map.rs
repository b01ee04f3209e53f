use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use crate::chains::{ChainError, Embedding, MapError, SingularSimplex};

use super::inverse::{invert, Located};

/// The interpolating map of the gluing construction.
///
/// With `h₁: Δ_{m+n+1} → X₁` on a simplex `(v_0, …, v_m, b_0, …, b_n)` and
/// `h₂: Δ_s → B` on a simplex `τ` lying in the face `(b_0, …, b_n)`, the
/// map on `(v_0, …, v_m, w_0, …, w_s)` sends barycentric `λ` to
///
/// `h₁(λ_0 e_0 + … + λ_m e_m + a·g(λ_{m+1}/a, …, λ_{m+s+1}/a))`
///
/// with `a = λ_{m+1} + … + λ_{m+s+1}` and `g = h₁|⁻¹ ∘ h₂` landing in the
/// `b`-face. At `a = 0` the second term is dropped, which is the
/// continuous extension.
#[derive(Clone)]
pub struct GluedMap {
    h1: SingularSimplex,
    base_face: SingularSimplex,
    h2: SingularSimplex,
    m: usize,
    n: usize,
    cache: Arc<Mutex<HashMap<Vec<u64>, Located>>>,
}

impl PartialEq for GluedMap {
    fn eq(&self, other: &Self) -> bool {
        self.h1 == other.h1 && self.h2 == other.h2 && self.m == other.m && self.n == other.n
    }
}

impl Eq for GluedMap {}

impl Hash for GluedMap {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.h1.hash(state);
        self.h2.hash(state);
        self.m.hash(state);
        self.n.hash(state);
    }
}

impl fmt::Debug for GluedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Glued")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("h1", &self.h1)
            .field("h2", &self.h2)
            .finish()
    }
}

/// `λ_0 = 1 − Σ x`, `λ_i = x_i`, with rounding noise clamped.
fn barycentric(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(1.0 - x.iter().sum::<f64>());
    out.extend_from_slice(x);
    for v in &mut out {
        if *v < 0.0 && *v > -1e-14 {
            *v = 0.0;
        }
    }
    out
}

impl GluedMap {
    /// `h1` has its `m + 1` unshared vertices first; `h2` is the map of `τ`.
    pub fn new(h1: SingularSimplex, h2: SingularSimplex, m: usize) -> Result<GluedMap, ChainError> {
        let total = h1.dim();
        if m >= total {
            return Err(ChainError::Shape(format!(
                "a glued simplex needs shared vertices: m = {m} but h1 has dimension {total}"
            )));
        }
        if h1.ambient() != h2.ambient() {
            return Err(ChainError::Shape("h1 and h2 must have the same target".into()));
        }
        let n = total - m - 1;
        let b: Vec<usize> = (m + 1..=total).collect();
        let base_face = h1.compose(&Embedding::from_vertex_indices(total, &b))?;
        Ok(GluedMap {
            h1,
            base_face,
            h2,
            m,
            n,
            cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn h1(&self) -> &SingularSimplex {
        &self.h1
    }

    pub fn h2(&self) -> &SingularSimplex {
        &self.h2
    }

    /// Index of the last unshared vertex.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m + self.h2.dim() + 1
    }

    pub fn ambient(&self) -> usize {
        self.h1.ambient()
    }

    pub fn may_be_singular(&self) -> bool {
        self.h1.may_be_singular() || self.h2.may_be_singular()
    }

    /// `g(y) = h₁|⁻¹(h₂(y))` for `y` in standard coordinates of `Δ_s`.
    pub fn g(&self, y: &[f64]) -> Result<Located, MapError> {
        let key: Vec<u64> = y.iter().map(|v| v.to_bits()).collect();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let target = self.h2.eval(y)?;
        let loc = invert(&self.base_face, &target)?.ok_or_else(|| {
            MapError::Inverse(format!("h2({y:?}) = {target:?} is not in the image of the shared face of h1"))
        })?;
        self.cache.lock().expect("cache lock").insert(key, loc.clone());
        Ok(loc)
    }

    /// The face of `h₁` on the unshared vertices and the carrier of `g`,
    /// and the point of that face hit by `λ`.
    fn lift(&self, lambda: &[f64]) -> Result<(SingularSimplex, Vec<f64>, Option<Located>, f64), MapError> {
        let m = self.m;
        let total = self.m + self.n + 1;
        let a: f64 = lambda[m + 1..].iter().sum();
        let mut vertices: Vec<usize> = (0..=m).collect();
        let mut bary: Vec<f64> = lambda[..=m].to_vec();
        let loc = if a > 0.0 {
            let y: Vec<f64> = lambda[m + 2..].iter().map(|v| v / a).collect();
            let loc = self.g(&y)?;
            let mu = loc.barycentric(self.n);
            for &f in &loc.face {
                vertices.push(m + 1 + f);
                bary.push(a * mu[f]);
            }
            Some(loc)
        } else {
            None
        };
        let face = if vertices.len() == total + 1 {
            self.h1.clone()
        } else {
            self.h1
                .compose(&Embedding::from_vertex_indices(total, &vertices))
                .map_err(|e| MapError::Inverse(e.to_string()))?
        };
        Ok((face, bary[1..].to_vec(), loc, a))
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, MapError> {
        let lambda = barycentric(x);
        let (face, p, _, _) = self.lift(&lambda)?;
        face.eval(&p)
    }

    /// Jacobian by the chain rule through `g`, whose derivative comes from
    /// the implicit function theorem. The factor `1/a` in the normalised
    /// argument of `g` cancels against the outer `a`, so the formula stays
    /// bounded as `a → 0`; at `a = 0` the directions out of the unshared
    /// face are not differentiable and are reported as zero.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, MapError> {
        let m = self.m;
        let s = self.h2.dim();
        let d = self.dim();
        let lambda = barycentric(x);
        let (face, p, loc, a) = self.lift(&lambda)?;
        let k = loc.as_ref().map_or(0, |l| l.face.len());
        // Rows: barycentric coordinates of the face point; columns: λ.
        let mut jp = DMatrix::<f64>::zeros(m + 1 + k, d + 1);
        for i in 0..=m {
            jp[(i, i)] = 1.0;
        }
        if let Some(loc) = &loc {
            let y: Vec<f64> = lambda[m + 1..].iter().map(|v| v / a).collect();
            let mu = loc.barycentric(self.n);
            // dμ on the carrier with respect to the standard coordinates of y.
            let dmu = if loc.face.len() > 1 && s > 0 {
                let carrier = self
                    .base_face
                    .compose(&Embedding::from_vertex_indices(self.n, &loc.face))
                    .map_err(|e| MapError::Inverse(e.to_string()))?;
                let jg = carrier.jacobian(&loc.coords)?;
                let jh2 = self.h2.jacobian(&y[1..])?;
                let dc = jg
                    .clone()
                    .svd(true, true)
                    .solve(&jh2, 1e-14 * jg.norm())
                    .map_err(|e| MapError::Inverse(e.to_string()))?;
                let kk = loc.face.len() - 1;
                let mut dmu = DMatrix::zeros(kk + 1, s);
                for j in 0..s {
                    for i in 0..kk {
                        dmu[(i + 1, j)] = dc[(i, j)];
                        dmu[(0, j)] -= dc[(i, j)];
                    }
                }
                dmu
            } else {
                DMatrix::zeros(loc.face.len(), s)
            };
            for (row, &f) in loc.face.iter().enumerate() {
                let r = m + 1 + row;
                for c in m + 1..=d {
                    jp[(r, c)] += mu[f];
                }
                for j in 1..=s {
                    let coef = dmu[(row, j - 1)];
                    jp[(r, m + 1 + j)] += coef;
                    for c in m + 1..=d {
                        jp[(r, c)] -= coef * y[j];
                    }
                }
            }
        }
        // λ as a function of x: λ_0 = 1 − Σx, λ_i = x_i.
        let mut l = DMatrix::<f64>::zeros(d + 1, d);
        for j in 0..d {
            l[(0, j)] = -1.0;
            l[(j + 1, j)] = 1.0;
        }
        let jf = face.jacobian(&p)?;
        let rows = jp.rows(1, jp.nrows() - 1).into_owned();
        Ok(jf * rows * l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::forms::Form;

    fn central_difference(s: &SingularSimplex, x: &[f64]) -> DMatrix<f64> {
        let h = 1e-6;
        let mut out = DMatrix::zeros(s.ambient(), x.len());
        for j in 0..x.len() {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[j] += h;
            minus[j] -= h;
            let (fp, fm) = (s.eval(&plus).unwrap(), s.eval(&minus).unwrap());
            for r in 0..s.ambient() {
                out[(r, j)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        out
    }

    /// A curved triangle glued onto a straight segment of its edge.
    fn sample() -> SingularSimplex {
        let h1 = SingularSimplex::parse(2, &["a1 + 0.1*a2^2", "a2 + 0.2*a1*a2"]).unwrap();
        // The edge (e_1, e_2) of h1 is {(1 - u + 0.1 u², u + 0.2(1-u)u)}; τ covers u ∈ [0.2, 0.6].
        let u = "(0.2 + 0.4*a1)";
        let h2 = SingularSimplex::from_exprs(
            1,
            vec![
                parse(&format!("1 - {u} + 0.1*{u}^2"), 1).unwrap(),
                parse(&format!("{u} + 0.2*(1 - {u})*{u}"), 1).unwrap(),
            ],
        )
        .unwrap();
        SingularSimplex::glued(GluedMap::new(h1, h2, 0).unwrap())
    }

    #[test]
    fn vertices_and_faces() {
        let g = sample();
        let v0 = g.eval(&[0.0, 0.0]).unwrap();
        assert!(v0[0].abs() < 1e-12 && v0[1].abs() < 1e-12);
        let w0 = g.eval(&[1.0, 0.0]).unwrap();
        let u: f64 = 0.2;
        assert!((w0[0] - (1.0 - u + 0.1 * u * u)).abs() < 1e-10);
        assert!((w0[1] - (u + 0.2 * (1.0 - u) * u)).abs() < 1e-10);
    }

    #[test]
    fn jacobian_matches_differences() {
        let g = sample();
        for x in [[0.2, 0.3], [0.5, 0.1], [0.05, 0.9]] {
            let j = g.jacobian(&x).unwrap();
            let fd = central_difference(&g, &x);
            assert!((j - fd).abs().max() < 1e-6, "{x:?}");
        }
    }

    #[test]
    fn limit_at_unshared_vertex() {
        let g = sample();
        let h1 = SingularSimplex::parse(2, &["a1 + 0.1*a2^2", "a2 + 0.2*a1*a2"]).unwrap();
        let base = h1.eval(&[0.0, 0.0]).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let a = (-(k as f64)).exp2();
            let p = g.eval(&[a * 0.5, a * 0.5]).unwrap();
            let dist = ((p[0] - base[0]).powi(2) + (p[1] - base[1]).powi(2)).sqrt();
            assert!(dist <= prev);
            prev = dist;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn stokes_holds_on_glued_simplex() {
        let g = sample();
        let w = Form::from_terms(1, 2, vec![(vec![1], parse("a1*a1", 2).unwrap())]).unwrap();
        let r = crate::stokes::stokes_residual(&g, &w, &crate::quad::QuadConfig::default(), 1e-6).unwrap();
        assert_eq!(r.verdict, crate::stokes::StokesVerdict::Pass, "{r:?}");
    }
}
