use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::expr::{parse, rational_to_f64, Expr, Rational};
use crate::glue::GluedMap;

use super::embedding::Embedding;
use super::prism::Prism;
use super::{ChainError, MapError};

/// Symbolic Jacobians larger than this fall back to the numeric chain rule.
const MAX_SYMBOLIC_SIZE: usize = 50_000;

/// Coordinates compared bitwise, so maps with float data can be hashed.
#[derive(Clone, Debug)]
pub struct PointKey(pub Vec<f64>);

impl PartialEq for PointKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Eq for PointKey {}

impl Hash for PointKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for x in &self.0 {
            x.to_bits().hash(state);
        }
    }
}

/// Affine simplex whose vertices are exact rational combinations of a list
/// of base points. Keeping the combinations exact makes subdivided and
/// face-restricted affine simplices compare equal when they coincide.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub points: Vec<PointKey>,
    /// `weights[k][j]` is the weight of `points[j]` in vertex `k`.
    pub weights: Vec<Vec<Rational>>,
}

impl AffineMap {
    fn canonical(points: Vec<PointKey>, weights: Vec<Vec<Rational>>) -> AffineMap {
        let used: Vec<usize> = (0..points.len())
            .filter(|&j| weights.iter().any(|w| !w[j].is_zero()))
            .collect();
        AffineMap {
            points: used.iter().map(|&j| points[j].clone()).collect(),
            weights: weights
                .iter()
                .map(|w| used.iter().map(|&j| w[j]).collect())
                .collect(),
        }
    }

    fn vertex_coords(&self) -> Vec<Vec<f64>> {
        let n = self.points.first().map_or(0, |p| p.0.len());
        self.weights
            .iter()
            .map(|w| {
                let mut v = vec![0.0; n];
                for (wj, p) in w.iter().zip(&self.points) {
                    if wj.is_one() {
                        for (vi, pi) in v.iter_mut().zip(&p.0) {
                            *vi += pi;
                        }
                    } else if !wj.is_zero() {
                        let c = rational_to_f64(*wj);
                        for (vi, pi) in v.iter_mut().zip(&p.0) {
                            *vi += c * pi;
                        }
                    }
                }
                v
            })
            .collect()
    }

    fn compose(&self, e: &Embedding) -> AffineMap {
        let d = e.target_dim();
        let weights = e
            .vertices()
            .iter()
            .map(|y| {
                let mut bary = Vec::with_capacity(d + 1);
                let total: Rational = y.iter().copied().fold(Rational::zero(), |a, b| a + b);
                bary.push(Rational::one() - total);
                bary.extend(y.iter().copied());
                let mut w = vec![Rational::zero(); self.points.len()];
                for (bk, wk) in bary.iter().zip(&self.weights) {
                    if bk.is_zero() {
                        continue;
                    }
                    for (acc, x) in w.iter_mut().zip(wk) {
                        *acc += bk * x;
                    }
                }
                w
            })
            .collect();
        AffineMap::canonical(self.points.clone(), weights)
    }
}

/// How a singular simplex is evaluated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SimplexKind {
    /// Component expressions in the simplex coordinates.
    Expr(Vec<Expr>),
    Affine(AffineMap),
    /// The cone over a simplex with apex at the origin, apex first.
    Cone(SingularSimplex),
    /// A prism map restricted to an affine cell of `[0,1] × Δ_d`.
    Prism(Prism, Embedding),
    /// A simplex precomposed with an affine map into its domain.
    Composed(SingularSimplex, Embedding),
    Glued(GluedMap),
}

#[derive(Debug)]
enum Jacobian {
    Symbolic(Vec<Vec<Expr>>),
    Constant(DMatrix<f64>),
    Numeric,
}

#[derive(Debug)]
struct Plan {
    symbolic: Option<Vec<Expr>>,
    jacobian: Jacobian,
    affine_vertices: Option<Vec<Vec<f64>>>,
}

struct Inner {
    dim: usize,
    ambient: usize,
    kind: SimplexKind,
    hash: u64,
    plan: OnceLock<Plan>,
}

/// A continuous map `Δ_d → R^N`, C¹ on the open faces of `Δ_d`.
///
/// Cheap to clone. Equality and hashing are structural: two simplices are
/// equal when their evaluator descriptions agree, which is what chain
/// arithmetic merges on.
#[derive(Clone)]
pub struct SingularSimplex(Arc<Inner>);

impl PartialEq for SingularSimplex {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash
                && self.0.dim == other.0.dim
                && self.0.ambient == other.0.ambient
                && self.0.kind == other.0.kind)
    }
}

impl Eq for SingularSimplex {}

impl Hash for SingularSimplex {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for SingularSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            SimplexKind::Expr(c) => {
                let parts: Vec<String> = c.iter().map(ToString::to_string).collect();
                write!(f, "Expr[{}]({})", self.0.dim, parts.join(", "))
            }
            SimplexKind::Affine(a) => {
                write!(f, "Affine{:?}", a.vertex_coords())
            }
            SimplexKind::Cone(s) => write!(f, "Cone({s:?})"),
            SimplexKind::Prism(p, e) => write!(f, "Prism({:?}, {}) ∘ {e:?}", p.base(), p.profile()),
            SimplexKind::Composed(s, e) => write!(f, "{s:?} ∘ {e:?}"),
            SimplexKind::Glued(g) => write!(f, "{g:?}"),
        }
    }
}

impl SingularSimplex {
    fn make(dim: usize, ambient: usize, kind: SimplexKind) -> SingularSimplex {
        let mut hasher = DefaultHasher::new();
        dim.hash(&mut hasher);
        ambient.hash(&mut hasher);
        kind.hash(&mut hasher);
        SingularSimplex(Arc::new(Inner {
            dim,
            ambient,
            kind,
            hash: hasher.finish(),
            plan: OnceLock::new(),
        }))
    }

    /// Simplex with the given component expressions in `dim` variables.
    pub fn from_exprs(dim: usize, components: Vec<Expr>) -> Result<SingularSimplex, ChainError> {
        if let Some(e) = components.iter().find(|e| e.min_arity() > dim) {
            return Err(ChainError::Shape(format!(
                "component `{e}` uses a variable beyond dimension {dim}"
            )));
        }
        let ambient = components.len();
        Ok(SingularSimplex::make(dim, ambient, SimplexKind::Expr(components)))
    }

    /// Parses each component with arity `dim`.
    pub fn parse(dim: usize, components: &[&str]) -> Result<SingularSimplex, ChainError> {
        let exprs = components
            .iter()
            .map(|c| parse(c, dim))
            .collect::<Result<Vec<_>, _>>()?;
        SingularSimplex::from_exprs(dim, exprs)
    }

    /// Affine simplex with vertex `k` at `points[k]`.
    pub fn affine(points: Vec<Vec<f64>>) -> Result<SingularSimplex, ChainError> {
        let n = points.first().map_or(0, Vec::len);
        if points.is_empty() || points.iter().any(|p| p.len() != n) {
            return Err(ChainError::Shape("affine simplex needs points of equal length".into()));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(ChainError::Shape("affine simplex coordinates must be finite".into()));
        }
        let k = points.len();
        let weights = (0..k)
            .map(|i| (0..k).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        let map = AffineMap {
            points: points.into_iter().map(PointKey).collect(),
            weights,
        };
        Ok(SingularSimplex::make(k - 1, n, SimplexKind::Affine(map)))
    }

    /// Affine simplex whose vertex `k` is `Σ_j weights[k][j]·points[j]`.
    pub fn affine_combination(points: Vec<Vec<f64>>, weights: Vec<Vec<Rational>>) -> Result<SingularSimplex, ChainError> {
        let n = points.first().map_or(0, Vec::len);
        if points.is_empty() || points.iter().any(|p| p.len() != n) || points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(ChainError::Shape("affine simplex needs finite points of equal length".into()));
        }
        if weights.is_empty() || weights.iter().any(|w| w.len() != points.len()) {
            return Err(ChainError::Shape("each affine vertex needs one weight per point".into()));
        }
        if weights.iter().any(|w| w.iter().copied().fold(Rational::zero(), |a, b| a + b) != Rational::one()) {
            return Err(ChainError::Shape("affine weights must sum to 1".into()));
        }
        let dim = weights.len() - 1;
        let map = AffineMap::canonical(points.into_iter().map(PointKey).collect(), weights);
        Ok(SingularSimplex::make(dim, n, SimplexKind::Affine(map)))
    }

    pub fn point(p: Vec<f64>) -> Result<SingularSimplex, ChainError> {
        SingularSimplex::affine(vec![p])
    }

    /// The identity map of `Δ_d` into `R^d`.
    pub fn identity(d: usize) -> SingularSimplex {
        SingularSimplex::from_exprs(d, (0..d).map(Expr::Var).collect()).expect("identity components are in range")
    }

    pub(crate) fn prism_piece(prism: Prism, e: Embedding) -> SingularSimplex {
        let dim = e.domain_dim();
        let ambient = prism.base().ambient();
        SingularSimplex::make(dim, ambient, SimplexKind::Prism(prism, e))
    }

    /// Simplex evaluated by the gluing interpolation.
    pub fn glued(map: GluedMap) -> SingularSimplex {
        let (dim, ambient) = (map.dim(), map.ambient());
        SingularSimplex::make(dim, ambient, SimplexKind::Glued(map))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn ambient(&self) -> usize {
        self.0.ambient
    }

    pub fn kind(&self) -> &SimplexKind {
        &self.0.kind
    }

    /// The cone `ĥσ(a_0, …, a_d) = A·σ(a_1/A, …, a_d/A)` with `A = Σ a_i`,
    /// and `ĥσ = 0` where `A = 0`. The apex is vertex 0 and vertex `j` of
    /// `σ` becomes vertex `j + 1`.
    pub fn cone(&self) -> SingularSimplex {
        SingularSimplex::make(self.dim() + 1, self.ambient(), SimplexKind::Cone(self.clone()))
    }

    /// `σ ∘ e` for an affine `e: Δ_k → Δ_d`.
    ///
    /// Results are normalised so that equal maps built along different
    /// routes compare equal: nested compositions collapse, affine maps stay
    /// affine, and faces of cones through the apex are cones of faces.
    pub fn compose(&self, e: &Embedding) -> Result<SingularSimplex, ChainError> {
        if e.target_dim() != self.dim() {
            return Err(ChainError::Shape(format!(
                "cannot precompose a {}-simplex with an embedding into Δ_{}",
                self.dim(),
                e.target_dim()
            )));
        }
        if e.is_identity() {
            return Ok(self.clone());
        }
        let k = e.domain_dim();
        let out = match &self.0.kind {
            SimplexKind::Composed(inner, first) => return inner.compose(&first.compose(e)),
            SimplexKind::Affine(a) => SingularSimplex::make(k, self.ambient(), SimplexKind::Affine(a.compose(e))),
            SimplexKind::Prism(p, first) => SingularSimplex::prism_piece(p.clone(), first.compose(e)),
            SimplexKind::Cone(inner) => match cone_face(inner, e) {
                Some(s) => return Ok(s),
                None => SingularSimplex::make(k, self.ambient(), SimplexKind::Composed(self.clone(), e.clone())),
            },
            _ => SingularSimplex::make(k, self.ambient(), SimplexKind::Composed(self.clone(), e.clone())),
        };
        Ok(out)
    }

    /// `σ ∘ F_i`, the face opposite vertex `i`.
    pub fn face(&self, i: usize) -> Result<SingularSimplex, ChainError> {
        self.compose(&Embedding::face(self.dim(), i)?)
    }

    /// True when some evaluator may have unbounded derivatives near the
    /// boundary of its domain.
    pub fn may_be_singular(&self) -> bool {
        match &self.0.kind {
            SimplexKind::Expr(c) => c.iter().any(Expr::may_be_singular),
            SimplexKind::Affine(_) => false,
            SimplexKind::Cone(s) | SimplexKind::Composed(s, _) => s.may_be_singular(),
            SimplexKind::Prism(p, _) => p.base().may_be_singular() || p.profile().may_be_singular(),
            SimplexKind::Glued(g) => g.may_be_singular(),
        }
    }

    /// Value at the point `a` of `Δ_d`.
    pub fn eval(&self, a: &[f64]) -> Result<Vec<f64>, MapError> {
        if a.len() != self.dim() {
            return Err(MapError::Arity {
                expected: self.dim(),
                found: a.len(),
            });
        }
        match &self.0.kind {
            SimplexKind::Expr(c) => Ok(c.iter().map(|e| e.eval(a)).collect::<Result<Vec<_>, _>>()?),
            SimplexKind::Affine(_) => {
                let vertices = self.plan().affine_vertices.as_ref().expect("affine plan");
                let mut out = vertices[0].clone();
                for (ai, v) in a.iter().zip(&vertices[1..]) {
                    for j in 0..out.len() {
                        out[j] += ai * (v[j] - vertices[0][j]);
                    }
                }
                Ok(out)
            }
            SimplexKind::Cone(s) => {
                let total: f64 = a.iter().sum();
                if total == 0.0 {
                    return Ok(vec![0.0; self.ambient()]);
                }
                let y: Vec<f64> = a[1..].iter().map(|x| (x / total).clamp(0.0, 1.0)).collect();
                Ok(s.eval(&y)?.into_iter().map(|v| v * total).collect())
            }
            SimplexKind::Composed(s, e) => s.eval(&clamped(e.apply(a))),
            SimplexKind::Prism(p, e) => {
                let tb = clamped(e.apply(a));
                p.eval(tb[0], &tb[1..])
            }
            SimplexKind::Glued(g) => g.eval(a),
        }
    }

    /// Jacobian `∂σ_j/∂a_i` as an `N × d` matrix.
    pub fn jacobian(&self, a: &[f64]) -> Result<DMatrix<f64>, MapError> {
        if a.len() != self.dim() {
            return Err(MapError::Arity {
                expected: self.dim(),
                found: a.len(),
            });
        }
        let (n, d) = (self.ambient(), self.dim());
        let jac = match &self.plan().jacobian {
            Jacobian::Constant(m) => return Ok(m.clone()),
            Jacobian::Symbolic(rows) => {
                let mut m = DMatrix::zeros(n, d);
                let mut failed = None;
                'rows: for (j, row) in rows.iter().enumerate() {
                    for (i, e) in row.iter().enumerate() {
                        match e.eval(a) {
                            Ok(v) if v.is_finite() => m[(j, i)] = v,
                            other => {
                                failed = Some(other.err());
                                break 'rows;
                            }
                        }
                    }
                }
                match failed {
                    None => m,
                    Some(_) if matches!(self.0.kind, SimplexKind::Cone(_)) && strictly_inside(a) => {
                        self.numeric_jacobian(a)?
                    }
                    Some(Some(e)) => return Err(e.into()),
                    Some(None) => return Err(MapError::NonFinite(format!("{self:?}"))),
                }
            }
            Jacobian::Numeric => self.numeric_jacobian(a)?,
        };
        if jac.iter().any(|x| !x.is_finite()) {
            return Err(MapError::NonFinite(format!("{self:?}")));
        }
        Ok(jac)
    }

    fn numeric_jacobian(&self, a: &[f64]) -> Result<DMatrix<f64>, MapError> {
        let (n, d) = (self.ambient(), self.dim());
        match &self.0.kind {
            SimplexKind::Cone(s) => {
                let total: f64 = a.iter().sum();
                let mut y: Vec<f64> = a[1..].iter().map(|x| x / total).collect();
                // Near the sides through the apex `y` can round onto ∂Δ even
                // though `a` is interior; step back inside by a few ulps.
                if strictly_inside(a) && !strictly_inside(&y) {
                    let delta = 8.0 * f64::EPSILON;
                    let centre = 1.0 / (y.len() as f64 + 1.0);
                    y.iter_mut().for_each(|x| *x = (1.0 - delta) * x.clamp(0.0, 1.0) + delta * centre);
                }
                let value = s.eval(&y)?;
                let js = s.jacobian(&y)?;
                let js_y = &js * nalgebra::DVector::from_column_slice(&y);
                let mut m = DMatrix::zeros(n, d);
                for r in 0..n {
                    let base = value[r] - js_y[r];
                    m[(r, 0)] = base;
                    for j in 1..d {
                        m[(r, j)] = base + js[(r, j - 1)];
                    }
                }
                Ok(m)
            }
            SimplexKind::Composed(s, e) => Ok(s.jacobian(&clamped(e.apply(a)))? * e.linear_part()),
            SimplexKind::Prism(p, e) => {
                let tb = clamped(e.apply(a));
                Ok(p.jacobian(tb[0], &tb[1..])? * e.linear_part())
            }
            SimplexKind::Glued(g) => g.jacobian(a),
            SimplexKind::Expr(_) | SimplexKind::Affine(_) => unreachable!("planned symbolically"),
        }
    }

    /// Component expressions of the whole map, when every ingredient is
    /// symbolic.
    pub fn symbolic(&self) -> Option<&[Expr]> {
        self.plan().symbolic.as_deref()
    }

    fn plan(&self) -> &Plan {
        self.0.plan.get_or_init(|| self.build_plan())
    }

    fn build_plan(&self) -> Plan {
        let (n, d) = (self.ambient(), self.dim());
        if let SimplexKind::Affine(a) = &self.0.kind {
            let vertices = a.vertex_coords();
            let m = DMatrix::from_fn(n, d, |j, i| vertices[i + 1][j] - vertices[0][j]);
            return Plan {
                symbolic: None,
                jacobian: Jacobian::Constant(m),
                affine_vertices: Some(vertices),
            };
        }
        let symbolic = self.flatten();
        let jacobian = match &symbolic {
            Some(comps) => {
                let rows: Vec<Vec<Expr>> = comps.iter().map(|c| (0..d).map(|i| c.diff(i)).collect()).collect();
                let size: usize = rows.iter().flatten().map(Expr::size).sum();
                if size <= MAX_SYMBOLIC_SIZE {
                    Jacobian::Symbolic(rows)
                } else {
                    Jacobian::Numeric
                }
            }
            None => Jacobian::Numeric,
        };
        Plan {
            symbolic,
            jacobian,
            affine_vertices: None,
        }
    }

    fn flatten(&self) -> Option<Vec<Expr>> {
        let out = match &self.0.kind {
            SimplexKind::Expr(c) => c.clone(),
            SimplexKind::Affine(_) | SimplexKind::Glued(_) => return None,
            SimplexKind::Composed(s, e) => {
                let inner = s.symbolic()?;
                let sub = e.to_exprs();
                inner.iter().map(|c| c.substitute(&sub)).collect()
            }
            SimplexKind::Cone(s) => {
                let inner = s.symbolic()?;
                let total = Expr::sum((0..=s.dim()).map(Expr::Var));
                let sub: Vec<Expr> = (1..=s.dim()).map(|i| Expr::div(Expr::Var(i), total.clone())).collect();
                inner
                    .iter()
                    .map(|c| Expr::mul(total.clone(), c.substitute(&sub)))
                    .collect()
            }
            SimplexKind::Prism(p, e) => {
                let inner = p.base().symbolic()?;
                let tb = e.to_exprs();
                let f = p.profile().substitute(&tb[..1]);
                inner
                    .iter()
                    .map(|c| Expr::mul(f.clone(), c.substitute(&tb[1..])))
                    .collect()
            }
        };
        (out.iter().map(Expr::size).sum::<usize>() <= MAX_SYMBOLIC_SIZE).then_some(out)
    }

    /// Spot check of continuity at the vertices: approaches each vertex from
    /// the barycenter along `2^-k` offsets and returns the largest distance
    /// from the vertex value at the finest level. A validation, not a proof.
    pub fn continuity_gap(&self, levels: u32) -> Result<f64, MapError> {
        let d = self.dim();
        let center = vec![1.0 / (d as f64 + 1.0); d];
        let mut worst: f64 = 0.0;
        for j in 0..=d {
            let vertex: Vec<f64> = (0..d).map(|i| if i + 1 == j { 1.0 } else { 0.0 }).collect();
            let at_vertex = self.eval(&vertex)?;
            let h = 0.5f64.powi(levels as i32);
            let p: Vec<f64> = vertex.iter().zip(&center).map(|(v, c)| v + h * (c - v)).collect();
            let near = self.eval(&p)?;
            let gap = at_vertex
                .iter()
                .zip(&near)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            worst = worst.max(gap);
        }
        Ok(worst)
    }
}

/// `a` lies in the open simplex.
fn strictly_inside(a: &[f64]) -> bool {
    a.iter().all(|&x| x > 0.0) && a.iter().sum::<f64>() < 1.0
}

fn clamped(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        if *x < 0.0 && *x > -1e-14 {
            *x = 0.0;
        }
    }
    v
}

/// Rewrites `ĥσ ∘ e` for a vertex embedding `e` into `Δ_{d+1}`: if the apex
/// is the first image it is the cone over a face of `σ`, and if the apex is
/// not hit it is a face of `σ` itself.
fn cone_face(inner: &SingularSimplex, e: &Embedding) -> Option<SingularSimplex> {
    let indices = e.vertex_indices()?;
    let d = inner.dim();
    let mut seen = vec![false; d + 2];
    for &j in &indices {
        if std::mem::replace(&mut seen[j], true) {
            return None;
        }
    }
    if indices[0] == 0 {
        let rest: Vec<usize> = indices[1..].iter().map(|j| j - 1).collect();
        if rest.is_empty() {
            return SingularSimplex::point(vec![0.0; inner.ambient()]).ok();
        }
        let face = inner.compose(&Embedding::from_vertex_indices(d, &rest)).ok()?;
        Some(face.cone())
    } else if indices.iter().all(|&j| j > 0) {
        let rest: Vec<usize> = indices.iter().map(|j| j - 1).collect();
        inner.compose(&Embedding::from_vertex_indices(d, &rest)).ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_boundary_is_structural() {
        let s = SingularSimplex::affine(vec![vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(s.face(0).unwrap(), SingularSimplex::point(vec![2.0, 3.0]).unwrap());
        assert_eq!(s.face(1).unwrap(), SingularSimplex::point(vec![0.0, 1.0]).unwrap());
    }

    #[test]
    fn cone_of_point_is_segment() {
        let p = SingularSimplex::point(vec![1.0, 2.0]).unwrap();
        let c = p.cone();
        assert_eq!(c.eval(&[0.25]).unwrap(), vec![0.25, 0.5]);
        assert_eq!(c.eval(&[0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn cone_of_identity_interval() {
        let c = SingularSimplex::identity(1).cone();
        assert_eq!(c.eval(&[0.2, 0.3]).unwrap(), vec![0.3]);
    }

    #[test]
    fn cone_faces_normalise() {
        let s = SingularSimplex::parse(1, &["a1^2", "sin(a1)"]).unwrap();
        let c = s.cone();
        assert_eq!(c.face(0).unwrap(), s);
        assert_eq!(c.face(1).unwrap(), s.face(0).unwrap().cone());
        assert_eq!(c.face(2).unwrap(), s.face(1).unwrap().cone());
    }

    #[test]
    fn singular_face_jacobian_is_finite() {
        let s = SingularSimplex::parse(2, &["a1", "sqrt(a2) * a1"]).unwrap();
        let face = s.face(2).unwrap();
        let j = face.jacobian(&[0.5]).unwrap();
        assert_eq!(j[(0, 0)], 1.0);
        assert_eq!(j[(1, 0)], 0.0);
    }

    #[test]
    fn cone_jacobian_matches_differences() {
        let s = SingularSimplex::affine(vec![vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let c = s.cone();
        let x = [0.2, 0.3];
        let j = c.jacobian(&x).unwrap();
        let h = 1e-7;
        for i in 0..2 {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += h;
            m[i] -= h;
            let (vp, vm) = (c.eval(&p).unwrap(), c.eval(&m).unwrap());
            for r in 0..2 {
                assert!((j[(r, i)] - (vp[r] - vm[r]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn continuity_gap_of_square_root() {
        let s = SingularSimplex::parse(1, &["a1", "sqrt(a1)"]).unwrap();
        let gap = s.continuity_gap(20).unwrap();
        assert!(gap < 1e-3 && gap > 0.0);
    }
}
