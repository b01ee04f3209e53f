//! The manifest format: named simplices, chains, forms, complexes and
//! triangulations, with their resolution into library objects and the
//! reverse direction for emitted results.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use periodlab_core::chains::{Chain, Embedding, Prism, SimplexKind, SingularSimplex};
use periodlab_core::expr::{parse, Rational};
use periodlab_core::forms::Form;
use periodlab_core::glue::{Cell, GlueInput, GluedMap, Triangulation};
use periodlab_core::homology::SimplicialComplex;
use periodlab_core::stokes::OrientedCell;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "periodlab/1";

/// A problem with the input, located by a JSON pointer into the manifest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    pub pointer: String,
    pub message: String,
}

impl InputError {
    pub fn new(pointer: impl Into<String>, message: impl fmt::Display) -> InputError {
        InputError {
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "at {}: {}", self.pointer, self.message)
        }
    }
}

impl std::error::Error for InputError {}

/// Vertex label of a complex: an integer or a string. Integers sort first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Name(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: String,
    pub ambient_dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub simplices: Vec<SimplexSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chains: Vec<ChainSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forms: Vec<FormSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub complexes: Vec<ComplexSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triangulations: Vec<TriangulationSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub identifications: Vec<IdentificationSpec>,
}

/// A named simplex: component expressions, the vertices of an affine
/// simplex, or a structural map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
}

/// Structural description of a simplex map. Rational numbers are strings
/// such as `"1/3"`; embedding vertices are points of the target simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// A simplex defined earlier in the manifest.
    Ref(String),
    Expr {
        dim: usize,
        components: Vec<String>,
    },
    /// Vertex `k` is `Σ_j weights[k][j]·points[j]`.
    Affine {
        points: Vec<Vec<f64>>,
        weights: Vec<Vec<String>>,
    },
    /// The cone with apex at the origin.
    Cone(Box<MapSpec>),
    /// `map ∘ e` for the affine embedding `e` with the given vertices.
    Compose {
        map: Box<MapSpec>,
        vertices: Vec<Vec<String>>,
    },
    /// `(t, b) ↦ profile(t)·base(b)` restricted to the cell of `[0,1] × Δ_d`.
    Prism {
        base: Box<MapSpec>,
        profile: String,
        cell: Vec<Vec<String>>,
    },
    /// The gluing interpolation between `h1` on `Δ_m` and `h2`.
    Glued {
        h1: Box<MapSpec>,
        h2: Box<MapSpec>,
        m: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub name: String,
    /// Required only for the empty chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub terms: Vec<ChainTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainTerm {
    pub simplex: String,
    pub coeff: i64,
}

/// A form `Σ coeff · dx_{indices}` with 1-based indices, or the exterior
/// derivative of an earlier form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<FormTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_of: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormTerm {
    pub indices: Vec<usize>,
    pub coeff: String,
}

/// A simplicial complex given by generating simplices. `vertices` may list
/// extra isolated vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Label>>,
    pub simplices: Vec<Vec<Label>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulationSpec {
    pub name: String,
    pub complex: String,
    pub evaluators: Vec<EvaluatorSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub marks: BTreeMap<String, Vec<Vec<Label>>>,
}

/// Evaluator of a maximal simplex. Vertex `i` of the map goes to
/// `simplex[i]`; `orientation` is the sign of the cell in the fundamental
/// chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluatorSpec {
    pub simplex: Vec<Label>,
    pub map: MapSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<i64>,
}

/// An explicit gluing of `t1` onto `t2`: both carry a `B` mark, and each
/// shared vertex of `t2` names its carrier simplex in `t1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentificationSpec {
    pub t1: String,
    pub t2: String,
    pub carriers: Vec<CarrierSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSpec {
    pub vertex: Label,
    pub simplex: Vec<Label>,
}

/// A complex whose vertices `0..n` stand for the sorted labels.
#[derive(Clone, Debug)]
pub struct LabelledComplex {
    pub labels: Vec<Label>,
    pub complex: SimplicialComplex,
}

impl LabelledComplex {
    fn index(&self, label: &Label) -> Option<usize> {
        self.labels.binary_search(label).ok()
    }
}

#[derive(Clone, Debug)]
pub struct LabelledTriangulation {
    pub labels: Vec<Label>,
    pub triangulation: Triangulation,
    /// The evaluators in the order and orientation given in the manifest.
    pub oriented: Vec<OrientedCell>,
}

/// A manifest with every name resolved.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub ambient: usize,
    pub simplices: BTreeMap<String, SingularSimplex>,
    pub chains: BTreeMap<String, Chain>,
    pub forms: BTreeMap<String, Form>,
    pub complexes: BTreeMap<String, LabelledComplex>,
    pub triangulations: BTreeMap<String, LabelledTriangulation>,
    pub identifications: Vec<(String, String, GlueInput)>,
}

impl Resolved {
    pub fn simplex(&self, name: &str) -> Result<&SingularSimplex, InputError> {
        self.simplices
            .get(name)
            .ok_or_else(|| InputError::new("", format!("no simplex named `{name}`")))
    }

    pub fn chain(&self, name: &str) -> Result<&Chain, InputError> {
        self.chains
            .get(name)
            .ok_or_else(|| InputError::new("", format!("no chain named `{name}`")))
    }

    pub fn form(&self, name: &str) -> Result<&Form, InputError> {
        self.forms
            .get(name)
            .ok_or_else(|| InputError::new("", format!("no form named `{name}`")))
    }

    pub fn complex(&self, name: &str) -> Result<&LabelledComplex, InputError> {
        self.complexes
            .get(name)
            .ok_or_else(|| InputError::new("", format!("no complex named `{name}`")))
    }

    pub fn triangulation(&self, name: &str) -> Result<&LabelledTriangulation, InputError> {
        self.triangulations
            .get(name)
            .ok_or_else(|| InputError::new("", format!("no triangulation named `{name}`")))
    }

    /// A simplex or a chain of that name, as a chain.
    pub fn chain_or_simplex(&self, name: &str) -> Result<Chain, InputError> {
        if let Some(c) = self.chains.get(name) {
            return Ok(c.clone());
        }
        if let Some(s) = self.simplices.get(name) {
            return Ok(Chain::from_simplex(s.clone()));
        }
        Err(InputError::new("", format!("no chain or simplex named `{name}`")))
    }
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out += &format!("/{index}"),
            Segment::Map { key } => out += &format!("/{}", escape(key)),
            Segment::Enum { variant } => out += &format!("/{}", escape(variant)),
            Segment::Unknown => {}
        }
    }
    out
}

/// Parses manifest text, reporting schema violations with JSON pointers.
pub fn parse_manifest(text: &str) -> Result<Manifest, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let manifest: Manifest = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        InputError::new(pointer, e.into_inner())
    })?;
    if manifest.schema != SCHEMA {
        return Err(InputError::new(
            "/schema",
            format!("unsupported schema `{}`, expected `{SCHEMA}`", manifest.schema),
        ));
    }
    Ok(manifest)
}

pub fn load(path: &Path) -> Result<Resolved, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError::new("", format!("cannot read {}: {e}", path.display())))?;
    resolve(&parse_manifest(&text)?)
}

fn rational(text: &str, at: &str) -> Result<Rational, InputError> {
    Rational::from_str(text.trim()).map_err(|_| InputError::new(at, format!("`{text}` is not a rational number")))
}

fn rationals(rows: &[Vec<String>], at: &str) -> Result<Vec<Vec<Rational>>, InputError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| rational(x, &format!("{at}/{i}/{j}")))
                .collect()
        })
        .collect()
}

fn embedding(rows: &[Vec<String>], at: &str) -> Result<Embedding, InputError> {
    Embedding::new(rationals(rows, at)?).map_err(|e| InputError::new(at, e))
}

fn check_unique<'a>(names: impl Iterator<Item = &'a str>, at: &str) -> Result<(), InputError> {
    let mut seen = BTreeSet::new();
    for (i, n) in names.enumerate() {
        if !seen.insert(n) {
            return Err(InputError::new(format!("{at}/{i}/name"), format!("duplicate name `{n}`")));
        }
    }
    Ok(())
}

fn build_map(spec: &MapSpec, known: &BTreeMap<String, SingularSimplex>, at: &str) -> Result<SingularSimplex, InputError> {
    let err = |e: &dyn fmt::Display| InputError::new(at, e);
    match spec {
        MapSpec::Ref(name) => known
            .get(name)
            .cloned()
            .ok_or_else(|| InputError::new(format!("{at}/ref"), format!("unknown simplex `{name}` (simplices must be defined before use)"))),
        MapSpec::Expr { dim, components } => {
            let exprs = components
                .iter()
                .enumerate()
                .map(|(i, c)| parse(c, *dim).map_err(|e| InputError::new(format!("{at}/expr/components/{i}"), e)))
                .collect::<Result<Vec<_>, _>>()?;
            SingularSimplex::from_exprs(*dim, exprs).map_err(|e| err(&e))
        }
        MapSpec::Affine { points, weights } => {
            let w = rationals(weights, &format!("{at}/affine/weights"))?;
            SingularSimplex::affine_combination(points.clone(), w).map_err(|e| err(&e))
        }
        MapSpec::Cone(inner) => Ok(build_map(inner, known, &format!("{at}/cone"))?.cone()),
        MapSpec::Compose { map, vertices } => {
            let s = build_map(map, known, &format!("{at}/compose/map"))?;
            let e = embedding(vertices, &format!("{at}/compose/vertices"))?;
            s.compose(&e).map_err(|e| err(&e))
        }
        MapSpec::Prism { base, profile, cell } => {
            let base = build_map(base, known, &format!("{at}/prism/base"))?;
            let profile = parse(profile, 1).map_err(|e| InputError::new(format!("{at}/prism/profile"), e))?;
            let e = embedding(cell, &format!("{at}/prism/cell"))?;
            Prism::new(base, profile)
                .and_then(|p| p.piece(e))
                .map_err(|e| err(&e))
        }
        MapSpec::Glued { h1, h2, m } => {
            let h1 = build_map(h1, known, &format!("{at}/glued/h1"))?;
            let h2 = build_map(h2, known, &format!("{at}/glued/h2"))?;
            GluedMap::new(h1, h2, *m)
                .map(SingularSimplex::glued)
                .map_err(|e| err(&e))
        }
    }
}

fn build_simplex(spec: &SimplexSpec, known: &BTreeMap<String, SingularSimplex>, at: &str) -> Result<SingularSimplex, InputError> {
    match (&spec.components, &spec.vertices, &spec.map) {
        (Some(components), None, None) => {
            let dim = spec
                .dim
                .ok_or_else(|| InputError::new(format!("{at}/dim"), "component simplices need `dim`"))?;
            let map = MapSpec::Expr {
                dim,
                components: components.clone(),
            };
            build_map(&map, known, at).map_err(|e| InputError::new(e.pointer.replace("/expr/", "/"), e.message))
        }
        (None, Some(vertices), None) => {
            let s = SingularSimplex::affine(vertices.clone()).map_err(|e| InputError::new(format!("{at}/vertices"), e))?;
            if spec.dim.is_some_and(|d| d != s.dim()) {
                return Err(InputError::new(format!("{at}/dim"), format!("{} vertices span a {}-simplex", vertices.len(), s.dim())));
            }
            Ok(s)
        }
        (None, None, Some(map)) => {
            let s = build_map(map, known, &format!("{at}/map"))?;
            if spec.dim.is_some_and(|d| d != s.dim()) {
                return Err(InputError::new(format!("{at}/dim"), format!("the map is a {}-simplex", s.dim())));
            }
            Ok(s)
        }
        _ => Err(InputError::new(at, "a simplex needs exactly one of `components`, `vertices` or `map`")),
    }
}

fn build_form(spec: &FormSpec, known: &BTreeMap<String, Form>, ambient: usize, at: &str) -> Result<Form, InputError> {
    if let Some(base) = &spec.derivative_of {
        if !spec.terms.is_empty() {
            return Err(InputError::new(format!("{at}/terms"), "a derivative form takes no terms"));
        }
        let f = known
            .get(base)
            .ok_or_else(|| InputError::new(format!("{at}/derivative_of"), format!("unknown form `{base}` (forms must be defined before use)")))?;
        let df = f.exterior_derivative();
        if spec.degree.is_some_and(|d| d != df.degree()) {
            return Err(InputError::new(format!("{at}/degree"), format!("the derivative has degree {}", df.degree())));
        }
        return Ok(df);
    }
    let degree = spec
        .degree
        .ok_or_else(|| InputError::new(format!("{at}/degree"), "missing `degree`"))?;
    let mut form = Form::zero(degree, ambient);
    for (i, term) in spec.terms.iter().enumerate() {
        let here = format!("{at}/terms/{i}");
        if term.indices.len() != degree {
            return Err(InputError::new(format!("{here}/indices"), format!("a {degree}-form term needs {degree} indices")));
        }
        let mut indices = Vec::with_capacity(degree);
        for (j, &k) in term.indices.iter().enumerate() {
            if k == 0 || k > ambient {
                return Err(InputError::new(format!("{here}/indices/{j}"), format!("index {k} is outside 1..={ambient}")));
            }
            indices.push(k - 1);
        }
        let h = parse(&term.coeff, ambient).map_err(|e| InputError::new(format!("{here}/coeff"), e))?;
        form.add_term(indices, h).map_err(|e| InputError::new(&here, e))?;
    }
    Ok(form)
}

fn build_complex(spec: &ComplexSpec, at: &str) -> Result<LabelledComplex, InputError> {
    let mut labels: BTreeSet<Label> = spec.simplices.iter().flatten().cloned().collect();
    if let Some(vs) = &spec.vertices {
        labels.extend(vs.iter().cloned());
    }
    let labels: Vec<Label> = labels.into_iter().collect();
    let lookup = |l: &Label| labels.binary_search(l).expect("label collected above");
    let simplices = spec
        .simplices
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut v: Vec<usize> = s.iter().map(lookup).collect();
            v.sort_unstable();
            if v.windows(2).any(|w| w[0] == w[1]) {
                return Err(InputError::new(format!("{at}/simplices/{i}"), "repeated vertex"));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let complex = SimplicialComplex::new(labels.len(), simplices).map_err(|e| InputError::new(format!("{at}/simplices"), e))?;
    Ok(LabelledComplex { labels, complex })
}

fn indices_of(c: &LabelledComplex, labels: &[Label], at: &str) -> Result<Vec<usize>, InputError> {
    labels
        .iter()
        .enumerate()
        .map(|(j, l)| c.index(l).ok_or_else(|| InputError::new(format!("{at}/{j}"), format!("vertex `{l}` is not in the complex"))))
        .collect()
}

fn build_triangulation(
    spec: &TriangulationSpec,
    complexes: &BTreeMap<String, LabelledComplex>,
    simplices: &BTreeMap<String, SingularSimplex>,
    at: &str,
) -> Result<LabelledTriangulation, InputError> {
    let lc = complexes
        .get(&spec.complex)
        .ok_or_else(|| InputError::new(format!("{at}/complex"), format!("unknown complex `{}`", spec.complex)))?;
    let mut cells = Vec::with_capacity(spec.evaluators.len());
    let mut oriented = Vec::with_capacity(spec.evaluators.len());
    for (i, ev) in spec.evaluators.iter().enumerate() {
        let here = format!("{at}/evaluators/{i}");
        let given = indices_of(lc, &ev.simplex, &format!("{here}/simplex"))?;
        let map = build_map(&ev.map, simplices, &format!("{here}/map"))?;
        if map.dim() + 1 != given.len() {
            return Err(InputError::new(
                format!("{here}/map"),
                format!("a {}-simplex cannot evaluate a simplex with {} vertices", map.dim(), given.len()),
            ));
        }
        let mut sorted = given.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(InputError::new(format!("{here}/simplex"), "repeated vertex"));
        }
        let order: Vec<usize> = sorted
            .iter()
            .map(|v| given.iter().position(|u| u == v).expect("same vertex set"))
            .collect();
        let cell_map = map
            .compose(&Embedding::from_vertex_indices(map.dim(), &order))
            .map_err(|e| InputError::new(&here, e))?;
        let sign = match ev.orientation {
            None => 1,
            Some(s @ (1 | -1)) => s,
            Some(s) => return Err(InputError::new(format!("{here}/orientation"), format!("orientation must be 1 or -1, got {s}"))),
        };
        cells.push(Cell {
            vertices: sorted,
            map: cell_map,
            chart: ev.chart.clone(),
        });
        oriented.push(OrientedCell {
            vertices: given,
            map,
            sign,
        });
    }
    let mut marks = BTreeMap::new();
    for (name, list) in &spec.marks {
        let mut set = BTreeSet::new();
        for (i, s) in list.iter().enumerate() {
            let mut v = indices_of(lc, s, &format!("{at}/marks/{}/{i}", escape(name)))?;
            v.sort_unstable();
            set.insert(v);
        }
        marks.insert(name.clone(), set);
    }
    let triangulation =
        Triangulation::new(lc.labels.len(), cells, marks).map_err(|e| InputError::new(format!("{at}/evaluators"), e))?;
    if triangulation.complex().maximal_simplices() != lc.complex.maximal_simplices() {
        return Err(InputError::new(
            format!("{at}/evaluators"),
            format!("evaluators do not cover the maximal simplices of `{}` exactly", spec.complex),
        ));
    }
    Ok(LabelledTriangulation {
        labels: lc.labels.clone(),
        triangulation,
        oriented,
    })
}

fn build_identification(
    spec: &IdentificationSpec,
    triangulations: &BTreeMap<String, LabelledTriangulation>,
    at: &str,
) -> Result<GlueInput, InputError> {
    let get = |name: &str, field: &str| {
        triangulations
            .get(name)
            .ok_or_else(|| InputError::new(format!("{at}/{field}"), format!("unknown triangulation `{name}`")))
    };
    let (t1, t2) = (get(&spec.t1, "t1")?, get(&spec.t2, "t2")?);
    let find = |t: &LabelledTriangulation, l: &Label, here: String| {
        t.labels
            .binary_search(l)
            .map_err(|_| InputError::new(here, format!("vertex `{l}` is not in the triangulation")))
    };
    let mut carriers = BTreeMap::new();
    for (i, c) in spec.carriers.iter().enumerate() {
        let here = format!("{at}/carriers/{i}");
        let v = find(t2, &c.vertex, format!("{here}/vertex"))?;
        let mut s = c
            .simplex
            .iter()
            .enumerate()
            .map(|(j, l)| find(t1, l, format!("{here}/simplex/{j}")))
            .collect::<Result<Vec<_>, _>>()?;
        s.sort_unstable();
        if carriers.insert(v, s).is_some() {
            return Err(InputError::new(format!("{here}/vertex"), format!("vertex `{}` has two carriers", c.vertex)));
        }
    }
    let input = GlueInput {
        t1: t1.triangulation.clone(),
        t2: t2.triangulation.clone(),
        carriers,
    };
    input.check().map_err(|e| InputError::new(at, e))?;
    Ok(input)
}

/// Resolves every name and checks dimensions against `ambient_dim`.
pub fn resolve(m: &Manifest) -> Result<Resolved, InputError> {
    check_unique(m.simplices.iter().map(|s| s.name.as_str()), "/simplices")?;
    check_unique(m.chains.iter().map(|s| s.name.as_str()), "/chains")?;
    check_unique(m.forms.iter().map(|s| s.name.as_str()), "/forms")?;
    check_unique(m.complexes.iter().map(|s| s.name.as_str()), "/complexes")?;
    check_unique(m.triangulations.iter().map(|s| s.name.as_str()), "/triangulations")?;

    let mut simplices = BTreeMap::new();
    for (i, spec) in m.simplices.iter().enumerate() {
        let at = format!("/simplices/{i}");
        let s = build_simplex(spec, &simplices, &at)?;
        if s.ambient() != m.ambient_dim {
            return Err(InputError::new(at, format!("simplex maps into R^{}, expected R^{}", s.ambient(), m.ambient_dim)));
        }
        simplices.insert(spec.name.clone(), s);
    }

    let mut chains = BTreeMap::new();
    for (i, spec) in m.chains.iter().enumerate() {
        let at = format!("/chains/{i}");
        let mut degree = spec.degree;
        let mut chain: Option<Chain> = None;
        for (j, term) in spec.terms.iter().enumerate() {
            let here = format!("{at}/terms/{j}/simplex");
            let s = simplices
                .get(&term.simplex)
                .ok_or_else(|| InputError::new(&here, format!("unknown simplex `{}`", term.simplex)))?;
            if *degree.get_or_insert(s.dim()) != s.dim() {
                return Err(InputError::new(here, format!("a {}-simplex in a chain of degree {}", s.dim(), degree.unwrap_or(0))));
            }
            chain
                .get_or_insert_with(|| Chain::zero(s.dim()))
                .add_term(s.clone(), term.coeff);
        }
        let degree = degree.ok_or_else(|| InputError::new(format!("{at}/degree"), "an empty chain needs `degree`"))?;
        chains.insert(spec.name.clone(), chain.unwrap_or_else(|| Chain::zero(degree)));
    }

    let mut forms = BTreeMap::new();
    for (i, spec) in m.forms.iter().enumerate() {
        let f = build_form(spec, &forms, m.ambient_dim, &format!("/forms/{i}"))?;
        forms.insert(spec.name.clone(), f);
    }

    let mut complexes = BTreeMap::new();
    for (i, spec) in m.complexes.iter().enumerate() {
        complexes.insert(spec.name.clone(), build_complex(spec, &format!("/complexes/{i}"))?);
    }

    let mut triangulations = BTreeMap::new();
    for (i, spec) in m.triangulations.iter().enumerate() {
        let at = format!("/triangulations/{i}");
        let t = build_triangulation(spec, &complexes, &simplices, &at)?;
        if !t.triangulation.cells().is_empty() && t.triangulation.ambient() != m.ambient_dim {
            return Err(InputError::new(at, format!("evaluators map into R^{}, expected R^{}", t.triangulation.ambient(), m.ambient_dim)));
        }
        triangulations.insert(spec.name.clone(), t);
    }

    let mut identifications = Vec::new();
    for (i, spec) in m.identifications.iter().enumerate() {
        let input = build_identification(spec, &triangulations, &format!("/identifications/{i}"))?;
        identifications.push((spec.t1.clone(), spec.t2.clone(), input));
    }

    Ok(Resolved {
        ambient: m.ambient_dim,
        simplices,
        chains,
        forms,
        complexes,
        triangulations,
        identifications,
    })
}

fn rational_rows(rows: &[Vec<Rational>]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

/// Builds a manifest from library objects. Every distinct simplex becomes
/// one named entry, and nested simplices are referenced by name.
pub struct Emitter {
    manifest: Manifest,
    names: HashMap<SingularSimplex, String>,
    prefix: String,
}

impl Emitter {
    /// Generated simplex names are `{prefix}{k}`.
    pub fn new(ambient: usize, prefix: impl Into<String>) -> Emitter {
        Emitter {
            manifest: Manifest {
                schema: SCHEMA.into(),
                ambient_dim: ambient,
                ..Manifest::default()
            },
            names: HashMap::new(),
            prefix: prefix.into(),
        }
    }

    fn reference(&mut self, s: &SingularSimplex) -> MapSpec {
        MapSpec::Ref(self.simplex(s))
    }

    fn spec(&mut self, s: &SingularSimplex) -> MapSpec {
        match s.kind() {
            SimplexKind::Expr(components) => MapSpec::Expr {
                dim: s.dim(),
                components: components.iter().map(|e| e.to_string()).collect(),
            },
            SimplexKind::Affine(a) => MapSpec::Affine {
                points: a.points.iter().map(|p| p.0.clone()).collect(),
                weights: rational_rows(&a.weights),
            },
            SimplexKind::Cone(inner) => MapSpec::Cone(Box::new(self.reference(inner))),
            SimplexKind::Composed(inner, e) => MapSpec::Compose {
                map: Box::new(self.reference(inner)),
                vertices: rational_rows(e.vertices()),
            },
            SimplexKind::Prism(p, e) => MapSpec::Prism {
                base: Box::new(self.reference(p.base())),
                profile: p.profile().to_string(),
                cell: rational_rows(e.vertices()),
            },
            SimplexKind::Glued(g) => MapSpec::Glued {
                h1: Box::new(self.reference(g.h1())),
                h2: Box::new(self.reference(g.h2())),
                m: g.m(),
            },
        }
    }

    /// Registers `s` and everything it is built from; returns its name.
    pub fn simplex(&mut self, s: &SingularSimplex) -> String {
        if let Some(name) = self.names.get(s) {
            return name.clone();
        }
        let map = self.spec(s);
        let name = format!("{}{}", self.prefix, self.manifest.simplices.len());
        let entry = match map {
            MapSpec::Expr { dim, components } => SimplexSpec {
                name: name.clone(),
                dim: Some(dim),
                components: Some(components),
                vertices: None,
                map: None,
            },
            map => SimplexSpec {
                name: name.clone(),
                dim: None,
                components: None,
                vertices: None,
                map: Some(map),
            },
        };
        self.manifest.simplices.push(entry);
        self.names.insert(s.clone(), name.clone());
        name
    }

    pub fn chain(&mut self, name: &str, chain: &Chain) {
        let terms = chain
            .iter()
            .map(|(s, k)| ChainTerm {
                simplex: self.simplex(s),
                coeff: k,
            })
            .collect();
        self.manifest.chains.push(ChainSpec {
            name: name.into(),
            degree: Some(chain.degree()),
            terms,
        });
    }

    /// Emits the triangulation and a complex `{name}.complex` with labels
    /// `0..n`.
    pub fn triangulation(&mut self, name: &str, t: &Triangulation) {
        let complex = format!("{name}.complex");
        let label = |v: &usize| Label::Int(*v as i64);
        self.manifest.complexes.push(ComplexSpec {
            name: complex.clone(),
            vertices: Some((0..t.vertex_count()).map(|v| label(&v)).collect()),
            simplices: t.cells().iter().map(|c| c.vertices.iter().map(label).collect()).collect(),
        });
        let evaluators = t
            .cells()
            .iter()
            .map(|c| EvaluatorSpec {
                simplex: c.vertices.iter().map(label).collect(),
                map: self.reference(&c.map),
                chart: c.chart.clone(),
                orientation: None,
            })
            .collect();
        let marks = t
            .marks()
            .iter()
            .map(|(k, set)| (k.clone(), set.iter().map(|s| s.iter().map(label).collect()).collect()))
            .collect();
        self.manifest.triangulations.push(TriangulationSpec {
            name: name.into(),
            complex,
            evaluators,
            marks,
        });
    }

    pub fn finish(self) -> Manifest {
        self.manifest
    }
}
