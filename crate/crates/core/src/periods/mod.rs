//! Period matrices: integrals of closed forms over geometric cycles.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::chains::{Chain, ChainError, MapError};
use crate::forms::{Form, FormError};
use crate::quad::{integrate_chain, QuadConfig, QuadError, QuadResult};

/// Pointwise tolerance for boundary faces of a cycle to cancel.
pub const CYCLE_TOL: f64 = 1e-10;
/// Random points used when closedness is checked numerically.
pub const CLOSEDNESS_SAMPLES: usize = 100;

#[derive(Debug, Error)]
pub enum PeriodError {
    #[error("chain `{name}` is not a cycle: {remaining} boundary terms do not cancel")]
    NotCycle { name: String, remaining: usize },
    #[error("form `{name}` is not closed: d{name} = {value:e} at {point:?}")]
    NotClosed { name: String, point: Vec<f64>, value: f64 },
    #[error("form `{name}` could not be evaluated at any sample point")]
    Unevaluable { name: String },
    #[error("form `{form}` has degree {degree} but cycle `{cycle}` has degree {cycle_degree}")]
    Degree {
        form: String,
        degree: usize,
        cycle: String,
        cycle_degree: usize,
    },
    #[error("period of `{form}` over `{cycle}` did not converge")]
    Divergent { cycle: String, form: String },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A chain whose boundary vanishes up to [`CYCLE_TOL`].
#[derive(Clone, Debug)]
pub struct GeometricCycle {
    pub name: String,
    pub chain: Chain,
    /// Where the cycle came from, e.g. the triangulation that produced it.
    pub provenance: Option<String>,
}

impl GeometricCycle {
    pub fn new(name: impl Into<String>, chain: Chain) -> Result<GeometricCycle, PeriodError> {
        let name = name.into();
        if chain.degree() > 0 {
            let rest = chain.boundary()?.geometric_reduce(CYCLE_TOL)?;
            if !rest.is_empty() {
                return Err(PeriodError::NotCycle {
                    name,
                    remaining: rest.len(),
                });
            }
        }
        Ok(GeometricCycle {
            name,
            chain,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = Some(provenance.into());
        self
    }

    pub fn degree(&self) -> usize {
        self.chain.degree()
    }

    /// Axis-aligned box containing sampled points of the cycle.
    fn bounding_box(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>, MapError> {
        let mut bounds: Option<(Vec<f64>, Vec<f64>)> = None;
        for (s, _) in self.chain.iter() {
            for p in crate::chains::sample_grid(s.dim()) {
                let x = s.eval(&p)?;
                match &mut bounds {
                    None => bounds = Some((x.clone(), x)),
                    Some((lo, hi)) => {
                        for (i, v) in x.iter().enumerate() {
                            lo[i] = lo[i].min(*v);
                            hi[i] = hi[i].max(*v);
                        }
                    }
                }
            }
        }
        Ok(bounds)
    }
}

/// A form with a display name.
#[derive(Clone, Debug)]
pub struct NamedForm {
    pub name: String,
    pub form: Form,
}

impl NamedForm {
    pub fn new(name: impl Into<String>, form: Form) -> NamedForm {
        NamedForm { name: name.into(), form }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Closedness {
    /// `dω` simplifies to zero.
    Symbolic,
    /// `dω` vanished at every random sample point.
    Numeric,
}

/// Checks `dω = 0`, symbolically if possible and otherwise at
/// [`CLOSEDNESS_SAMPLES`] seeded random points of the box `[lo, hi]`.
/// Points where a coefficient cannot be evaluated are skipped.
pub fn check_closed(form: &NamedForm, lo: &[f64], hi: &[f64], seed: u64) -> Result<Closedness, PeriodError> {
    let d = form.form.exterior_derivative();
    if d.is_zero() {
        return Ok(Closedness::Symbolic);
    }
    let n = form.form.ambient();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluated = 0;
    for _ in 0..CLOSEDNESS_SAMPLES {
        let x: Vec<f64> = (0..n)
            .map(|i| if hi[i] > lo[i] { rng.random_range(lo[i]..hi[i]) } else { lo[i] })
            .collect();
        let (Ok(dc), Ok(c)) = (d.eval_coefficients(&x), form.form.eval_coefficients(&x)) else {
            continue;
        };
        evaluated += 1;
        let scale = 1.0 + c.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        for (_, v) in dc {
            if !(v.abs() <= 1e-8 * scale * scale) {
                return Err(PeriodError::NotClosed {
                    name: form.name.clone(),
                    point: x,
                    value: v,
                });
            }
        }
    }
    if evaluated == 0 {
        return Err(PeriodError::Unevaluable { name: form.name.clone() });
    }
    Ok(Closedness::Numeric)
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodMatrix {
    pub cycles: Vec<String>,
    pub forms: Vec<String>,
    pub closedness: Vec<Closedness>,
    /// `entries[i][j] = ∫_{cycles[i]} forms[j]`.
    pub entries: Vec<Vec<QuadResult>>,
}

impl PeriodMatrix {
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|r| r.value).collect())
            .collect()
    }

    pub fn all_converged(&self) -> bool {
        self.entries.iter().flatten().all(|r| r.converged)
    }
}

fn closedness_box(cycles: &[GeometricCycle], ambient: usize) -> Result<(Vec<f64>, Vec<f64>), PeriodError> {
    let mut lo = vec![f64::INFINITY; ambient];
    let mut hi = vec![f64::NEG_INFINITY; ambient];
    for c in cycles {
        if let Some((l, h)) = c.bounding_box()? {
            for i in 0..ambient.min(l.len()) {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
    }
    for i in 0..ambient {
        if !lo[i].is_finite() {
            lo[i] = -1.0;
            hi[i] = 1.0;
        }
        let margin = 0.25 * (hi[i] - lo[i]).max(1.0);
        lo[i] -= margin;
        hi[i] += margin;
    }
    Ok((lo, hi))
}

/// Integrates every form over every cycle. Forms must be closed and of the
/// cycle degree; entries are computed in parallel and assembled in order.
pub fn period_matrix(cycles: &[GeometricCycle], forms: &[NamedForm], cfg: &QuadConfig, seed: u64) -> Result<PeriodMatrix, PeriodError> {
    for c in cycles {
        for f in forms {
            if f.form.degree() != c.degree() {
                return Err(PeriodError::Degree {
                    form: f.name.clone(),
                    degree: f.form.degree(),
                    cycle: c.name.clone(),
                    cycle_degree: c.degree(),
                });
            }
        }
    }
    let mut closedness = Vec::with_capacity(forms.len());
    for (j, f) in forms.iter().enumerate() {
        let (lo, hi) = closedness_box(cycles, f.form.ambient())?;
        closedness.push(check_closed(f, &lo, &hi, seed.wrapping_add(j as u64))?);
    }
    let pairs: Vec<(usize, usize)> = (0..cycles.len())
        .flat_map(|i| (0..forms.len()).map(move |j| (i, j)))
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(i, j)| integrate_chain(&cycles[i].chain, &forms[j].form, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut entries = vec![Vec::with_capacity(forms.len()); cycles.len()];
    for ((i, _), r) in pairs.iter().zip(results) {
        entries[*i].push(r);
    }
    Ok(PeriodMatrix {
        cycles: cycles.iter().map(|c| c.name.clone()).collect(),
        forms: forms.iter().map(|f| f.name.clone()).collect(),
        closedness,
        entries,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RepresentativeDifference {
    pub form: String,
    pub first: QuadResult,
    pub second: QuadResult,
    pub difference: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub first: String,
    pub second: String,
    pub per_form: Vec<RepresentativeDifference>,
    pub max_difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Periods of two cycles assumed homologous; every difference must be at
/// most `tol`.
pub fn compare_representatives(
    first: &GeometricCycle,
    second: &GeometricCycle,
    forms: &[NamedForm],
    cfg: &QuadConfig,
    tol: f64,
    seed: u64,
) -> Result<ComparisonReport, PeriodError> {
    let m = period_matrix(&[first.clone(), second.clone()], forms, cfg, seed)?;
    let mut per_form = Vec::with_capacity(forms.len());
    for (j, f) in forms.iter().enumerate() {
        for (i, c) in [first, second].iter().enumerate() {
            if !m.entries[i][j].converged {
                return Err(PeriodError::Divergent {
                    cycle: c.name.clone(),
                    form: f.name.clone(),
                });
            }
        }
        let (a, b) = (m.entries[0][j].clone(), m.entries[1][j].clone());
        let difference = (a.value - b.value).abs();
        per_form.push(RepresentativeDifference {
            form: f.name.clone(),
            first: a,
            second: b,
            difference,
            pass: difference <= tol,
        });
    }
    let max_difference = per_form.iter().map(|p| p.difference).fold(0.0, f64::max);
    Ok(ComparisonReport {
        first: first.name.clone(),
        second: second.name.clone(),
        pass: per_form.iter().all(|p| p.pass),
        per_form,
        max_difference,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::SingularSimplex;
    use crate::expr::parse;
    use std::f64::consts::TAU;

    fn angular() -> NamedForm {
        let f = Form::from_terms(
            1,
            2,
            vec![
                (vec![0], parse("-a2/(a1^2 + a2^2)", 2).unwrap()),
                (vec![1], parse("a1/(a1^2 + a2^2)", 2).unwrap()),
            ],
        )
        .unwrap();
        NamedForm::new("dtheta", f)
    }

    fn circle() -> GeometricCycle {
        let upper = SingularSimplex::parse(1, &["cos(pi*a1)", "sin(pi*a1)"]).unwrap();
        let lower = SingularSimplex::parse(1, &["cos(pi*(1 + a1))", "sin(pi*(1 + a1))"]).unwrap();
        GeometricCycle::new("gamma", Chain::from_terms(1, [(upper, 1), (lower, 1)]).unwrap()).unwrap()
    }

    #[test]
    fn circle_period() {
        let m = period_matrix(&[circle()], &[angular()], &QuadConfig::default(), 7).unwrap();
        assert!((m.values()[0][0] - TAU).abs() < 1e-6);
        assert!(m.all_converged());
    }

    #[test]
    fn open_arc_is_rejected() {
        let upper = SingularSimplex::parse(1, &["cos(pi*a1)", "sin(pi*a1)"]).unwrap();
        assert!(matches!(
            GeometricCycle::new("arc", Chain::from_simplex(upper)),
            Err(PeriodError::NotCycle { .. })
        ));
    }

    #[test]
    fn non_closed_form_is_rejected() {
        let f = NamedForm::new("xdy", Form::from_terms(1, 2, vec![(vec![1], parse("a1", 2).unwrap())]).unwrap());
        assert!(matches!(
            period_matrix(&[circle()], &[f], &QuadConfig::default(), 7),
            Err(PeriodError::NotClosed { .. })
        ));
    }

    #[test]
    fn identical_cycles_agree_exactly() {
        let c = circle();
        let r = compare_representatives(&c, &c, &[angular()], &QuadConfig::default(), 0.0, 1).unwrap();
        assert_eq!(r.max_difference, 0.0);
        assert!(r.pass);
    }
}
