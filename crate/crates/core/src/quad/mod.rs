//! Adaptive integration of pullback densities over the open standard simplex.
//!
//! Each cell is integrated with a positive-weight rule exact to degree 7 and
//! an embedded degree-5 rule; their difference is the cell error. Cells are
//! bisected in order of decreasing error, with cells touching `∂Δ_d`
//! weighted up. All rule nodes are interior, so maps that are only `C¹` on
//! the open simplex are never evaluated on the boundary.
//!
//! Results do not depend on the number of threads: cells are refined in
//! batches whose membership depends only on the error ordering, and sums are
//! formed in creation order.

mod adaptive;
mod rules;

use serde::Serialize;
use thiserror::Error;

use crate::chains::{Chain, ChainError, MapError, Prism, SingularSimplex};
use crate::expr::Expr;
use crate::forms::{minor_det, multi_indices, Form, FormError};

pub use rules::{rule_pair, Rule};

use adaptive::{integrate_cell, shrunken_vertices, standard_vertices};

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("integrand is not finite at interior point {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Relative tolerance used when neither map nor form can be singular.
pub const SMOOTH_REL_TOL: f64 = 1e-8;
/// Relative tolerance used when some evaluator may blow up at the boundary.
pub const SINGULAR_REL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadConfig {
    /// `None` picks [`SMOOTH_REL_TOL`] or [`SINGULAR_REL_TOL`].
    pub rel_tol: Option<f64>,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_cells: usize,
    /// Run the divergence probe when the main integration does not converge.
    pub probe: bool,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: None,
            abs_tol: 1e-10,
            max_depth: 40,
            max_cells: 400_000,
            probe: true,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = Some(rel_tol);
        self
    }

    fn validate(&self) -> Result<(), QuadError> {
        if let Some(r) = self.rel_tol {
            if !(r > 0.0 && r.is_finite()) {
                return Err(QuadError::Config(format!("relative tolerance must be positive, got {r}")));
            }
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadError::Config(format!(
                "absolute tolerance must be non-negative, got {}",
                self.abs_tol
            )));
        }
        if self.max_cells == 0 {
            return Err(QuadError::Config("max_cells must be positive".into()));
        }
        Ok(())
    }

    fn rel_tol_for(&self, singular: bool) -> f64 {
        self.rel_tol
            .unwrap_or(if singular { SINGULAR_REL_TOL } else { SMOOTH_REL_TOL })
    }

    /// Tolerance that a converged result with value `value` satisfies.
    pub fn tolerance(&self, value: f64, singular: bool) -> f64 {
        self.abs_tol.max(self.rel_tol_for(singular) * value.abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Estimate of the integral of the absolute value of the integrand.
    pub abs_integral_estimate: f64,
    pub converged: bool,
    pub subdivisions: usize,
    /// Set when the divergence probe saw the absolute integral growing
    /// steadily towards the boundary. A diagnostic, not a proof.
    pub divergence_detected: bool,
}

impl QuadResult {
    pub fn exact(value: f64) -> QuadResult {
        QuadResult {
            value,
            error_estimate: 0.0,
            abs_integral_estimate: value.abs(),
            converged: true,
            subdivisions: 0,
            divergence_detected: false,
        }
    }

    /// `Σ k_i r_i`, with errors and absolute integrals weighted by `|k_i|`.
    pub fn combine<'a, I>(parts: I) -> QuadResult
    where
        I: IntoIterator<Item = (i64, &'a QuadResult)>,
    {
        let mut out = QuadResult::exact(0.0);
        for (k, r) in parts {
            let kf = k as f64;
            out.value += kf * r.value;
            out.error_estimate += kf.abs() * r.error_estimate;
            out.abs_integral_estimate += kf.abs() * r.abs_integral_estimate;
            out.converged &= r.converged;
            out.subdivisions += r.subdivisions;
            out.divergence_detected |= r.divergence_detected;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeReport {
    /// One entry per increasing multi-index `I` (0-based), for `∫|σ*dx_I|`.
    pub per_index: Vec<(Vec<usize>, QuadResult)>,
    pub verdict: Verdict,
}

/// Integrates `f` over `Δ_d`. `singular` selects the default tolerance.
pub fn integrate_fn<F>(d: usize, f: F, singular: bool, cfg: &QuadConfig) -> Result<QuadResult, QuadError>
where
    F: Fn(&[f64]) -> Result<f64, QuadError> + Sync,
{
    cfg.validate()?;
    let rel_tol = cfg.rel_tol_for(singular);
    let run = if singular && d > 0 {
        let graded = |mu: &[f64]| {
            let (a, jac) = grade(mu);
            if jac == 0.0 {
                return Ok(0.0);
            }
            Ok(f(&a)? * jac)
        };
        integrate_cell(standard_vertices(d), &graded, cfg, rel_tol)?
    } else {
        integrate_cell(standard_vertices(d), &f, cfg, rel_tol)?
    };
    let mut result = run.result;
    if !result.converged && cfg.probe {
        result.divergence_detected = probe_divergence(d, &f, cfg)?;
    }
    Ok(result)
}

/// Exponent of the boundary grading used for possibly singular integrands.
const GRADING_POWER: i32 = 3;

/// The homeomorphism `λ_i ↦ λ_i^p / Σ_j λ_j^p` of `Δ_d` and its Jacobian
/// determinant at `mu` (standard coordinates). It fixes every face and
/// flattens towards them, so that `r^{-α}` singularities on faces become
/// `r^{p(1-α)-1}`.
fn grade(mu: &[f64]) -> (Vec<f64>, f64) {
    let d = mu.len();
    let p = GRADING_POWER;
    let mut m = Vec::with_capacity(d + 1);
    m.push((1.0 - mu.iter().sum::<f64>()).max(0.0));
    m.extend(mu.iter().map(|x| x.max(0.0)));
    let powers: Vec<f64> = m.iter().map(|x| x.powi(p)).collect();
    let s: f64 = powers.iter().sum();
    let mut a: Vec<f64> = powers[1..].iter().map(|x| x / s).collect();
    // Keep `1 − Σa` nonnegative under any evaluation order.
    let cap = 1.0 - 4.0 * f64::EPSILON;
    let total: f64 = a.iter().sum();
    if total > cap {
        a.iter_mut().for_each(|x| *x *= cap / total);
    }
    // ∂λ_i/∂m_j = p m_j^{p-1} (δ_ij / s − m_i^p / s²), and m_0 = 1 − Σ μ.
    let dl = |i: usize, j: usize| -> f64 {
        let delta = if i == j { 1.0 / s } else { 0.0 };
        p as f64 * m[j].powi(p - 1) * (delta - powers[i] / (s * s))
    };
    let jac = nalgebra::DMatrix::from_fn(d, d, |r, c| dl(r + 1, c + 1) - dl(r + 1, 0));
    (a, jac.determinant().abs())
}

/// Levels `k` of the probe: the integral of `|f|` over `{λ_i ≥ 2^{-k}}`.
const PROBE_LEVELS: std::ops::RangeInclusive<i32> = 3..=15;
/// Consecutive level increments whose ratio must stay above
/// [`PROBE_RATIO`] before divergence is reported.
const PROBE_RUN: usize = 5;
/// An integrable `r^{-α}` singularity has increment ratio `2^{α-1}`; a
/// logarithmic divergence has ratio 1.
const PROBE_RATIO: f64 = 0.9;

/// Integrates `|f|` over shrinking neighbourhoods of the boundary and
/// reports whether the contribution of each new shell fails to decay.
fn probe_divergence<F>(d: usize, f: &F, cfg: &QuadConfig) -> Result<bool, QuadError>
where
    F: Fn(&[f64]) -> Result<f64, QuadError> + Sync,
{
    if d == 0 {
        return Ok(false);
    }
    let abs = |x: &[f64]| f(x).map(f64::abs);
    let probe_cfg = QuadConfig {
        rel_tol: Some(1e-4),
        abs_tol: 0.0,
        max_cells: cfg.max_cells.min(200_000),
        probe: false,
        ..cfg.clone()
    };
    let mut levels = Vec::new();
    for k in PROBE_LEVELS {
        let eps = (-(k as f64)).exp2();
        if eps * (d as f64 + 1.0) >= 1.0 {
            continue;
        }
        let run = integrate_cell(shrunken_vertices(d, eps), &abs, &probe_cfg, 1e-4)?;
        levels.push(run.result.value);
    }
    let increments: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = levels.last().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    let mut run = 0;
    for w in increments.windows(2) {
        let (prev, next) = (w[0], w[1]);
        let growing = prev > 1e-3 * scale && next >= PROBE_RATIO * prev;
        run = if growing { run + 1 } else { 0 };
        if run >= PROBE_RUN {
            return Ok(true);
        }
    }
    Ok(false)
}

fn form_may_be_singular(omega: &Form) -> bool {
    omega.terms().any(|(_, h)| h.may_be_singular())
}

/// `∫_{Δ_d} σ*ω` for `deg ω = dim σ`.
pub fn integrate_simplex(sigma: &SingularSimplex, omega: &Form, cfg: &QuadConfig) -> Result<QuadResult, QuadError> {
    omega.check_pullback(sigma)?;
    if omega.is_zero() {
        return Ok(QuadResult::exact(0.0));
    }
    if sigma.dim() == 0 {
        cfg.validate()?;
        return Ok(QuadResult::exact(omega.pullback_density(sigma, &[])?));
    }
    let singular = sigma.may_be_singular() || form_may_be_singular(omega);
    integrate_fn(
        sigma.dim(),
        |a| Ok(omega.pullback_density(sigma, a)?),
        singular,
        cfg,
    )
}

/// `∫_c ω = Σ k ∫σ*ω` over the terms of `c`.
pub fn integrate_chain(chain: &Chain, omega: &Form, cfg: &QuadConfig) -> Result<QuadResult, QuadError> {
    if omega.degree() != chain.degree() {
        return Err(FormError::Mismatch {
            form: omega.degree(),
            simplex: chain.degree(),
        }
        .into());
    }
    let parts = chain
        .iter()
        .map(|(s, k)| Ok((k, integrate_simplex(s, omega, cfg)?)))
        .collect::<Result<Vec<_>, QuadError>>()?;
    Ok(QuadResult::combine(parts.iter().map(|(k, r)| (*k, r))))
}

/// Integrates `|σ*dx_I|` for every increasing multi-index `I` of length
/// `dim σ`. The verdict is `yes` when all converge and `no` when the
/// divergence probe fired for some index.
pub fn finite_volume_check(sigma: &SingularSimplex, cfg: &QuadConfig) -> Result<VolumeReport, QuadError> {
    let d = sigma.dim();
    let mut per_index = Vec::new();
    for idx in multi_indices(sigma.ambient(), d) {
        let r = if d == 0 {
            cfg.validate()?;
            QuadResult::exact(1.0)
        } else {
            integrate_fn(
                d,
                |a| {
                    let jac = sigma.jacobian(a)?;
                    Ok(minor_det(&jac, &idx, None).abs())
                },
                sigma.may_be_singular(),
                cfg,
            )?
        };
        per_index.push((idx, r));
    }
    let verdict = if per_index.iter().all(|(_, r)| r.converged) {
        Verdict::Yes
    } else if per_index.iter().any(|(_, r)| r.divergence_detected) {
        Verdict::No
    } else {
        Verdict::Inconclusive
    };
    Ok(VolumeReport { per_index, verdict })
}

/// `∫_{[0,1]×Δ_d}` of the pullback of `ω` along `(t, b) ↦ f(t)σ(b)`.
///
/// The product is oriented so that the reparametrization `q` onto `Δ_{d+1}`
/// preserves orientation; with `f = 1 − t` the result equals
/// `∫_{Δ_{d+1}} ĥσ*ω`. This is the negative of the integral for the
/// `dt ∧ db` orientation.
pub fn integrate_prism(sigma: &SingularSimplex, f: &Expr, omega: &Form, cfg: &QuadConfig) -> Result<QuadResult, QuadError> {
    let prism = Prism::new(sigma.clone(), f.clone())?;
    let r = integrate_chain(&prism.chain(), omega, cfg)?;
    Ok(QuadResult { value: -r.value, ..r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn form(degree: usize, ambient: usize, terms: &[(&[usize], &str)]) -> Form {
        Form::from_terms(
            degree,
            ambient,
            terms
                .iter()
                .map(|(i, h)| (i.to_vec(), parse(h, ambient).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn grading_jacobian_matches_differences() {
        for mu in [vec![0.3], vec![0.2, 0.5], vec![0.1, 0.2, 0.3]] {
            let (_, jac) = grade(&mu);
            let h = 1e-6;
            let d = mu.len();
            let fd = nalgebra::DMatrix::from_fn(d, d, |r, c| {
                let mut plus = mu.clone();
                let mut minus = mu.clone();
                plus[c] += h;
                minus[c] -= h;
                (grade(&plus).0[r] - grade(&minus).0[r]) / (2.0 * h)
            });
            assert!((fd.determinant().abs() - jac).abs() < 1e-6, "{mu:?}");
        }
        let area = integrate_fn(2, |a| Ok(grade(a).1), false, &QuadConfig::default()).unwrap();
        assert!((area.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn simplex_volume() {
        let s = SingularSimplex::identity(2);
        let r = integrate_simplex(&s, &Form::standard(2, vec![0, 1]).unwrap(), &QuadConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn sqrt_arc_integrates_dy_to_one() {
        let s = SingularSimplex::parse(1, &["a1", "sqrt(a1)"]).unwrap();
        let cfg = QuadConfig {
            max_depth: 80,
            ..QuadConfig::default().with_rel_tol(1e-9)
        };
        let r = integrate_simplex(&s, &Form::standard(2, vec![1]).unwrap(), &cfg).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn squared_parabola_area() {
        let s = SingularSimplex::parse(2, &["a1^2", "a2"]).unwrap();
        let r = integrate_simplex(&s, &Form::standard(2, vec![0, 1]).unwrap(), &QuadConfig::default()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn point_evaluation() {
        let p = SingularSimplex::point(vec![2.0, 3.0]).unwrap();
        let f = form(0, 2, &[(&[], "a1*a2")]);
        assert_eq!(integrate_simplex(&p, &f, &QuadConfig::default()).unwrap().value, 6.0);
    }

    #[test]
    fn volume_of_sqrt_arc() {
        let s = SingularSimplex::parse(1, &["a1", "sqrt(a1)"]).unwrap();
        let rep = finite_volume_check(&s, &QuadConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Yes);
        for (_, r) in &rep.per_index {
            assert!((r.value - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn oscillating_graph_has_infinite_volume() {
        let s = SingularSimplex::parse(1, &["a1", "a1*sin(1/a1)"]).unwrap();
        let cfg = QuadConfig {
            max_cells: 20_000,
            ..QuadConfig::default()
        };
        let rep = finite_volume_check(&s, &cfg).unwrap();
        assert_eq!(rep.per_index[0].1.converged, true);
        assert!(rep.per_index[1].1.divergence_detected, "{:?}", rep.per_index[1].1);
        assert_eq!(rep.verdict, Verdict::No);
    }

    #[test]
    fn integrable_singularity_is_not_flagged() {
        let s = SingularSimplex::parse(1, &["a1", "a1^(1/4)"]).unwrap();
        let cfg = QuadConfig {
            max_cells: 20_000,
            ..QuadConfig::default()
        };
        let rep = finite_volume_check(&s, &cfg).unwrap();
        assert_ne!(rep.verdict, Verdict::No);
    }

    #[test]
    fn half_disk_prism() {
        let s = SingularSimplex::parse(1, &["cos(pi*a1)", "sin(pi*a1)"]).unwrap();
        let f = parse("1 - t", 1).unwrap();
        let w = Form::standard(2, vec![0, 1]).unwrap();
        let r = integrate_prism(&s, &f, &w, &QuadConfig::default()).unwrap();
        assert!((r.value.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "{r:?}");
        let c = integrate_simplex(&s.cone(), &w, &QuadConfig::default()).unwrap();
        assert!((r.value - c.value).abs() < 1e-8);
    }

    #[test]
    fn degenerate_prism_is_zero() {
        let p = SingularSimplex::point(vec![1.0, 0.0]).unwrap();
        let f = parse("1 - t", 1).unwrap();
        // The image is a segment on the x-axis, so `dy` pulls back to zero.
        let r = integrate_prism(&p, &f, &Form::standard(2, vec![1]).unwrap(), &QuadConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
        let r = integrate_prism(&p, &f, &Form::standard(2, vec![0]).unwrap(), &QuadConfig::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bad_tolerance_is_rejected() {
        let cfg = QuadConfig::default().with_rel_tol(-1.0);
        let s = SingularSimplex::identity(1);
        assert!(integrate_simplex(&s, &Form::standard(1, vec![0]).unwrap(), &cfg).is_err());
    }
}
