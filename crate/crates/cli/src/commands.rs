//! The commands behind the CLI.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use periodlab_core::chains::{Chain, SingularSimplex};
use periodlab_core::expr::parse;
use periodlab_core::glue::{cover_and_triangulate, glue, GlueInput, Triangulation};
use periodlab_core::homology::{homology, HomologyResult, SimplicialComplex};
use periodlab_core::periods::{period_matrix, GeometricCycle, NamedForm, PeriodMatrix};
use periodlab_core::quad::{finite_volume_check, integrate_prism, integrate_simplex, Verdict};
use periodlab_core::stokes::{check_chain, stokes_residual, triangulated_stokes, StokesVerdict};
use serde::Serialize;
use serde_json::{json, Value};

use crate::manifest::{self, Emitter, InputError, Label, Resolved};
use crate::report::{csv_field, csv_float, to_json};
use crate::{Command, Settings};

/// A finished command: its result, verdict and optional CSV rendering.
pub struct Done {
    pub result: Value,
    pub pass: bool,
    pub csv: Option<String>,
}

fn fail(e: impl fmt::Display) -> InputError {
    InputError::new("", e)
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialise")
}

pub fn dispatch(command: &Command, settings: &Settings) -> Result<Done, InputError> {
    match command {
        Command::CheckVolume { manifest, simplex, chain } => check_volume(&load(manifest)?, simplex, chain.as_deref(), settings),
        Command::CheckStokes {
            manifest,
            form,
            simplex,
            chain,
            triangulation,
        } => check_stokes(&load(manifest)?, form, simplex.as_deref(), chain.as_deref(), triangulation.as_deref(), settings),
        Command::Cone { manifest, simplex, form } => cone(&load(manifest)?, simplex, form.as_deref(), settings),
        Command::Subdivide {
            manifest,
            chain,
            triangulation,
            times,
            emit,
        } => subdivide(&load(manifest)?, chain.as_deref(), triangulation.as_deref(), *times, emit.as_deref()),
        Command::Homology {
            manifest,
            complex,
            triangulation,
        } => homology_of(&load(manifest)?, complex.as_deref(), triangulation.as_deref()),
        Command::Periods {
            manifest,
            cycles,
            forms,
            triangulation,
        } => periods(&load(manifest)?, cycles, forms, triangulation.as_deref(), settings),
        Command::Glue { manifest, t1, t2, emit } => {
            let r = load(manifest)?;
            let input = match r.identifications.iter().find(|(a, b, _)| a == t1 && b == t2) {
                Some((_, _, input)) => input.clone(),
                None => GlueInput::from_geometry(&r.triangulation(t1)?.triangulation, &r.triangulation(t2)?.triangulation)
                    .map_err(fail)?,
            };
            let glued = glue(&input).map_err(fail)?;
            summarise_triangulation(&r, &format!("{t1}+{t2}"), &glued, emit.as_deref())
        }
        Command::Cover { manifest, pieces, emit } => {
            let r = load(manifest)?;
            let ts = pieces
                .iter()
                .map(|p| Ok(r.triangulation(p)?.triangulation.clone()))
                .collect::<Result<Vec<_>, InputError>>()?;
            let glued = cover_and_triangulate(&ts).map_err(fail)?;
            summarise_triangulation(&r, &pieces.join("+"), &glued, emit.as_deref())
        }
    }
}

fn load(path: &Path) -> Result<Resolved, InputError> {
    manifest::load(path)
}

fn check_volume(r: &Resolved, simplices: &[String], chain: Option<&str>, s: &Settings) -> Result<Done, InputError> {
    let mut targets: Vec<(String, SingularSimplex)> = Vec::new();
    for name in simplices {
        targets.push((name.clone(), r.simplex(name)?.clone()));
    }
    if let Some(c) = chain {
        for (i, (simplex, _)) in r.chain(c)?.iter().enumerate() {
            targets.push((format!("{c}[{i}]"), simplex.clone()));
        }
    }
    if targets.is_empty() {
        return Err(fail("name at least one --simplex or a --chain"));
    }
    let mut rows = Vec::new();
    let mut pass = true;
    for (name, simplex) in targets {
        let report = finite_volume_check(&simplex, &s.quad).map_err(fail)?;
        pass &= report.verdict == Verdict::Yes;
        rows.push(json!({ "simplex": name, "report": value(&report) }));
    }
    Ok(Done {
        result: json!({ "volumes": rows }),
        pass,
        csv: None,
    })
}

fn check_stokes(
    r: &Resolved,
    form: &str,
    simplex: Option<&str>,
    chain: Option<&str>,
    triangulation: Option<&str>,
    s: &Settings,
) -> Result<Done, InputError> {
    let omega = r.form(form)?;
    let (result, verdict) = match (simplex, chain, triangulation) {
        (Some(name), None, None) => {
            let rep = stokes_residual(r.simplex(name)?, omega, &s.quad, s.tol).map_err(fail)?;
            (value(&rep), rep.verdict)
        }
        (None, Some(name), None) => {
            let rep = check_chain(r.chain(name)?, omega, &s.quad, s.tol).map_err(fail)?;
            (value(&rep), rep.verdict)
        }
        (None, None, Some(name)) => {
            let rep = triangulated_stokes(&r.triangulation(name)?.oriented, omega, &s.quad, s.tol).map_err(fail)?;
            (value(&rep), rep.verdict)
        }
        _ => return Err(fail("name exactly one of --simplex, --chain or --triangulation")),
    };
    Ok(Done {
        result,
        pass: verdict == StokesVerdict::Pass,
        csv: None,
    })
}

fn cone(r: &Resolved, simplex: &str, form: Option<&str>, s: &Settings) -> Result<Done, InputError> {
    let sigma = r.simplex(simplex)?;
    let cone = sigma.cone();
    let volume = finite_volume_check(&cone, &s.quad).map_err(fail)?;
    let mut pass = volume.verdict == Verdict::Yes;
    let mut result = json!({ "volume": value(&volume) });
    if let Some(f) = form {
        let omega = r.form(f)?;
        let direct = integrate_simplex(&cone, omega, &s.quad).map_err(fail)?;
        let profile = parse("1 - t", 1).expect("constant profile parses");
        let prism = integrate_prism(sigma, &profile, omega, &s.quad).map_err(fail)?;
        let difference = (direct.value - prism.value).abs();
        let tolerance = s.tol.bound(direct.value, prism.value);
        let agree = direct.converged && prism.converged && difference <= tolerance;
        pass &= agree;
        result["integral"] = json!({
            "cone": value(&direct),
            "prism": value(&prism),
            "difference": difference,
            "tolerance": tolerance,
            "agree": agree,
        });
    }
    Ok(Done { result, pass, csv: None })
}

fn write_manifest(path: Option<&Path>, m: &manifest::Manifest) -> Result<(), InputError> {
    if let Some(p) = path {
        std::fs::write(p, to_json(m) + "\n").map_err(|e| fail(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn subdivide(r: &Resolved, chain: Option<&str>, triangulation: Option<&str>, times: usize, emit: Option<&Path>) -> Result<Done, InputError> {
    let mut em = Emitter::new(r.ambient, "sd");
    let result = match (chain, triangulation) {
        (Some(name), None) => {
            let mut c: Chain = r.chain_or_simplex(name)?;
            for _ in 0..times {
                c = c.barycentric_subdivide();
            }
            let out = format!("{name}.sd{times}");
            em.chain(&out, &c);
            json!({ "chain": out, "terms": c.len() })
        }
        (None, Some(name)) => {
            let mut t = r.triangulation(name)?.triangulation.clone();
            for _ in 0..times {
                t = t.subdivide().map_err(fail)?;
            }
            let out = format!("{name}.sd{times}");
            em.triangulation(&out, &t);
            json!({ "triangulation": out, "vertex_count": t.vertex_count(), "cells": t.cells().len() })
        }
        _ => return Err(fail("name exactly one of --chain or --triangulation")),
    };
    let m = em.finish();
    write_manifest(emit, &m)?;
    let mut result = result;
    result["manifest"] = value(&m);
    Ok(Done {
        result,
        pass: true,
        csv: None,
    })
}

fn homology_json(labels: &[Label], complex: &SimplicialComplex, h: &HomologyResult) -> Value {
    json!({
        "labels": labels,
        "vertex_count": complex.vertex_count(),
        "dimension": complex.dim(),
        "betti": h.betti(),
        "torsion": h.groups.iter().map(|g| g.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "euler_characteristic": h.euler_characteristic(),
        "groups": value(h),
    })
}

fn homology_csv(h: &HomologyResult) -> String {
    let mut out = String::from("degree,betti,torsion\n");
    for g in &h.groups {
        let torsion: Vec<String> = g.torsion.iter().map(|t| t.to_string()).collect();
        out += &format!("{},{},{}\n", g.degree, g.betti, torsion.join(";"));
    }
    out
}

fn homology_of(r: &Resolved, complex: Option<&str>, triangulation: Option<&str>) -> Result<Done, InputError> {
    let (labels, complex) = match (complex, triangulation) {
        (Some(name), None) => {
            let c = r.complex(name)?;
            (c.labels.clone(), c.complex.clone())
        }
        (None, Some(name)) => {
            let t = r.triangulation(name)?;
            (t.labels.clone(), t.triangulation.complex().clone())
        }
        _ => return Err(fail("name exactly one of --complex or --triangulation")),
    };
    let h = homology(&complex);
    Ok(Done {
        result: homology_json(&labels, &complex, &h),
        pass: true,
        csv: Some(homology_csv(&h)),
    })
}

/// Geometric cycles from the free homology generators of a triangulation.
fn generator_cycles(name: &str, t: &Triangulation, degree: usize) -> Result<Vec<GeometricCycle>, InputError> {
    let h = homology(t.complex());
    let Some(group) = h.groups.iter().find(|g| g.degree == degree) else {
        return Ok(Vec::new());
    };
    group
        .free_generators
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let chain = t.chain_of(z).map_err(fail)?;
            Ok(GeometricCycle::new(format!("{name}/H{degree}/{i}"), chain)
                .map_err(fail)?
                .with_provenance(name.to_string()))
        })
        .collect()
}

fn periods_csv(m: &PeriodMatrix) -> String {
    let mut out = String::from("cycle,form,value,error_estimate,converged\n");
    for (i, c) in m.cycles.iter().enumerate() {
        for (j, f) in m.forms.iter().enumerate() {
            let e = &m.entries[i][j];
            out += &format!(
                "{},{},{},{},{}\n",
                csv_field(c),
                csv_field(f),
                csv_float(e.value),
                csv_float(e.error_estimate),
                e.converged
            );
        }
    }
    out
}

fn periods(r: &Resolved, cycles: &[String], forms: &[String], triangulation: Option<&str>, s: &Settings) -> Result<Done, InputError> {
    let named: Vec<NamedForm> = forms
        .iter()
        .map(|f| Ok(NamedForm::new(f.clone(), r.form(f)?.clone())))
        .collect::<Result<_, InputError>>()?;
    let degrees: BTreeSet<usize> = named.iter().map(|f| f.form.degree()).collect();
    if degrees.len() > 1 {
        return Err(fail("all forms must have the same degree"));
    }
    let mut geometric = Vec::new();
    for name in cycles {
        geometric.push(GeometricCycle::new(name.clone(), r.chain_or_simplex(name)?).map_err(fail)?);
    }
    if let Some(name) = triangulation {
        let degree = *degrees.iter().next().expect("--forms is required");
        geometric.extend(generator_cycles(name, &r.triangulation(name)?.triangulation, degree)?);
    }
    if geometric.is_empty() {
        return Err(fail("no cycles: pass --cycles or --triangulation"));
    }
    let m = period_matrix(&geometric, &named, &s.quad, s.seed).map_err(fail)?;
    Ok(Done {
        result: json!({ "values": m.values(), "matrix": value(&m) }),
        pass: m.all_converged(),
        csv: Some(periods_csv(&m)),
    })
}

fn summarise_triangulation(r: &Resolved, name: &str, t: &Triangulation, emit: Option<&Path>) -> Result<Done, InputError> {
    let validation = t.validate().map_err(fail)?;
    let h = homology(t.complex());
    let mut em = Emitter::new(r.ambient, "g");
    em.triangulation(name, t);
    let m = em.finish();
    write_manifest(emit, &m)?;
    Ok(Done {
        result: json!({
            "triangulation": name,
            "vertex_count": t.vertex_count(),
            "cells": t.cells().len(),
            "validation": value(&validation),
            "betti": h.betti(),
            "manifest": value(&m),
        }),
        pass: validation.valid,
        csv: None,
    })
}
