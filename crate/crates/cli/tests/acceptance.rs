//! Acceptance suite: one line per criterion, exit status 1 if any fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nalgebra::DMatrix;
use periodlab_cli::{run, Cli};
use periodlab_core::chains::{prism_q, prism_q_inverse, Embedding, Prism, SingularSimplex};
use periodlab_core::expr::parse;
use periodlab_core::forms::{decompose_ab, restrict_components, Form};
use periodlab_core::quad::{finite_volume_check, integrate_simplex, QuadConfig, Verdict};
use periodlab_core::stokes::{stokes_residual, StokesVerdict};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("periodlab-acceptance-{}-{name}", std::process::id()))
}

/// Runs the CLI in-process with `--deterministic`; returns the JSON report
/// (or `Null` for non-JSON output), the raw output and the exit code.
fn cli(args: &[&str]) -> (Value, String, i32) {
    let mut full = vec!["periodlab", "--deterministic"];
    full.extend(args);
    let parsed = Cli::try_parse_from(&full).unwrap_or_else(|e| panic!("{full:?}: {e}"));
    let out = run(&parsed);
    let json = serde_json::from_str(&out.stdout).unwrap_or(Value::Null);
    (json, out.stdout + &out.stderr, out.exit_code)
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, d: usize, ambient: usize) -> SingularSimplex {
    let comps: Vec<String> = (0..ambient)
        .map(|_| {
            let mut s = format!("{:.3}", rng.random_range(-1.0..1.0));
            for i in 1..=d {
                s += &format!(" + {:.3}*a{i} + {:.3}*a{i}^2", rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0));
            }
            s += &format!(" + {:.3}*sin(a1) + {:.3}*sqrt(a1 + 1)", rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            s
        })
        .collect();
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    SingularSimplex::parse(d, &refs).unwrap()
}

/// Uniform interior point of `Δ_d`.
fn interior_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..=d).map(|_| -rng.random_range(1e-12f64..1.0).ln()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w[1..].to_vec()
}

fn cone_prism_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for d in 1..=3 {
        let sigma = random_simplex(&mut rng, d, 3);
        let cone = sigma.cone();
        let prism = Prism::cone(sigma.clone());
        let n = if d == 3 { 3334 } else { 3333 };
        for _ in 0..n {
            let t = rng.random_range(0.0..1.0);
            let b = interior_point(&mut rng, d);
            let lhs = prism.eval(t, &b).map_err(|e| e.to_string())?;
            let rhs = cone.eval(&prism_q(t, &b)).map_err(|e| e.to_string())?;
            lhs.iter().zip(&rhs).for_each(|(x, y)| worst = worst.max((x - y).abs()));
            let (t2, b2) = prism_q_inverse(&prism_q(t, &b)).ok_or("q not invertible at an interior point")?;
            worst = worst.max((t2 - t).abs());
            b2.iter().zip(&b).for_each(|(x, y)| worst = worst.max((x - y).abs()));
            points += 1;
        }
    }
    check(worst <= 1e-12, format!("{points} points, max error {worst:.2e} (limit 1e-12)"))
}

fn volume_corpus() -> Vec<SingularSimplex> {
    let p = |d: usize, c: &[&str]| SingularSimplex::parse(d, c).unwrap();
    vec![
        p(1, &["a1", "sqrt(a1)"]),
        p(1, &["cos(pi*a1)", "sin(pi*a1)"]),
        p(1, &["a1^(1/3)", "a1^2"]),
        p(1, &["1 + a1", "a1^(3/2)"]),
        p(1, &["1 - 2*a1", "2*sqrt(a1 - a1^2)"]),
        p(2, &["a1", "a2"]),
        p(2, &["a1 + a2^2", "sqrt(a2)"]),
        p(2, &["a1*a2 + 1", "a1 - a2"]),
        p(2, &["sqrt(a1 + a2)", "a2"]),
        p(2, &["a1^(2/3)", "a2^(1/2) + a1"]),
    ]
}

fn finite_volume() -> Outcome {
    let cfg = QuadConfig::default();
    let sigma = SingularSimplex::parse(1, &["a1", "sqrt(a1)"]).unwrap();
    let dy = Form::from_terms(1, 2, vec![(vec![1], parse("1", 2).unwrap())]).unwrap();
    let density = dy.pullback_density(&sigma, &[1e-12]).map_err(|e| e.to_string())?;
    let r = integrate_simplex(&sigma, &dy, &cfg).map_err(|e| e.to_string())?;
    if density < 1e5 || !r.converged || (r.value - 1.0).abs() > 1e-6 {
        return Err(format!("∫dy over (t, √t) = {} (density at 1e-12: {density:.1e})", r.value));
    }
    let corpus = volume_corpus();
    for s in &corpus {
        for (what, t) in [("simplex", s.clone()), ("cone", s.cone())] {
            let v = finite_volume_check(&t, &cfg).map_err(|e| e.to_string())?;
            if v.verdict != Verdict::Yes {
                return Err(format!("{what} of {s:?} has verdict {:?}", v.verdict));
            }
        }
    }
    let (rep, raw, code) = cli(&["check-volume", &data("circle.json"), "--simplex", "wiggle"]);
    let per = &rep["result"]["volumes"][0]["report"];
    let dy_entry = &per["per_index"][1][1];
    let flagged = code == 1 && per["verdict"] == "no" && dy_entry["converged"] == false && dy_entry["divergence_detected"] == true;
    if !flagged {
        return Err(format!("t·sin(1/t) not flagged: exit {code}, {raw}"));
    }
    Ok(format!(
        "∫dy = {:.9} ± {:.1e}; {} simplices and their cones finite; t·sin(1/t) flagged divergent",
        r.value,
        r.error_estimate,
        corpus.len()
    ))
}

/// Sums `(index, value)` pairs into a dense vector over the `d`-subsets of `0..=d`.
fn dense(d: usize, parts: &[(Vec<usize>, f64)]) -> Vec<f64> {
    let mut out = vec![0.0; d + 1];
    for (idx, v) in parts {
        // The subset omitting coordinate `k` is stored at `k`.
        let k = (0..=d).find(|c| !idx.contains(c)).expect("a d-subset of d + 1 coordinates");
        out[k] += v;
    }
    out
}

fn face_jacobian(d: usize, face: usize) -> DMatrix<f64> {
    // (t, c) ↦ (t, F_face(c)) on [0,1] × Δ_{d−1}.
    let e = Embedding::face(d, face).expect("face index in range");
    let lin = e.linear_part();
    let mut m = DMatrix::zeros(d + 1, d);
    m[(0, 0)] = 1.0;
    for r in 0..d {
        for c in 0..d - 1 {
            m[(r + 1, c + 1)] = lin[(r, c)];
        }
    }
    m
}

fn end_jacobian(d: usize) -> DMatrix<f64> {
    // b ↦ (t₀, b) on {t₀} × Δ_d.
    DMatrix::from_fn(d + 1, d, |r, c| if r == c + 1 { 1.0 } else { 0.0 })
}

fn decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst_split: f64 = 0.0;
    let mut worst_face: f64 = 0.0;
    let mut worst_end: f64 = 0.0;
    let mut points = 0;
    for d in 1..=2 {
        for profile in ["1 - t", "(1 - t)^2 + t/3", "cos(t)"] {
            let sigma = random_simplex(&mut rng, d, d);
            let h = if d == 1 { "1 + a1^2" } else { "exp(a1) + a2*a1" };
            let eta = Form::from_terms(d, d, vec![((0..d).collect(), parse(h, d).unwrap())]).unwrap();
            let dec = decompose_ab(&sigma, &parse(profile, 1).unwrap(), &eta).map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let t = rng.random_range(0.0..1.0);
                let b = interior_point(&mut rng, d);
                let a = dec.a_components(t, &b).map_err(|e| e.to_string())?;
                let bb = dec.b_components(t, &b).map_err(|e| e.to_string())?;
                let direct = dense(d, &dec.direct(t, &b).map_err(|e| e.to_string())?);
                let sum: Vec<f64> = dense(d, &a).iter().zip(dense(d, &bb)).map(|(x, y)| x + y).collect();
                let scale = direct.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
                for (x, y) in sum.iter().zip(&direct) {
                    worst_split = worst_split.max((x - y).abs() / scale);
                }
                for face in 0..=d {
                    let v = restrict_components(&a, &face_jacobian(d, face));
                    worst_face = worst_face.max(v.abs() / scale);
                }
                for t0 in [0.0, 1.0] {
                    let a0 = dec.a_components(t0, &b).map_err(|e| e.to_string())?;
                    let b0 = dec.b_components(t0, &b).map_err(|e| e.to_string())?;
                    let full = dec.direct(t0, &b).map_err(|e| e.to_string())?;
                    let j = end_jacobian(d);
                    let (ra, rb, rf) = (restrict_components(&a0, &j), restrict_components(&b0, &j), restrict_components(&full, &j));
                    let s = rf.abs().max(scale);
                    worst_end = worst_end.max(rb.abs() / s).max((ra - rf).abs() / s);
                }
                points += 1;
            }
        }
    }
    check(
        worst_split <= 1e-10 && worst_face <= 1e-10 && worst_end <= 1e-10,
        format!(
            "{points} points: |A + B − τ*η| rel {worst_split:.1e}, A on I×F {worst_face:.1e}, ends {worst_end:.1e} (limit 1e-10)"
        ),
    )
}

fn stokes() -> Outcome {
    // The default accuracy for singular integrands is 1e-6 relative, too
    // coarse for an absolute residual bound of 1e-6.
    let cfg = QuadConfig::default().with_rel_tol(1e-8);
    let p = |d: usize, c: &[&str]| SingularSimplex::parse(d, c).unwrap();
    let corpus = vec![
        p(1, &["a1^2 + 1", "a1^3 - a1"]),
        p(1, &["cos(pi*a1)", "sin(pi*a1)"]),
        p(1, &["a1", "sqrt(a1)"]),
        p(1, &["1 - 2*a1", "2*sqrt(a1 - a1^2)"]),
        p(2, &["a1 + a2^2", "a1*a2 + a2"]),
        p(2, &["cos(a1) + a2", "sin(a2) + a1^2"]),
        p(2, &["a1 + a2^2", "sqrt(a2)"]),
        p(2, &["sqrt(a1 + a2)", "a2"]),
        p(2, &["a1^(2/3) + 1", "a2^(1/2) + a1"]),
    ];
    let form = |degree: usize, terms: &[(Vec<usize>, &str)]| {
        Form::from_terms(degree, 2, terms.iter().map(|(i, h)| (i.clone(), parse(h, 2).unwrap())).collect()).unwrap()
    };
    let forms = [
        vec![form(0, &[(vec![], "a1^2*a2 + sin(a1)")]), form(0, &[(vec![], "exp(a1)*a2")])],
        vec![
            form(1, &[(vec![0], "a2^2"), (vec![1], "a1*a2 + sin(a1)")]),
            form(1, &[(vec![1], "a1")]),
        ],
        vec![form(2, &[(vec![0, 1], "1 + a1*a2")])],
    ];
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for sigma in &corpus {
        for (target, label) in [(sigma.clone(), "simplex"), (sigma.cone(), "cone")] {
            for omega in &forms[target.dim() - 1] {
                let r = stokes_residual(&target, omega, &cfg, 1e-6).map_err(|e| e.to_string())?;
                if r.verdict != StokesVerdict::Pass {
                    return Err(format!("{label} of {sigma:?}: residual {:.2e}, verdict {:?}", r.residual, r.verdict));
                }
                worst = worst.max(r.residual);
                checks += 1;
            }
        }
    }
    let (rep, raw, code) = cli(&[
        "check-stokes",
        &data("square.json"),
        "--triangulation",
        "square",
        "--form",
        "x_dy",
        "--tol",
        "0",
        "--abs-tol",
        "1e-9",
    ]);
    let r = &rep["result"];
    let mismatch = f(&r["max_interior_mismatch"]);
    let (area, boundary) = (f(&r["lhs"]), f(&r["boundary_integral"]));
    let square_ok = code == 0
        && r["interior"].as_array().is_some_and(|a| a.len() == 1)
        && mismatch <= 1e-9
        && (area - 1.0).abs() <= 1e-8
        && (boundary - 1.0).abs() <= 1e-8;
    if !square_ok {
        return Err(format!("triangulated square: exit {code}, {raw}"));
    }
    Ok(format!(
        "{checks} simplex and cone checks, max residual {worst:.1e} (limit 1e-6); square: diagonal mismatch {mismatch:.1e}, area {area:.12}"
    ))
}

fn homology() -> Outcome {
    let expected: [(&str, &[u64], &[&[&str]]); 4] = [
        ("hollow_triangle", &[1, 1], &[&[], &[]]),
        ("tetrahedron_boundary", &[1, 0, 1], &[&[], &[], &[]]),
        ("T7", &[1, 2, 1], &[&[], &[], &[]]),
        ("RP2", &[1, 0, 0], &[&[], &["2"], &[]]),
    ];
    let mut seen = Vec::new();
    for (name, betti, torsion) in expected {
        let (rep, raw, code) = cli(&["homology", &data("complexes.json"), "--complex", name]);
        let r = &rep["result"];
        let got_betti: Vec<u64> = r["betti"].as_array().map(|a| a.iter().filter_map(Value::as_u64).collect()).unwrap_or_default();
        let got_torsion: Vec<Vec<String>> = r["torsion"]
            .as_array()
            .map(|a| {
                a.iter()
                    .map(|g| g.as_array().map(|t| t.iter().filter_map(|x| x.as_str().map(String::from)).collect()).unwrap_or_default())
                    .collect()
            })
            .unwrap_or_default();
        let want_torsion: Vec<Vec<String>> = torsion.iter().map(|t| t.iter().map(|s| s.to_string()).collect()).collect();
        if code != 0 || got_betti != betti || got_torsion != want_torsion {
            return Err(format!("{name}: betti {got_betti:?}, torsion {got_torsion:?}; {raw}"));
        }
        seen.push(format!("{name} {got_betti:?}"));
    }
    Ok(format!("{}; H₁(RP2) torsion Z/2", seen.join(", ")))
}

/// Writes the manifest emitted by a command with the forms of `forms_from` added.
fn with_forms(report: &Value, forms_from: &str, name: &str) -> String {
    let mut m = report["result"]["manifest"].clone();
    let source: Value = serde_json::from_str(&std::fs::read_to_string(forms_from).unwrap()).unwrap();
    m["forms"] = source["forms"].clone();
    let path = scratch(name);
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn values(rep: &Value) -> Vec<Vec<f64>> {
    rep["result"]["values"]
        .as_array()
        .map(|rows| rows.iter().map(|r| r.as_array().map(|x| x.iter().map(f).collect()).unwrap_or_default()).collect())
        .unwrap_or_default()
}

fn periods() -> Outcome {
    let tau = std::f64::consts::TAU;
    let circle = data("circle.json");
    let (rep, raw, code) = cli(&["periods", &circle, "--cycles", "gamma,gamma_root", "--forms", "dtheta,exact"]);
    let v = values(&rep);
    if code != 0 || v.len() != 2 {
        return Err(format!("circle periods: {raw}"));
    }
    let circle_err = (v[0][0] - tau).abs().max((v[1][0] - tau).abs());
    let root_gap = (v[0][0] - v[1][0]).abs();
    let mut exact_max = v[0][1].abs().max(v[1][1].abs());
    if circle_err > 1e-6 || root_gap > 2e-6 {
        return Err(format!("circle periods {v:?}"));
    }

    let (rep, raw, code) = cli(&["periods", &data("torus.json"), "--cycles", "s,t", "--forms", "dtheta1,dtheta2,exact"]);
    let t = values(&rep);
    if code != 0 || t.len() != 2 {
        return Err(format!("torus periods: {raw}"));
    }
    let diag = (t[0][0] - tau).abs().max((t[1][1] - tau).abs());
    let off = t[0][1].abs().max(t[1][0].abs());
    exact_max = exact_max.max(t[0][2].abs()).max(t[1][2].abs());
    if diag > 1e-6 || off > 1e-6 || exact_max > 1e-6 {
        return Err(format!("torus periods {t:?}"));
    }

    let mut sd_gap: f64 = 0.0;
    for chain in ["gamma", "gamma_root"] {
        let (rep, raw, code) = cli(&["subdivide", &circle, "--chain", chain, "--times", "2"]);
        if code != 0 {
            return Err(format!("subdivide {chain}: {raw}"));
        }
        let path = with_forms(&rep, &circle, &format!("{chain}.json"));
        let (rep, raw, code) = cli(&["periods", &path, "--cycles", &format!("{chain}.sd2"), "--forms", "dtheta,exact"]);
        let _ = std::fs::remove_file(&path);
        let s = values(&rep);
        if code != 0 || s.len() != 1 {
            return Err(format!("periods of subdivided {chain}: {raw}"));
        }
        let row = if chain == "gamma" { 0 } else { 1 };
        sd_gap = sd_gap.max((s[0][0] - v[row][0]).abs());
        exact_max = exact_max.max(s[0][1].abs());
    }
    check(
        sd_gap <= 2e-6 && exact_max <= 1e-6,
        format!(
            "circle |P − 2π| {circle_err:.1e}, torus diag {diag:.1e} off {off:.1e}, exact {exact_max:.1e}, smooth vs √ {root_gap:.1e}, subdivision {sd_gap:.1e}"
        ),
    )
}

fn validated_circle(args: &[&str]) -> Result<(Value, String), String> {
    let (rep, raw, code) = cli(args);
    let r = &rep["result"];
    let v = &r["validation"];
    let ok = code == 0
        && v["valid"] == true
        && f(&v["face_mismatch"]) <= 1e-10
        && v["collisions"] == 0
        && r["betti"] == serde_json::json!([1, 1]);
    if ok {
        Ok((rep.clone(), format!("face mismatch {:.1e}", f(&v["face_mismatch"]))))
    } else {
        Err(format!("{args:?}: exit {code}, {raw}"))
    }
}

fn evaluators(rep: &Value) -> Vec<(Value, Value, Value)> {
    let m = &rep["result"]["manifest"];
    let simplices = m["simplices"].as_array().cloned().unwrap_or_default();
    m["triangulations"][0]["evaluators"]
        .as_array()
        .cloned()
        .unwrap_or_default()
        .iter()
        .map(|e| {
            let name = e["map"]["ref"].clone();
            let comps = simplices
                .iter()
                .find(|s| s["name"] == name)
                .map(|s| s["components"].clone())
                .unwrap_or(Value::Null);
            (e["simplex"].clone(), comps, e["chart"].clone())
        })
        .collect()
}

fn gluing() -> Outcome {
    let arcs = data("arcs.json");
    let (two, two_detail) = validated_circle(&["cover", &arcs, "--pieces", "upper,lower"])?;
    let (_, three_detail) = validated_circle(&["cover", &arcs, "--pieces", "arc0,arc1,arc2"])?;
    let (_, explicit_detail) = validated_circle(&["glue", &arcs, "--t1", "upper_path", "--t2", "lower_marked"])?;

    let path = with_forms(&two, &arcs, "glued.json");
    let (rep, raw, code) = cli(&["periods", &path, "--triangulation", "upper+lower", "--forms", "dtheta"]);
    let _ = std::fs::remove_file(&path);
    let p = values(&rep);
    if code != 0 || p.len() != 1 || (p[0][0].abs() - std::f64::consts::TAU).abs() > 1e-6 {
        return Err(format!("period of the glued circle: {raw}"));
    }

    let (rep, raw, code) = cli(&["glue", &arcs, "--t1", "floor", "--t2", "ceiling"]);
    let disjoint = serde_json::json!([
        [[0, 1], ["a1", "1"], "ceiling"],
        [[2, 3], ["a1", "0"], "floor"],
    ]);
    let got: Vec<Value> = evaluators(&rep).into_iter().map(|(s, c, k)| serde_json::json!([s, c, k])).collect();
    if code != 0 || Value::Array(got.clone()) != disjoint || rep["result"]["betti"] != serde_json::json!([2, 0]) {
        return Err(format!("B = ∅ gave {got:?}: {raw}"));
    }

    let (rep, raw, code) = cli(&["glue", &arcs, "--t1", "floor_again", "--t2", "floor"]);
    let same = serde_json::json!([[[0, 1], ["a1", "0"], "floor"]]);
    let got: Vec<Value> = evaluators(&rep).into_iter().map(|(s, c, k)| serde_json::json!([s, c, k])).collect();
    if code != 0 || Value::Array(got.clone()) != same || rep["result"]["vertex_count"] != 2 {
        return Err(format!("X₁ = X₂ gave {got:?}: {raw}"));
    }
    Ok(format!(
        "two arcs ({two_detail}), three arcs ({three_detail}), explicit carriers ({explicit_detail}); glued period {:.9}; B = ∅ and X₁ = X₂ exact",
        p[0][0]
    ))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_periodlab");
    let (circle, square, complexes, arcs, torus) =
        (data("circle.json"), data("square.json"), data("complexes.json"), data("arcs.json"), data("torus.json"));
    let runs: Vec<Vec<&str>> = vec![
        vec!["check-volume", &circle, "--simplex", "root_graph", "--simplex", "disc_sector"],
        vec!["check-stokes", &circle, "--chain", "gamma", "--form", "potential"],
        vec!["check-stokes", &circle, "--simplex", "disc_sector", "--form", "omega"],
        vec!["check-stokes", &square, "--triangulation", "square", "--form", "mixed"],
        vec!["cone", &circle, "--simplex", "root_graph", "--form", "area"],
        vec!["subdivide", &circle, "--chain", "gamma_root", "--times", "2"],
        vec!["subdivide", &square, "--triangulation", "square"],
        vec!["homology", &complexes, "--complex", "RP2"],
        vec!["homology", &complexes, "--complex", "T7", "--output", "csv"],
        vec!["periods", &circle, "--cycles", "gamma,gamma_root", "--forms", "dtheta,exact"],
        vec!["periods", &torus, "--cycles", "s,t", "--forms", "dtheta1,dtheta2", "--output", "csv", "--jobs", "2"],
        vec!["glue", &arcs, "--t1", "upper_path", "--t2", "lower_marked"],
        vec!["cover", &arcs, "--pieces", "arc0,arc1,arc2"],
    ];
    for args in &runs {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let out = std::process::Command::new(bin)
                .args(args)
                .arg("--deterministic")
                .output()
                .map_err(|e| format!("cannot run {bin}: {e}"))?;
            if !out.status.success() {
                return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
            }
            outputs.push(out.stdout);
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Err(format!("{args:?}: outputs differ"));
        }
    }
    Ok(format!("{} commands byte-identical across two runs", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("cone/prism identities", cone_prism_identities),
        ("finite volume", finite_volume),
        ("A + B decomposition", decomposition),
        ("Stokes", stokes),
        ("integer homology", homology),
        ("period pairing", periods),
        ("gluing", gluing),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
