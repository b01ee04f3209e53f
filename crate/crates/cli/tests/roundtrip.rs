use clap::Parser;
use periodlab_cli::manifest::{parse_manifest, resolve, Emitter, Resolved};
use periodlab_cli::{run, Cli};
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Runs a command and returns the manifest it emitted.
fn emitted(args: &[&str]) -> Value {
    let mut full = vec!["periodlab", "--deterministic"];
    full.extend(args);
    let out = run(&Cli::try_parse_from(&full).unwrap());
    assert_eq!(out.exit_code, 0, "{}{}", out.stdout, out.stderr);
    let report: Value = serde_json::from_str(&out.stdout).unwrap();
    report["result"]["manifest"].clone()
}

fn ingest(m: &Value) -> Resolved {
    let parsed = parse_manifest(&serde_json::to_string(m).unwrap()).unwrap();
    resolve(&parsed).unwrap()
}

fn reemit_triangulation(m: &Value, prefix: &str) -> Value {
    let r = ingest(m);
    let name = m["triangulations"][0]["name"].as_str().unwrap();
    let mut em = Emitter::new(r.ambient, prefix);
    em.triangulation(name, &r.triangulation(name).unwrap().triangulation);
    serde_json::to_value(em.finish()).unwrap()
}

#[test]
fn subdivided_chain_reingests_identically() {
    let m = emitted(&["subdivide", &data("circle.json"), "--chain", "gamma_root", "--times", "2"]);
    let r = ingest(&m);
    let chain = r.chain("gamma_root.sd2").unwrap();
    assert_eq!(chain.len(), 8);
    let mut em = Emitter::new(r.ambient, "sd");
    em.chain("gamma_root.sd2", chain);
    assert_eq!(serde_json::to_value(em.finish()).unwrap(), m);
}

#[test]
fn subdivided_triangulation_reingests_identically() {
    let m = emitted(&["subdivide", &data("square.json"), "--triangulation", "square"]);
    assert_eq!(reemit_triangulation(&m, "sd"), m);
}

#[test]
fn glued_triangulations_reingest_identically() {
    let arcs = data("arcs.json");
    for args in [
        vec!["glue", &arcs, "--t1", "upper_path", "--t2", "lower_marked"],
        vec!["glue", &arcs, "--t1", "floor", "--t2", "ceiling"],
        vec!["cover", &arcs, "--pieces", "upper,lower"],
        vec!["cover", &arcs, "--pieces", "arc0,arc1,arc2"],
    ] {
        let m = emitted(&args);
        assert_eq!(reemit_triangulation(&m, "g"), m, "{args:?}");
    }
}

#[test]
fn reingested_glue_evaluates_like_the_original() {
    let m = emitted(&["cover", &data("arcs.json"), "--pieces", "upper,lower"]);
    let r = ingest(&m);
    let t = &r.triangulation("upper+lower").unwrap().triangulation;
    let r2 = ingest(&reemit_triangulation(&m, "g"));
    let again = &r2.triangulation("upper+lower").unwrap().triangulation;
    assert_eq!(t.cells().len(), again.cells().len());
    for (a, b) in t.cells().iter().zip(again.cells()) {
        assert_eq!(a.vertices, b.vertices);
        for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert_eq!(a.map.eval(&[x]).unwrap(), b.map.eval(&[x]).unwrap());
        }
    }
}
