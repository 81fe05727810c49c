use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use conerig::document::FrameworkDocument;
use conerig::NumericPolicy;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn conerig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conerig")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: stdout={} stderr={}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn k22_half_turn_predicts_a_flex() {
    let out = conerig(&["analyze", path(&fixture("ex21_k22_c2.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["analyses"][0]["report"]["flex_dim"], 1);
    assert_eq!(r["symmetric"]["sym_flex_dim"], 1);
    assert_eq!(r["prediction"]["predicted"], true);
    assert_eq!(r["format_version"], 1);
}

#[test]
fn triangle_is_isostatic_without_prediction() {
    let out = conerig(&["analyze", path(&fixture("triangle.json")), "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["analyses"][0]["report"]["verdicts"]["isostatic"], true);
    assert!(r.get("prediction").is_none());
    assert_eq!(r["exact"]["agree"], true);
    assert_eq!(r["exact"]["exact_rank"], 3);
}

#[test]
fn malformed_edge_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("triangle.json")).unwrap().replace("\"v\": 3", "\"v\": 7");
    std::fs::write(&bad, text).unwrap();
    let out = conerig(&["analyze", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("edge 2") && err.contains("edges[1].v"), "{err}");
    assert!(out.stdout.is_empty());

    std::fs::write(&bad, "{ \"format_version\": 1,\n  \"dimension\": }").unwrap();
    let out = conerig(&["analyze", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = conerig(&["transfer", path(&fixture("triangle.json")), "--to", "lobachevsky"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transfers_pass_every_clause() {
    let cases: [&[&str]; 4] = [
        &["ex21_k22_c2.json", "--to", "hemisphere"],
        &["ex22_c3v.json", "--to", "hyperbolic", "--scale", "0.4"],
        &["k44_perpendicular.json", "--to", "whole_sphere", "--invert", "2"],
        &["body_bar.json", "--to", "signature(2,1)"],
    ];
    for case in cases {
        let input = fixture(case[0]);
        let mut args = vec!["transfer", path(&input)];
        args.extend_from_slice(&case[1..]);
        let out = conerig(&args);
        assert_eq!(out.status.code(), Some(0), "{case:?}");
        let r = json(&out);
        assert_eq!(r["transfer"]["all_pass"], true, "{case:?}: {}", r["transfer"]["clauses"]);
    }
}

#[test]
fn de_sitter_inside_the_disc_is_a_domain_error() {
    let out = conerig(&["transfer", path(&fixture("ex21_k22_c2.json")), "--to", "de_sitter", "--scale", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["error"]["kind"], "domain");
    assert!(r["error"]["message"].as_str().unwrap().contains("inside the unit disc"));
}

#[test]
fn tensegrity_survives_coning_and_inversion() {
    for extra in [&["--to", "hyperbolic"][..], &["--to", "whole_sphere", "--invert", "1,3"][..]] {
        let input = fixture("k4_tensegrity.json");
        let mut args = vec!["transfer", path(&input)];
        args.extend_from_slice(extra);
        let r = json(&conerig(&args));
        assert_eq!(r["tensegrity"]["rigid"], true);
        assert_eq!(r["cone_tensegrity"]["rigid"], true, "{extra:?}");
    }
}

#[test]
fn svg_output() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("k22.svg");
    let out = conerig(&["analyze", path(&fixture("ex21_k22_c2.json")), "--svg", path(&svg)]);
    assert_eq!(out.status.code(), Some(0));
    let s = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(s.matches("<circle").count(), 4);
    assert_eq!(s.matches(r#"class="bar""#).count(), 4);

    let t = dir.path().join("k4.svg");
    conerig(&["analyze", path(&fixture("k4_tensegrity.json")), "--svg", path(&t)]);
    let s = std::fs::read_to_string(&t).unwrap();
    assert_eq!(s.matches(r#"class="cable""#).count(), 2);
    assert_eq!(s.matches(r#"<g class="strut""#).count(), 4);

    let m = dir.path().join("c3v.svg");
    conerig(&["transfer", path(&fixture("ex22_c3v.json")), "--to", "hemisphere", "--svg", path(&m)]);
    assert_eq!(std::fs::read_to_string(&m).unwrap().matches(r#"class="mirror""#).count(), 3);

    let empty = dir.path().join("empty.json");
    std::fs::write(
        &empty,
        r#"{"format_version": 1, "dimension": 2, "signature": {"pos": 2, "neg": 0}, "vertices": [], "edges": []}"#,
    )
    .unwrap();
    let e = dir.path().join("empty.svg");
    assert_eq!(conerig(&["analyze", path(&empty), "--svg", path(&e)]).status.code(), Some(0));
    let s = std::fs::read_to_string(&e).unwrap();
    assert!(s.contains("<svg") && !s.contains("<line"));
}

#[test]
fn reports_are_deterministic() {
    let input = fixture("k44_oblique.json");
    let a = conerig(&["analyze", path(&input), "--seed", "11", "--samples", "3"]);
    let b = conerig(&["analyze", path(&input), "--seed", "11", "--samples", "3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["provenance"]["seed"], 11);
    assert_eq!(json(&a)["prediction"]["predicted"], false);
}

#[test]
fn every_fixture_round_trips_and_analyzes() {
    let mut n = 0;
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            let doc = FrameworkDocument::read(&p).unwrap();
            assert_eq!(FrameworkDocument::parse(&doc.to_json()).unwrap(), doc, "{}", p.display());
            doc.load(&NumericPolicy::default()).unwrap();
            assert_eq!(conerig(&["analyze", path(&p)]).status.code(), Some(0), "{}", p.display());
            n += 1;
        }
    }
    assert!(n >= 7);
}

#[test]
fn emitted_cone_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let emit = dir.path().join("cone.json");
    let out = conerig(&["transfer", path(&fixture("ex22_c3v.json")), "--to", "hemisphere", "--emit", path(&emit)]);
    assert_eq!(out.status.code(), Some(0));
    let loaded = FrameworkDocument::read(&emit).unwrap().load(&NumericPolicy::default()).unwrap();
    assert_eq!(loaded.framework().n_vertices(), 7);
    assert_eq!(loaded.framework().dim(), 3);
    assert_eq!(loaded.sf.group().order(), 6);
    let r = json(&conerig(&["analyze", path(&emit)]));
    assert_eq!(r["analyses"][0]["metric"], "hemisphere");
    // the cone of the prism keeps its single flex and stress
    assert_eq!(r["analyses"][0]["report"]["flex_dim"], 1);
    assert_eq!(r["analyses"][0]["report"]["stress_dim"], 1);
}
