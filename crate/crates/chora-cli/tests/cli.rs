use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn chora(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chora"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn eval_difference_gate() {
    let o = chora(&[
        "eval", "diffgate.json", "--model", "euclid2", "--scale", "eps=0.5", "--in", "x=0,0", "--in", "u=1,0", "--in", "v=0,1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["outputs"]["out"], serde_json::json!([-0.5, 1.0]));
}

#[test]
fn every_subcommand_has_help() {
    let subs: &[&[&str]] = &[
        &[],
        &["validate"],
        &["eval"],
        &["move"],
        &["normalize"],
        &["limits"],
        &["identities"],
        &["residue"],
        &["render"],
        &["atlas"],
        &["atlas", "metrics"],
        &["atlas", "generalize"],
        &["atlas", "propacc"],
        &["atlas", "gh"],
        &["atlas", "zoom"],
        &["atlas", "foveal"],
    ];
    for s in subs {
        let mut args = s.to_vec();
        args.push("--help");
        let o = chora(&args);
        assert_eq!(o.status.code(), Some(0), "{s:?}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"), "{s:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(chora(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(chora(&["eval", "diffgate.json"]).status.code(), Some(2));
    assert_eq!(chora(&["eval", "diffgate.json", "--model", "euclid2", "--scale", "eps=abc"]).status.code(), Some(2));
    assert_eq!(chora(&["eval", "diffgate.json", "--model", "euclid2", "--in", "x=1,,2"]).status.code(), Some(2));
    assert_eq!(chora(&["validate", "atlas/point.json"]).status.code(), Some(3));
    let unbound = chora(&["eval", "diffgate.json", "--model", "euclid2", "--scale", "eps=0.5"]);
    assert_eq!(unbound.status.code(), Some(3));
    let missing = chora(&["validate", "no-such-file.json"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(missing.stdout.is_empty() && !missing.stderr.is_empty());
    assert_eq!(chora(&["identities", "--model", "hyperbolic"]).status.code(), Some(2));
    assert_eq!(chora(&["move", "diffgate.json", "--kind", "sideways", "--site", "G1"]).status.code(), Some(2));
    // a well-formed move at a site where it does not apply
    assert_eq!(chora(&["move", "diffgate.json", "--kind", "r1", "--site", "G1"]).status.code(), Some(1));
    assert_eq!(chora(&["atlas", "gh", "atlas/triangle.json", "atlas/triangle.json"]).status.code(), Some(0));
}

#[test]
fn failed_verification_exits_one() {
    let dir = std::env::temp_dir().join(format!("chora-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(fixtures().join("diffgate.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    // dropping the first chord leaves a fan-out without its gate
    v["wires"].as_array_mut().unwrap().remove(0);
    let bad = dir.join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = chora(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["valid"], false);
    assert_eq!(r["violations"][0]["kind"], "UnpairedGate");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn output_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("chora-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("n.json");
    let o = chora(&["normalize", "chora.json", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let n: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(n["nodes"].is_array());
    let v = chora(&["validate", out.to_str().unwrap()]);
    assert_eq!(json(&v)["census"]["normal"], true);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn atlas_commands() {
    let m = json(&chora(&["atlas", "metrics", "atlas/stretch.json"]));
    assert!((m["accuracy"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    let g = json(&chora(&["atlas", "gh", "atlas/segment-1.json", "atlas/segment-1.4.json"]));
    assert!((g["bound"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    let p = chora(&["atlas", "propacc", "atlas/collapse.json", "--eps", "0.5", "--mu", "0.25"]);
    assert_eq!(p.status.code(), Some(0));
    assert_eq!(json(&p)["pass"], true);
    let f = chora(&["atlas", "foveal", "--h", "1e-3", "--kmax", "2"]);
    assert_eq!(f.status.code(), Some(0));
    assert_eq!(json(&f)["violations"], 0);
}
