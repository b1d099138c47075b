use std::path::PathBuf;
use std::process::Command;

use popmatch::cli::run;
use tempfile::TempDir;

const FIX_A: &str = r#"{"kind":"HA","agents":["a1","a2"],
 "houses":[{"id":"h1","capacity":1},{"id":"h2","capacity":1}],
 "preferences":{"a1":["h1","h2"],"a2":["h1","h2"]}}"#;
const FIX_B: &str = r#"{"kind":"HAT","agents":["a1","a2"],
 "houses":[{"id":"h1","capacity":1},{"id":"h2","capacity":1}],
 "preferences":{"a1":[["h1","h2"]],"a2":[["h1","h2"]]}}"#;
const FIX_C: &str = r#"{"kind":"CHA","agents":["a1","a2"],
 "houses":[{"id":"h1","capacity":2},{"id":"h2","capacity":1}],
 "preferences":{"a1":["h1","h2"],"a2":["h1","h2"]}}"#;
// Three agents with the same strict list: no popular matching.
const CYCLIC: &str = r#"{"kind":"HA","agents":["a1","a2","a3"],
 "houses":[{"id":"h1","capacity":1},{"id":"h2","capacity":1},{"id":"h3","capacity":1}],
 "preferences":{"a1":["h1","h2","h3"],"a2":["h1","h2","h3"],"a3":["h1","h2","h3"]},
 "last_resorts":true}"#;
const K22: &str = "2 2 4\n1 1\n1 2\n2 1\n2 2\n";

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, body: &str) -> String {
        let p: PathBuf = self.0.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_string()
    }
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("popmatch").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn oracle_count_on_strict_lists() {
    let d = Dir::new();
    let (code, out, err) = call(&["count", &d.file("a.json", FIX_A), "--method", "oracle"]);
    assert_eq!((code, out.as_str()), (0, "2\n"));
    assert!(err.contains("last-resort"));
}

#[test]
fn exact_and_estimate_on_ties() {
    let d = Dir::new();
    let b = d.file("b.json", FIX_B);
    assert_eq!(call(&["count", &b, "--method", "exact-pm"]).1, "2\n");
    let (code, out, _) = call(&["--output", "json", "count", &b, "--method", "fpras", "--seed", "7"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let x = v["count"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&x), "{x}");
    assert_eq!(v["method"], "estimate");
    assert_eq!(v["seed"], 7);
}

#[test]
fn estimate_is_deterministic_per_seed() {
    let d = Dir::new();
    let b = d.file("b.json", FIX_B);
    let args = ["count", &b, "--method", "fpras", "--seed", "42", "--epsilon", "0.2"];
    assert_eq!(call(&args).1, call(&args).1);
}

#[test]
fn exact_counts_are_json_strings() {
    let d = Dir::new();
    let (_, out, _) = call(&[
        "--output",
        "json",
        "count",
        &d.file("a.json", FIX_A),
        "--method",
        "exact-pm",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], "2");
    assert!(v["seed"].is_null());
}

#[test]
fn check_and_find() {
    let d = Dir::new();
    let c = d.file("c.json", FIX_C);
    let (code, out, _) = call(&["check", &c]);
    assert_eq!((code, out.as_str()), (0, "popular matching exists\n"));
    assert_eq!(call(&["count", &c, "--method", "switching"]).1, "1\n");
    let cyc = d.file("cyc.json", CYCLIC);
    let (code, out, err) = call(&["check", &cyc]);
    assert_eq!((code, out.as_str()), (1, "no popular matching\n"));
    assert!(err.is_empty());
    assert_eq!(call(&["find", &cyc]).0, 1);

    let (code, out, _) = call(&["find", &d.file("a.json", FIX_A)]);
    assert_eq!(code, 0);
    let m = d.file("m.txt", &out);
    assert_eq!(
        call(&["validate", &d.file("a2.json", FIX_A), "--matching", &m]).1,
        "popular\n"
    );
}

#[test]
fn validate_rejects() {
    let d = Dir::new();
    let a = d.file("a.json", FIX_A);
    let m = d.file("m.txt", "a1 h1\na2 l(a2)\n");
    let (code, out, _) = call(&["validate", &a, "--matching", &m]);
    assert_eq!(code, 1);
    assert!(out.starts_with("not popular: a2 holds l(a2)"), "{out}");
}

#[test]
fn switching_export() {
    let d = Dir::new();
    let (code, out, _) = call(&["export-switching", &d.file("c.json", FIX_C)]);
    assert_eq!(code, 0);
    assert!(out.contains("h1 h2 -1 a1\n"));
    assert!(out.contains("unsat h2 1\n"));
}

#[test]
fn reductions_and_cross_check() {
    let d = Dir::new();
    let g = d.file("k22.txt", K22);
    let (code, out, _) = call(&["cross-check", &g]);
    assert_eq!(code, 0);
    assert!(out.starts_with("matchings 7\nswitching 7\noracle 7\n"));

    let (_, inst, _) = call(&["reduce-cha", &g]);
    let reduced = d.file("r.json", &inst);
    assert_eq!(call(&["count", &reduced, "--method", "switching"]).1, "7\n");
    assert_eq!(call(&["count", &reduced, "--method", "oracle"]).1, "7\n");

    let (code, out, _) = call(&["--output", "json", "reduce-hat", &d.file("b.json", FIX_B)]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dummy_count"], 2);
    assert_eq!(v["edges"].as_array().unwrap().len(), 8);
}

#[test]
fn stripped_vertices_warn() {
    let d = Dir::new();
    let (code, _, err) = call(&["reduce-cha", &d.file("g.txt", "3 1 1\n2 1\n")]);
    assert_eq!(code, 0);
    assert!(err.contains("2 isolated vertices"));
}

#[test]
fn error_exit_codes() {
    let d = Dir::new();
    assert_eq!(call(&["count", &d.file("bad.json", "{"), "--method", "oracle"]).0, 2);
    assert_eq!(call(&["count", "/nonexistent/x.json", "--method", "oracle"]).0, 2);
    assert_eq!(call(&["count", &d.file("b.json", FIX_B), "--method", "fpras"]).0, 2);
    assert_eq!(call(&["count", &d.file("c.json", FIX_C)]).0, 2);
    assert_eq!(
        call(&["count", &d.file("b2.json", FIX_B), "--method", "switching"]).0,
        2
    );
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn oracle_limit_from_environment() {
    let d = Dir::new();
    let out = Command::new(env!("CARGO_BIN_EXE_popmatch"))
        .args(["count", &d.file("a.json", FIX_A), "--method", "oracle"])
        .env("POPMATCH_ORACLE_LIMIT", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_popmatch"))
        .args(["cross-check", &d.file("k22.txt", K22)])
        .env("POPMATCH_ORACLE_LIMIT", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
