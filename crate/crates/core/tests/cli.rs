use std::io::Write;
use std::process::{Command, Stdio};

use setforge::completion::{complete, Budget};
use setforge::io::{deserialize, serialize, GraphDocument};
use setforge::seeds::von_neumann_seed;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn setforge(args: &[&str], stdin: &str) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_setforge"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Runs each stage on the previous stage's stdout.
fn pipeline(stages: &[&[&str]]) -> Run {
    let mut input = String::new();
    let mut last = None;
    for args in stages {
        let r = setforge(args, &input);
        assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
        input = r.stdout.clone();
        last = Some(r);
    }
    last.unwrap()
}

#[test]
fn witness_pipeline_succeeds() {
    let r = setforge(
        &["check", "--witness-report"],
        &pipeline(&[&["seed", "vN", "2"], &["complete", "--levels", "2"]]).stdout,
    );
    assert_eq!(r.code, 0, "{}", r.stdout);
}

#[test]
fn piped_completion_matches_the_library() {
    let piped = pipeline(&[&["seed", "vN", "2"], &["complete", "--levels", "2"]]).stdout;
    let u = complete(&von_neumann_seed(2).unwrap(), 2, &Budget::default()).unwrap();
    assert_eq!(piped, serialize(&GraphDocument::from_universe(&u)));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let stages: &[&[&str]] = &[&["seed", "quine", "2"], &["complete", "--levels", "1"]];
    assert_eq!(pipeline(stages).stdout, pipeline(stages).stdout);
}

#[test]
fn completion_continues_existing_levels() {
    let once = pipeline(&[&["seed", "empty"], &["complete", "--levels", "3"]]).stdout;
    let twice = pipeline(&[&["seed", "empty"], &["complete", "--levels", "1"], &["complete", "--levels", "2"]]).stdout;
    assert_eq!(once, twice);
    let doc = deserialize(&once).unwrap();
    assert_eq!(doc.universe().unwrap().unwrap().level_sizes(), vec![0, 1, 2, 4]);
}

#[test]
fn budget_overrun_exits_2() {
    let seed = setforge(&["seed", "vN", "3"], "").stdout;
    let r = setforge(&["complete", "--levels", "3", "--budget", "1000000"], &seed);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
}

#[test]
fn quine_atoms_fail_foundation() {
    let seed = setforge(&["seed", "quine", "1"], "").stdout;
    let r = setforge(&["--porcelain", "check", "--axiom", "foundation_minimal"], &seed);
    assert_eq!(r.code, 1);
    let fields: Vec<&str> = r.stdout.lines().next().unwrap().split('\t').collect();
    assert_eq!(&fields[..3], &["check", "foundation_minimal", "fail"]);
}

#[test]
fn porcelain_records_have_four_fields() {
    let doc = pipeline(&[&["seed", "vN", "2"], &["complete", "--levels", "1", "--dred"]]).stdout;
    for args in [
        &["--porcelain", "check", "--witness-report"][..],
        &["--porcelain", "check", "--dred-conditions"][..],
        &["--porcelain", "check", "--axiom", "extensionality"][..],
    ] {
        let r = setforge(args, &doc);
        assert_eq!(r.code, 0, "{args:?}: {}", r.stdout);
        assert!(!r.stdout.is_empty());
        for line in r.stdout.lines() {
            let fields: Vec<&str> = line.split('\t').collect();
            assert_eq!(fields.len(), 4, "{line}");
            assert_eq!(fields[0], "check");
            assert!(["pass", "fail", "skip"].contains(&fields[2]), "{line}");
        }
    }
}

#[test]
fn eval_and_define() {
    let doc = setforge(&["seed", "vN", "3"], "").stdout;
    let r = setforge(&["eval", "--formula", "x in y", "--bind", "x=0", "--bind", "y=1"], &doc);
    assert_eq!(r.code, 0);
    let r = setforge(&["eval", "--formula", "y in x", "--bind", "x=0", "--bind", "y=1"], &doc);
    assert_eq!(r.code, 1);
    let r = setforge(&["define", "--formula", "exists y. y in x"], &doc);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.trim(), "1 2 3");
}

#[test]
fn malformed_input_exits_3() {
    assert_eq!(setforge(&["check", "--witness-report"], "{not json").code, 3);
    let plain = setforge(&["seed", "vN", "2"], "").stdout;
    assert_eq!(setforge(&["check", "--dred-conditions"], &plain).code, 3);
    let dangling = r#"{"edges":[[0,9]],"format_version":1,"nodes":[{"id":0,"provenance":{"seed":{"label":"a"}}}]}"#;
    let r = setforge(&["check", "--witness-report"], dangling);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert_eq!(setforge(&["eval", "--formula", "exists x (x in y"], "").code, 3);
}

#[test]
fn usage_errors_exit_4() {
    assert_eq!(setforge(&["frobnicate"], "").code, 4);
    let doc = setforge(&["seed", "vN", "2"], "").stdout;
    assert_eq!(setforge(&["define", "--formula", "x in y"], &doc).code, 4);
    assert_eq!(setforge(&["eval", "--formula", "x in y", "--bind", "x=0"], &doc).code, 4);
}

#[test]
fn oracle_compare_agrees() {
    let doc = setforge(&["seed", "quine", "2"], "").stdout;
    let r = setforge(&["oracle-compare", "--levels", "2"], &doc);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
}

#[test]
fn diff_detects_isomorphism() {
    let dir = std::env::temp_dir().join(format!("setforge-diff-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    let c = dir.join("c.json");
    std::fs::write(&a, pipeline(&[&["seed", "empty"], &["complete", "--levels", "3"]]).stdout).unwrap();
    std::fs::write(&b, pipeline(&[&["seed", "empty"], &["complete", "--levels", "1"], &["complete", "--levels", "2"]]).stdout).unwrap();
    std::fs::write(&c, setforge(&["seed", "vN", "2"], "").stdout).unwrap();
    let path = |p: &std::path::Path| p.to_str().unwrap().to_string();
    assert_eq!(setforge(&["diff", &path(&a), &path(&b)], "").code, 0);
    assert_eq!(setforge(&["diff", &path(&a), &path(&c)], "").code, 1);
    // Same sets, but a seed has no level structure.
    std::fs::write(&c, setforge(&["seed", "vN", "3"], "").stdout).unwrap();
    assert_eq!(setforge(&["diff", &path(&a), &path(&c)], "").code, 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

/// Reads back the node and edge lines of the DOT export.
fn parse_dot(text: &str) -> (Vec<u32>, Vec<(u32, u32)>) {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let id = |s: &str| s.trim().trim_start_matches('n').parse::<u32>().unwrap();
    for line in text.lines().map(str::trim) {
        if let Some((a, b)) = line.strip_suffix(';').and_then(|l| l.split_once("->")) {
            edges.push((id(a), id(b)));
        } else if line.starts_with('n') && line[1..].starts_with(|c: char| c.is_ascii_digit()) {
            nodes.push(id(line.split('[').next().unwrap()));
        }
    }
    (nodes, edges)
}

#[test]
fn dot_export_lists_every_node_and_edge() {
    let doc = pipeline(&[&["seed", "quine", "1"], &["complete", "--levels", "1"]]).stdout;
    let r = setforge(&["export", "--dot", "-"], &doc);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("digraph G {"));
    let (nodes, mut edges) = parse_dot(&r.stdout);
    let g = deserialize(&doc).unwrap().graph().unwrap();
    assert_eq!(nodes, g.node_ids().iter().map(|n| n.0).collect::<Vec<_>>());
    let mut expected: Vec<(u32, u32)> = g.edges().into_iter().map(|(a, b)| (a.0, b.0)).collect();
    edges.sort_unstable();
    expected.sort_unstable();
    assert_eq!(edges, expected);
}
