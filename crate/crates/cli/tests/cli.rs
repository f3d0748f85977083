//! Scripted invocations of the `gks` binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use gks_core::export::{document_from_json, document_to_json};
use gks_core::fixtures;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn gks_with_stdin(args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gks"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    if let Some(text) = stdin {
        pipe.write_all(text.as_bytes()).unwrap();
    }
    drop(pipe);
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn gks(args: &[&str]) -> Run {
    gks_with_stdin(args, None)
}

/// Runs twice and checks both runs print the same bytes.
fn gks_ok(args: &[&str]) -> String {
    let first = gks(args);
    assert_eq!(first.code, 0, "gks {args:?} failed: {}", first.stderr);
    let second = gks(args);
    assert_eq!(
        first.stdout, second.stdout,
        "gks {args:?} is not deterministic"
    );
    first.stdout
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn core_golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn assert_golden(name: &str, text: &str) {
    let path = golden_path(name);
    if std::env::var_os("GKS_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, text).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    assert_eq!(text, expected, "{name} drifted from its golden copy");
}

fn build_doc(dir: &Path, csv: &str, attr: &str, out: &str) -> String {
    let path = dir.join(out).to_string_lossy().into_owned();
    gks_ok(&[
        "build",
        "--table",
        &fixture(csv),
        "--attr",
        attr,
        "-o",
        &path,
    ]);
    path
}

fn labels_at(doc: &str, level: u64) -> Vec<String> {
    let v: Value = serde_json::from_str(doc).unwrap();
    v["gks"]["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|n| n["level"] == level)
        .map(|n| n["label"].as_str().unwrap().to_string())
        .collect()
}

fn node<'a>(doc: &'a Value, label: &str) -> &'a Value {
    doc["gks"]["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|n| n["label"] == label)
        .unwrap()
}

#[test]
fn eval_prints_extensions() {
    let out = gks_ok(&[
        "eval",
        "--table",
        &fixture("table1.csv"),
        "--formula",
        "(Theory = FCA)",
    ]);
    assert_eq!(out, "No.97\n");
    assert_golden("eval_fca.txt", &out);
    let out = gks_ok(&[
        "eval",
        "--table",
        &fixture("table1.csv"),
        "--formula",
        "(Theory = LR)",
    ]);
    assert_eq!(out, "No.25\nNo.29\n");
    let out = gks_ok(&[
        "eval",
        "--table",
        &fixture("table1.csv"),
        "--formula",
        "(Application Domain = BI)",
    ]);
    assert_eq!(out, "No.29\nNo.30\n");
}

#[test]
fn eval_shows_granule_inclusion() {
    // m(FCA) ⊆ m(Rough Sets) iff no FCA object lies outside Rough Sets
    let below = gks_ok(&[
        "eval",
        "--table",
        &fixture("table1.csv"),
        "--formula",
        "(Theory = FCA) & !(Discipline = Rough Sets)",
    ]);
    assert_eq!(below, "");
    let above = gks_ok(&[
        "eval",
        "--table",
        &fixture("table1.csv"),
        "--formula",
        "(Discipline = Rough Sets) & !(Theory = FCA)",
    ]);
    assert_eq!(above.lines().count(), 6);
}

#[test]
fn build_attribute_value_structures() {
    let dot = gks_ok(&[
        "build",
        "--table",
        &fixture("table1.csv"),
        "--attr",
        "Theory",
        "--format",
        "dot",
    ]);
    assert_eq!(dot, core_golden("table1_theory.dot"));
    let dot = gks_ok(&[
        "build",
        "--table",
        &fixture("table1.csv"),
        "--attr",
        "Application Domain",
        "--format",
        "dot",
    ]);
    assert_eq!(dot, core_golden("table1_application_domain.dot"));
    let json = gks_ok(&[
        "build",
        "--table",
        &fixture("table1.csv"),
        "--attr",
        "Theory",
        "--format",
        "json",
    ]);
    assert_eq!(json, core_golden("table1_theory.json") + "\n");

    let doc = gks_ok(&[
        "build",
        "--table",
        &fixture("corpus.csv"),
        "--attr",
        "Theory",
    ]);
    assert_eq!(labels_at(&doc, 2).len(), 9);
    let doc = gks_ok(&[
        "build",
        "--table",
        &fixture("corpus.csv"),
        "--attr",
        "Application Domain",
    ]);
    assert_eq!(labels_at(&doc, 2), ["IR", "MS", "IS", "BI", "IP"]);
}

#[test]
fn op_generalize() {
    let dir = tempfile::tempdir().unwrap();
    let th = build_doc(dir.path(), "table1.csv", "Theory", "th.json");
    let ad = build_doc(dir.path(), "table1.csv", "Application Domain", "ad.json");
    let args = [
        "op",
        "generalize",
        &th,
        &ad,
        "--shared",
        "(Discipline = Rough Sets)",
        "--label",
        "Rough Sets",
        "--format",
        "dot",
    ];
    assert_eq!(gks_ok(&args), core_golden("generalized.dot"));
    let doc = gks_ok(&args[..args.len() - 2]);
    assert_eq!(labels_at(&doc, 1), ["Rough Sets"]);
    assert_eq!(labels_at(&doc, 2), ["Theory", "Application Domain"]);

    let bad = gks(&["op", "generalize", &th, "--shared", "(Theory = LR)"]);
    assert_eq!(bad.code, 1);
    assert!(
        bad.stderr.starts_with("error[SharedNotSuper]"),
        "{}",
        bad.stderr
    );
}

#[test]
fn op_union() {
    let dir = tempfile::tempdir().unwrap();
    let a = build_doc(dir.path(), "rsfdgrc2005.csv", "Theory", "a.json");
    let b = build_doc(dir.path(), "rskt2006.csv", "Theory", "b.json");
    let delta_path = dir.path().join("delta.json");
    let delta_arg = delta_path.to_string_lossy().into_owned();
    let out = gks_ok(&["op", "union", &a, &b, "--delta", &delta_arg]);
    let doc: Value = serde_json::from_str(&out).unwrap();
    let children = labels_at(&out, 2);
    assert_eq!(children.len(), 9);
    assert_eq!(children.iter().filter(|c| *c == "DR").count(), 1);
    assert_eq!(
        node(&doc, "DR")["extension"],
        serde_json::json!([
            "rsfdgrc2005::No.04",
            "rsfdgrc2005::No.08",
            "rskt2006::No.02",
            "rskt2006::No.08"
        ])
    );
    assert!(children.contains(&"FCA".to_string()) && children.contains(&"LR".to_string()));
    let delta: Value =
        serde_json::from_str(&std::fs::read_to_string(&delta_path).unwrap()).unwrap();
    assert_eq!(delta["merged"].as_array().unwrap().len(), 6);
    assert_golden("union.json", &out);
}

#[test]
fn op_intersect() {
    let dir = tempfile::tempdir().unwrap();
    let a = build_doc(dir.path(), "rsfdgrc2005.csv", "Theory", "a.json");
    let b = build_doc(dir.path(), "rskt2006.csv", "Theory", "b.json");
    let out = gks_ok(&["op", "intersect", &a, &b]);
    assert_eq!(labels_at(&out, 2), ["R-A", "RFH", "DR", "GC", "DT"]);
}

#[test]
fn op_diff() {
    let dir = tempfile::tempdir().unwrap();
    let a = build_doc(dir.path(), "rsfdgrc2005.csv", "Theory", "a.json");
    let b = build_doc(dir.path(), "rskt2006.csv", "Theory", "b.json");
    let out = gks_ok(&["op", "diff", &a, &b]);
    assert_eq!(labels_at(&out, 2), ["LR", "RA"]);
    let dot = gks_ok(&["op", "diff", &a, &b, "--format", "dot"]);
    assert_eq!(dot, core_golden("difference.dot"));
    assert_golden("diff.json", &out);

    // piping the result back in through stdin
    let exported = gks_with_stdin(&["export", "--gks", "-", "--format", "dot"], Some(&out));
    assert_eq!(exported.code, 0);
    assert_eq!(exported.stdout, dot);
}

#[test]
fn op_product() {
    let dir = tempfile::tempdir().unwrap();
    let th = build_doc(dir.path(), "corpus.csv", "Theory", "th.json");
    let ad = build_doc(dir.path(), "corpus.csv", "Application Domain", "ad.json");
    let args = [
        "op",
        "product",
        &th,
        &ad,
        "--left",
        "LR,RA,DR",
        "--right",
        "IR,MS,IS",
        "--shared",
        "(Discipline = Rough Sets)",
        "--label",
        "Rough Sets",
        "--keep-empty",
    ];
    let out = gks_ok(&args);
    assert_eq!(labels_at(&out, 1), ["Rough Sets"]);
    assert_eq!(labels_at(&out, 2), ["Theory", "Application Domain"]);
    assert_eq!(labels_at(&out, 3), ["LR", "RA", "DR", "IR", "MS", "IS"]);
    assert_eq!(labels_at(&out, 4).len(), 9);
    let mut dot_args = args.to_vec();
    dot_args.extend(["--format", "dot"]);
    assert_eq!(gks_ok(&dot_args), core_golden("product.dot"));

    // each level-4 extension is the meet of its two parents
    let doc: Value = serde_json::from_str(&out).unwrap();
    for label in labels_at(&out, 4) {
        let (l, r) = label.split_once(" & ").unwrap();
        let ext = |n: &str| -> Vec<String> {
            serde_json::from_value(node(&doc, n)["extension"].clone()).unwrap()
        };
        let meet: Vec<String> = ext(l)
            .into_iter()
            .filter(|id| ext(r).contains(id))
            .collect();
        assert_eq!(ext(&label), meet, "{label}");
    }
}

#[test]
fn switch_view_twice_restores_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let original = document_to_json(&fixtures::fields_view_structure()) + "\n";
    let path = dir.path().join("fields.json");
    std::fs::write(&path, &original).unwrap();
    let path = path.to_string_lossy().into_owned();

    let switched = gks_ok(&[
        "switch-view",
        "--gks",
        &path,
        "--upper",
        "RS,FS",
        "--lower",
        "ML,DR",
    ]);
    assert_eq!(labels_at(&switched, 1), ["ML", "DR"]);
    assert_eq!(labels_at(&switched, 2), ["RS", "FS"]);
    let dot = gks_with_stdin(
        &["export", "--gks", "-", "--format", "dot"],
        Some(&switched),
    );
    assert_eq!(dot.stdout, core_golden("fields_switched.dot"));

    let back = gks_with_stdin(
        &[
            "switch-view",
            "--gks",
            "-",
            "--upper",
            "n2,n3",
            "--lower",
            "n0,n1",
        ],
        Some(&switched),
    );
    assert_eq!(back.code, 0, "{}", back.stderr);
    assert_eq!(back.stdout, original);
    assert_eq!(
        document_from_json(&back.stdout).unwrap(),
        fixtures::fields_view_structure()
    );
}

#[test]
fn zoom_prints_ids_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let th = build_doc(dir.path(), "table1.csv", "Theory", "th.json");
    let out = gks_ok(&[
        "zoom",
        "--gks",
        &th,
        "--direction",
        "in",
        "--nodes",
        "Theory",
    ]);
    assert_eq!(out, "n1\tR-A\nn2\tRFH\nn3\tLR\nn4\tDR\nn5\tFCA\n");
    let out = gks_ok(&[
        "zoom",
        "--gks",
        &th,
        "--direction",
        "out",
        "--nodes",
        "LR,DR",
    ]);
    assert_eq!(out, "n0\tTheory\n");
    let run = gks(&["zoom", "--gks", &th, "--direction", "out", "--nodes", "n0"]);
    assert_eq!(run.code, 1);
    assert!(
        run.stderr.starts_with("error[AtCoarsestLevel]"),
        "{}",
        run.stderr
    );
}

#[test]
fn ingest_flags_and_table_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("semi.csv");
    std::fs::write(&csv, "id|x,Colour,Size\na|1,red/blue,?\nb|2,blue,L\n").unwrap();
    let csv = csv.to_string_lossy().into_owned();
    let flags = [
        "--missing",
        "?",
        "--sep",
        "/",
        "--id-column",
        "id|x",
        "--name",
        "shapes",
    ];
    let mut args = vec!["eval", "--table", &csv, "--formula", "(Colour = blue)"];
    args.extend(flags);
    assert_eq!(gks_ok(&args), "a|1\nb|2\n");
    let mut args = vec!["eval", "--table", &csv, "--formula", "(Size != L)"];
    args.extend(flags);
    assert_eq!(gks_ok(&args), "");

    let mut args = vec!["ingest", "--table", &csv];
    args.extend(flags);
    let table_json = gks_ok(&args);
    let tpath = dir.path().join("shapes.json");
    std::fs::write(&tpath, &table_json).unwrap();
    let tpath = tpath.to_string_lossy().into_owned();
    assert_eq!(
        gks_ok(&["eval", "--table", &tpath, "--formula", "(Colour = red)"]),
        "a|1\n"
    );

    let from_stdin = gks_with_stdin(
        &["eval", "--table", "-", "--formula", "(Theory = DR)"],
        Some(fixtures::TABLE1_CSV),
    );
    assert_eq!(from_stdin.stdout, "No.21\nNo.30\n");
}

#[test]
fn exit_codes() {
    let usage = gks(&["eval", "--table", &fixture("table1.csv")]);
    assert_eq!(usage.code, 2);
    assert_eq!(gks(&["op", "merge", "a", "b"]).code, 2);
    assert_eq!(gks(&["frobnicate"]).code, 2);

    let syntax = gks(&[
        "eval",
        "--table",
        &fixture("table1.csv"),
        "--formula",
        "(Theory =",
    ]);
    assert_eq!(syntax.code, 1);
    assert!(
        syntax.stderr.starts_with("error[SyntaxError]"),
        "{}",
        syntax.stderr
    );
    assert!(syntax.stderr.contains("atom    := '(' name rel name ')'"));

    let unknown = gks(&[
        "build",
        "--table",
        &fixture("table1.csv"),
        "--attr",
        "Venue",
    ]);
    assert_eq!(unknown.code, 1);
    assert!(unknown.stderr.starts_with("error[UnknownAttribute]"));

    let dir = tempfile::tempdir().unwrap();
    let th = build_doc(dir.path(), "table1.csv", "Theory", "th.json");
    let ad = build_doc(dir.path(), "table1.csv", "Application Domain", "ad.json");
    let mismatch = gks(&["op", "union", &th, &ad]);
    assert_eq!(mismatch.code, 1);
    assert!(mismatch.stderr.starts_with("error[RootMismatch]"));

    let missing = gks(&["export", "--gks", "/nonexistent/doc.json"]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.starts_with("error[Io]"));

    let garbage = gks_with_stdin(&["export", "--gks", "-"], Some("{\"table\": 1}"));
    assert_eq!(garbage.code, 1);
    assert!(garbage.stderr.starts_with("error[SchemaError]"));
}
