mod common;

use std::fs;

use common::{cli, cli_ok, fixture};
use lyricraft::dataset_io;
use serde_json::Value;

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(cli(&[]).status.code(), Some(1));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cli(&["build-dataset", "--input", "x", "--out-dir", "y", "--kind", "bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["--version"]).status.code(), Some(0));
    let out = cli(&["suggest", "--line", "hello", "--end-word", "home", "--force-rhyme", "--model", "m.json"]);
    assert_eq!(out.status.code(), Some(2), "missing model file is a data error");
}

#[test]
fn data_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"id\":\"a\",\"artist\":\"x\",\"title\":\"t\",\"verses\":[[\"l\"]]}\n{broken\n").unwrap();
    let out = cli(&["preprocess", "--input", s(&bad), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("record 2"), "{stderr}");

    let dup = dir.path().join("dup.jsonl");
    let song = "{\"id\":\"a\",\"artist\":\"x\",\"title\":\"t\",\"verses\":[[\"l\"]]}\n";
    fs::write(&dup, format!("{song}{song}")).unwrap();
    let out = cli(&["preprocess", "--input", s(&dup), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate song id"));

    let tsv = dir.path().join("bad.tsv");
    fs::write(&tsv, "finish lines: a\tb\nno tab here\n").unwrap();
    let out = cli(&["evaluate", "--dataset", s(&tsv), "--backend", "echo"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let out = cli(&["preprocess", "--input", "/nonexistent.jsonl", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    cli_ok(&["preprocess", "--input", s(&fixture()), "--out-dir", s(&p("pre"))]);
    let stats: Value = serde_json::from_slice(&fs::read(p("pre/stats.json")).unwrap()).unwrap();
    assert_eq!(stats["verses_in"], 50);
    assert_eq!(stats["songs_dropped_language"], 2);
    for f in ["filtered.jsonl", "train.jsonl", "test.jsonl"] {
        assert!(p("pre").join(f).exists());
    }

    cli_ok(&[
        "build-dataset",
        "--input",
        s(&p("pre/filtered.jsonl")),
        "--out-dir",
        s(&p("ds")),
        "--rhyme-list-size",
        "40",
    ]);
    let manifest = dataset_io::read_manifest(&p("ds/manifest.json")).unwrap();
    assert_eq!(manifest.tasks.len(), 3);
    assert_eq!(manifest.tasks[0].examples, manifest.tasks[1].examples);
    assert_eq!(manifest.tasks[2].examples, 40);

    cli_ok(&[
        "build-dataset",
        "--input",
        s(&p("pre/filtered.jsonl")),
        "--out-dir",
        s(&p("ctl")),
        "--kind",
        "control",
        "--control-syllable-tag",
    ]);
    let control = dataset_io::read_tsv(&p("ctl/control.tsv")).unwrap();
    assert!(control.iter().all(|e| e.syllable_tag.is_some()));

    let report = cli_ok(&["evaluate", "--dataset", s(&p("ds/rhyme.tsv")), "--backend", "echo"]);
    let report: Value = serde_json::from_slice(&report.stdout).unwrap();
    assert_eq!(report["bleu"], 100.0);
    assert_eq!(report["end_word_accuracy"], 1.0);
    assert_eq!(report["dataset_id"], "rhyme");

    cli_ok(&["train-baseline", "--input", s(&p("pre/train.jsonl")), "--order", "2", "--out", s(&p("m.json"))]);
    cli_ok(&["evaluate", "--dataset", s(&p("ds/ending.tsv")), "--model", s(&p("m.json")), "--out", s(&p("r.json"))]);
    let report: Value = serde_json::from_slice(&fs::read(p("r.json")).unwrap()).unwrap();
    assert_eq!(report["backend_id"], "ngram-baseline");
    assert_eq!(report["end_word_accuracy"], 1.0, "ending-word queries always end on the word");

    let out = cli_ok(&[
        "suggest",
        "--model",
        s(&p("m.json")),
        "--corpus",
        s(&p("pre/train.jsonl")),
        "--line",
        "we danced until the night",
        "--force-rhyme",
        "--k",
        "2",
        "--json",
    ]);
    let set: Value = serde_json::from_slice(&out.stdout).unwrap();
    let queries = set["queries"].as_array().unwrap();
    assert!(!queries.is_empty() && queries.len() <= 8);

    let out = cli_ok(&["rhymes", "day", "--k", "3", "--corpus", s(&p("pre/train.jsonl"))]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);

    let out = cli(&["suggest", "--model", s(&p("m.json")), "--line", "hi", "--end-word", "x", "--force-rhyme"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unreachable_remote_exits_3() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let out =
        cli(&["suggest", "--backend", "remote", "--endpoint", &format!("http://127.0.0.1:{port}/"), "--line", "hello"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn custom_phonetics_files() {
    let dir = tempfile::tempdir().unwrap();
    let dict = dir.path().join("dict.tsv");
    fs::write(&dict, "# tiny\nzorb\tz ˈɔ ɹ b\nkorb\tk ˈɔ ɹ b\n").unwrap();
    let corpus = dir.path().join("c.jsonl");
    fs::write(&corpus, "{\"id\":\"a\",\"artist\":\"x\",\"title\":\"t\",\"verses\":[[\"zorb korb korb\"]]}\n").unwrap();
    let out = cli_ok(&["rhymes", "zorb", "--corpus", s(&corpus), "--dictionary", s(&dict), "--no-fallback"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "korb\t2");

    fs::write(&dict, "zorb\tz ˈɔ ɹ b\nbroken line\n").unwrap();
    let out = cli(&["rhymes", "zorb", "--dictionary", s(&dict)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("record 2"));

    let table = dir.path().join("eq.txt");
    fs::write(&table, "[vowel_classes]\nə t\n").unwrap();
    assert_eq!(cli(&["rhymes", "day", "--equivalence-table", s(&table)]).status.code(), Some(2));
}
