#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lyricraft_core::generation::{GenerationBackend, GenerationError};
use lyricraft_core::Corpus;
use rand::RngCore;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn fixture() -> PathBuf {
    data("synthetic_corpus.jsonl")
}

pub fn fixture_corpus() -> Corpus {
    lyricraft::corpus_io::read_corpus(&fixture()).expect("fixture parses")
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyricraft")).args(args).output().expect("binary runs")
}

pub fn cli_ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Straightforward Ratcliff/Obershelp: exhaustive search for the longest
/// common block (earliest in `a`, then in `b`), recursing on both sides.
pub fn reference_gestalt(a: &str, b: &str) -> f64 {
    fn matched(a: &[char], b: &[char]) -> usize {
        let mut best = (0, 0, 0);
        for i in 0..a.len() {
            for j in 0..b.len() {
                let mut k = 0;
                while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                    k += 1;
                }
                if k > best.2 {
                    best = (i, j, k);
                }
            }
        }
        let (i, j, k) = best;
        if k == 0 {
            return 0;
        }
        k + matched(&a[..i], &b[..j]) + matched(&a[i + k..], &b[j + k..])
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * matched(&a, &b) as f64 / (a.len() + b.len()) as f64
}

/// Independent implementation of the preprocessing rules. Returns the kept
/// verses as `(song id, lines)` in corpus order.
pub fn reference_preprocess(corpus: &Corpus, stopwords: &BTreeSet<String>) -> Vec<(String, Vec<String>)> {
    let mut kept = Vec::new();
    for song in corpus.songs() {
        let english = match &song.language_tag {
            Some(tag) => {
                let t = tag.trim().to_lowercase();
                ["en", "eng", "english"].contains(&t.as_str()) || t.starts_with("en-") || t.starts_with("en_")
            }
            None => {
                let tokens: Vec<String> = song
                    .verses
                    .iter()
                    .flat_map(|v| v.lines.iter())
                    .flat_map(|l| {
                        l.to_lowercase()
                            .split(|c: char| !(c.is_alphanumeric() || c == '\''))
                            .filter(|t| !t.is_empty())
                            .map(String::from)
                            .collect::<Vec<_>>()
                    })
                    .collect();
                let hits = tokens.iter().filter(|t| stopwords.contains(*t)).count();
                !tokens.is_empty() && hits as f64 / tokens.len() as f64 > 0.25
            }
        };
        if !english {
            continue;
        }
        for verse in &song.verses {
            let mut lines: Vec<String> = Vec::new();
            for line in &verse.lines {
                if lines.last().is_some_and(|prev| reference_gestalt(prev, line) > 0.70) {
                    continue;
                }
                lines.push(line.clone());
            }
            let chars: usize = lines.iter().map(|l| l.chars().count()).sum();
            if lines.len() < 6 || chars < 50 {
                continue;
            }
            kept.push((song.id.clone(), lines));
        }
    }
    kept
}

pub fn bundled_stopwords() -> BTreeSet<String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/stopwords.txt");
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Counts calls and remembers every distinct input it was asked about.
pub struct Counting<B> {
    pub inner: B,
    pub calls: AtomicUsize,
    pub inputs: Mutex<BTreeSet<String>>,
}

impl<B> Counting<B> {
    pub fn new(inner: B) -> Self {
        Counting { inner, calls: AtomicUsize::new(0), inputs: Mutex::new(BTreeSet::new()) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<B: GenerationBackend> GenerationBackend for Counting<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn generate(&self, input: &str, k: usize, rng: &mut dyn RngCore) -> Result<Vec<String>, GenerationError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inputs.lock().unwrap().insert(input.to_string());
        self.inner.generate(input, k, rng)
    }
}

/// Always returns the same line.
pub struct Fixed(pub &'static str);

impl GenerationBackend for Fixed {
    fn id(&self) -> &str {
        "fixed"
    }

    fn generate(&self, _: &str, k: usize, _: &mut dyn RngCore) -> Result<Vec<String>, GenerationError> {
        Ok(vec![self.0.to_string(); k])
    }
}
