//! Perfect and near rhyme detection over phoneme suffixes.
//!
//! A word's [`RhymeKey`] runs from its last stressed vowel through the end of
//! the word. Two keys are a perfect rhyme when identical. For near rhymes each
//! phoneme is replaced by the representative of its class in an
//! [`EquivalenceTable`] and one trailing deletable coda consonant is dropped;
//! equal canonical keys are a near rhyme. Because that canonical form is a
//! plain value, near rhyme is an equivalence relation and the
//! [`RhymeDictionary`] can bucket words by it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::phonetics::{self, normalize_token, PhonemeSequence, Phonemizer, PRIMARY_STRESS, SECONDARY_STRESS};

const BUNDLED_TABLE: &str = include_str!("../data/equivalence.txt");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RhymeError {
    #[error("phoneme sequence has no vowel nucleus")]
    NoNucleus,
    #[error("word {0:?} cannot be phonemized")]
    UnknownWord(String),
    #[error("equivalence table line {line}: {reason}")]
    Table { line: usize, reason: String },
}

/// Phonemes from the last stressed nucleus to the end of the word, without
/// stress marks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RhymeKey(Vec<String>);

impl RhymeKey {
    pub fn from_sequence(seq: &PhonemeSequence) -> Result<Self, RhymeError> {
        let anchor = seq.rhyme_anchor().ok_or(RhymeError::NoNucleus)?;
        Ok(RhymeKey(seq.phonemes()[anchor..].iter().map(|p| strip_marks(p)).collect()))
    }

    pub fn phonemes(&self) -> &[String] {
        &self.0
    }
}

impl core::fmt::Display for RhymeKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(p)?;
        }
        Ok(())
    }
}

fn strip_marks(p: &str) -> String {
    p.chars().filter(|c| *c != PRIMARY_STRESS && *c != SECONDARY_STRESS).collect()
}

/// Key after class mapping and coda deletion; the bucket key of the
/// rhyme dictionary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalKey(Vec<String>);

impl CanonicalKey {
    pub fn phonemes(&self) -> &[String] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhymeClass {
    None,
    Near,
    Perfect,
}

impl RhymeClass {
    pub fn rhymes(self) -> bool {
        self != RhymeClass::None
    }
}

/// Near-rhyme equivalence classes loaded from the plain-text table format:
/// `[vowel_classes]`, `[consonant_pairs]` and `[deletable_codas]` sections,
/// one class (or list of codas) per line, first symbol of a class is its
/// representative.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquivalenceTable {
    representative: BTreeMap<String, String>,
    deletable: BTreeSet<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Vowels,
    Consonants,
    Codas,
}

impl EquivalenceTable {
    pub fn parse(text: &str) -> Result<Self, RhymeError> {
        let mut table = EquivalenceTable::default();
        let mut section = Section::None;
        let mut codas = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| RhymeError::Table { line: idx + 1, reason: reason.to_string() };
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = match name.trim() {
                    "vowel_classes" => Section::Vowels,
                    "consonant_pairs" => Section::Consonants,
                    "deletable_codas" => Section::Codas,
                    _ => return Err(err("unknown section")),
                };
                continue;
            }
            match section {
                Section::None => return Err(err("entry outside of a section")),
                Section::Vowels | Section::Consonants => {
                    let members: Vec<&str> = line.split_whitespace().collect();
                    let vowels = members.iter().filter(|m| phonetics::is_vowel_symbol(m)).count();
                    let expect_vowels = section == Section::Vowels;
                    if (expect_vowels && vowels != members.len()) || (!expect_vowels && vowels != 0) {
                        return Err(err("class mixes vowels and consonants or is in the wrong section"));
                    }
                    table.add_class(&members).map_err(|_| err("symbol already belongs to a class"))?;
                }
                Section::Codas => codas.extend(line.split_whitespace().map(String::from)),
            }
        }
        for coda in codas {
            if phonetics::is_vowel_symbol(&coda) {
                return Err(RhymeError::Table { line: 0, reason: alloc::format!("vowel {coda:?} listed as coda") });
            }
            let rep = table.representative_of(&coda).to_string();
            table.deletable.insert(rep);
        }
        Ok(table)
    }

    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        EquivalenceTable::parse(BUNDLED_TABLE).expect("bundled equivalence table is well formed")
    }

    /// Identity classes and no deletable codas: near rhyme collapses to
    /// perfect rhyme.
    pub fn strict() -> Self {
        EquivalenceTable::default()
    }

    fn add_class(&mut self, members: &[&str]) -> Result<(), ()> {
        let Some(first) = members.first() else { return Ok(()) };
        if members.iter().any(|m| self.representative.contains_key(*m)) {
            return Err(());
        }
        for m in members {
            self.representative.insert(m.to_string(), first.to_string());
        }
        Ok(())
    }

    pub fn representative_of<'a>(&'a self, symbol: &'a str) -> &'a str {
        self.representative.get(symbol).map(String::as_str).unwrap_or(symbol)
    }

    /// Class-mapped key with one trailing deletable consonant removed, as long
    /// as the nucleus remains.
    pub fn canonical(&self, key: &RhymeKey) -> CanonicalKey {
        let mut out: Vec<String> = key.0.iter().map(|p| self.representative_of(p).to_string()).collect();
        if out.len() > 1 && out.last().is_some_and(|p| self.deletable.contains(p)) {
            out.pop();
        }
        CanonicalKey(out)
    }
}

/// Phonemizer plus equivalence table: everything needed to compare words.
#[derive(Debug, Default)]
pub struct Rhymer {
    phonemizer: Phonemizer,
    table: EquivalenceTable,
}

impl Rhymer {
    pub fn new(phonemizer: Phonemizer, table: EquivalenceTable) -> Self {
        Rhymer { phonemizer, table }
    }

    /// Bundled dictionary and bundled equivalence table.
    pub fn bundled() -> Self {
        Rhymer::new(Phonemizer::default(), EquivalenceTable::bundled())
    }

    pub fn phonemizer(&self) -> &Phonemizer {
        &self.phonemizer
    }

    pub fn table(&self) -> &EquivalenceTable {
        &self.table
    }

    pub fn rhyme_key(&self, word: &str) -> Result<RhymeKey, RhymeError> {
        let seq = self.phonemizer.phonemize(word).map_err(|_| RhymeError::UnknownWord(normalize_token(word)))?;
        RhymeKey::from_sequence(&seq)
    }

    pub fn canonical_key(&self, word: &str) -> Result<CanonicalKey, RhymeError> {
        Ok(self.table.canonical(&self.rhyme_key(word)?))
    }

    /// Symmetric rhyme classification; identical words are `Perfect`.
    pub fn classify(&self, a: &str, b: &str) -> Result<RhymeClass, RhymeError> {
        let (a, b) = (normalize_token(a), normalize_token(b));
        let (ka, kb) = (self.rhyme_key(&a)?, self.rhyme_key(&b)?);
        if a == b || ka == kb {
            return Ok(RhymeClass::Perfect);
        }
        if self.table.canonical(&ka) == self.table.canonical(&kb) {
            return Ok(RhymeClass::Near);
        }
        Ok(RhymeClass::None)
    }

    /// `classify` with unphonemizable words treated as non-rhyming.
    pub fn rhymes(&self, a: &str, b: &str) -> bool {
        self.classify(a, b).is_ok_and(RhymeClass::rhymes)
    }
}

/// Corpus words bucketed by canonical rhyme key, with occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RhymeDictionary {
    buckets: BTreeMap<CanonicalKey, BTreeMap<String, u64>>,
    word_bucket: BTreeMap<String, CanonicalKey>,
    skipped: usize,
}

/// One ranked rhyme suggestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedRhyme {
    pub word: String,
    pub frequency: u64,
}

impl RhymeDictionary {
    /// Counts every token of every line and buckets each distinct word that
    /// has a vowel nucleus.
    pub fn from_lines<'a, I>(lines: I, rhymer: &Rhymer) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for line in lines {
            for word in phonetics::tokens(line) {
                *counts.entry(word).or_default() += 1;
            }
        }
        RhymeDictionary::from_frequencies(counts, rhymer)
    }

    pub fn from_corpus(corpus: &crate::corpus::Corpus, rhymer: &Rhymer) -> Self {
        RhymeDictionary::from_lines(corpus.lines(), rhymer)
    }

    /// Builds from precomputed `(word, frequency)` pairs; repeated words add up.
    pub fn from_frequencies<I, S>(freqs: I, rhymer: &Rhymer) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut dict = RhymeDictionary::default();
        for (word, freq) in freqs {
            let word = normalize_token(word.as_ref());
            if word.is_empty() {
                continue;
            }
            if let Some(key) = dict.word_bucket.get(&word) {
                *dict.buckets.get_mut(key).and_then(|b| b.get_mut(&word)).expect("indexed word") += freq;
                continue;
            }
            match rhymer.canonical_key(&word) {
                Ok(key) => {
                    dict.buckets.entry(key.clone()).or_default().insert(word.clone(), freq);
                    dict.word_bucket.insert(word, key);
                }
                Err(_) => dict.skipped += 1,
            }
        }
        dict
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn word_count(&self) -> usize {
        self.word_bucket.len()
    }

    /// Words left out because they had no vowel nucleus.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        let key = self.word_bucket.get(word)?;
        self.buckets.get(key)?.get(word).copied()
    }

    pub fn bucket(&self, key: &CanonicalKey) -> Option<&BTreeMap<String, u64>> {
        self.buckets.get(key)
    }

    pub fn bucket_of_word(&self, word: &str) -> Option<&BTreeMap<String, u64>> {
        self.bucket(self.word_bucket.get(word)?)
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&CanonicalKey, &BTreeMap<String, u64>)> {
        self.buckets.iter()
    }

    /// All corpus words and their frequencies, in word order.
    pub fn words(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.word_bucket.keys().map(move |w| (w.as_str(), self.frequency(w).unwrap_or(0)))
    }

    /// Up to `k` rhymes of `word` from the corpus, most frequent first, ties
    /// in lexicographic order. The query word itself is never returned.
    pub fn top_rhymes(&self, rhymer: &Rhymer, word: &str, k: usize) -> Result<Vec<RankedRhyme>, RhymeError> {
        let query = normalize_token(word);
        let key = rhymer.canonical_key(&query).map_err(|_| RhymeError::UnknownWord(query.clone()))?;
        let Some(bucket) = self.buckets.get(&key) else { return Ok(Vec::new()) };
        let mut ranked: Vec<RankedRhyme> = bucket
            .iter()
            .filter(|(w, _)| **w != query)
            .map(|(w, f)| RankedRhyme { word: w.clone(), frequency: *f })
            .collect();
        ranked.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.word.cmp(&b.word)));
        ranked.truncate(k);
        Ok(ranked)
    }
}

/// Default number of rhymes offered per query.
pub const DEFAULT_TOP_RHYMES: usize = 8;
