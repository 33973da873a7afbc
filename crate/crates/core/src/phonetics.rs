//! Word normalization, IPA phoneme sequences and syllable counting.
//!
//! A [`Phonemizer`] resolves a word through an optional external
//! grapheme-to-phoneme engine, the bundled pronouncing dictionary and, last,
//! an orthographic fallback that groups vowel letters. Every result is cached
//! for the lifetime of the phonemizer.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

/// Primary stress mark as written in the dictionary file.
pub const PRIMARY_STRESS: char = 'ˈ';
/// Secondary stress mark as written in the dictionary file.
pub const SECONDARY_STRESS: char = 'ˌ';

const BUNDLED_DICTIONARY: &str = include_str!("../data/pronouncing.tsv");

static BUNDLED: spin::Lazy<Arc<PronouncingDictionary>> = spin::Lazy::new(|| {
    Arc::new(PronouncingDictionary::parse(BUNDLED_DICTIONARY).expect("bundled dictionary is well formed"))
});

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PhoneticsError {
    #[error("empty word")]
    EmptyWord,
    #[error("word {0:?} cannot be resolved and the orthographic fallback is disabled")]
    UnresolvableWord(String),
    #[error("dictionary line {line}: {reason}")]
    DictionaryLine { line: usize, reason: String },
}

/// Where a [`PhonemeSequence`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhonemeSource {
    Engine,
    Dictionary,
    Fallback,
}

/// IPA phonemes of one word with the positions of its stressed nuclei.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhonemeSequence {
    phonemes: Vec<String>,
    stress_indices: Vec<usize>,
    source: PhonemeSource,
}

impl PhonemeSequence {
    /// Parses space separated IPA phonemes. Stress marks may prefix a nucleus
    /// or a syllable onset; in the latter case they attach to the next vowel.
    /// When no stress is marked, the last nucleus is taken as stressed.
    pub fn from_ipa(text: &str, source: PhonemeSource) -> Self {
        let mut phonemes = Vec::new();
        let mut stress_indices = Vec::new();
        let mut pending_stress = false;
        for raw in text.split_whitespace() {
            let mut symbol = raw;
            while let Some(rest) = symbol
                .strip_prefix(PRIMARY_STRESS)
                .or_else(|| symbol.strip_prefix(SECONDARY_STRESS))
                .or_else(|| symbol.strip_prefix('\''))
            {
                pending_stress = true;
                symbol = rest;
            }
            if symbol.is_empty() {
                continue;
            }
            if pending_stress && is_vowel_symbol(symbol) {
                stress_indices.push(phonemes.len());
                pending_stress = false;
            }
            phonemes.push(symbol.to_string());
        }
        let mut seq = PhonemeSequence { phonemes, stress_indices, source };
        if seq.stress_indices.is_empty() {
            if let Some(last) = seq.nucleus_indices().last() {
                seq.stress_indices.push(last);
            }
        }
        seq
    }

    pub fn phonemes(&self) -> &[String] {
        &self.phonemes
    }

    pub fn stress_indices(&self) -> &[usize] {
        &self.stress_indices
    }

    pub fn source(&self) -> PhonemeSource {
        self.source
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    /// Positions of vowel-class phonemes.
    pub fn nucleus_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.phonemes.iter().enumerate().filter(|(_, p)| is_vowel_symbol(p)).map(|(i, _)| i)
    }

    pub fn nucleus_count(&self) -> usize {
        self.nucleus_indices().count()
    }

    /// The last stressed nucleus, or the last nucleus when none is stressed.
    pub fn rhyme_anchor(&self) -> Option<usize> {
        self.stress_indices.iter().copied().max().or_else(|| self.nucleus_indices().last())
    }

    /// Dictionary-file rendering with stress marks restored (primary only).
    pub fn to_ipa(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.phonemes.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if self.stress_indices.contains(&i) {
                out.push(PRIMARY_STRESS);
            }
            out.push_str(p);
        }
        out
    }
}

const IPA_VOWELS: &str = "aeiouyæɑɒɔəɛɜɝɚɪʊʌɐɨʉɯɤøœɶɵɘʏᵻ";

/// True when the phoneme's first letter (ignoring stress marks) is an IPA vowel.
pub fn is_vowel_symbol(symbol: &str) -> bool {
    symbol.chars().find(|c| *c != PRIMARY_STRESS && *c != SECONDARY_STRESS).is_some_and(|c| IPA_VOWELS.contains(c))
}

/// Lowercases and strips surrounding punctuation; internal apostrophes stay.
pub fn normalize_token(raw: &str) -> String {
    let lowered: String = raw
        .chars()
        .map(|c| if c == '\u{2019}' || c == '\u{2018}' { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect();
    lowered.trim_matches(|c: char| !c.is_alphanumeric()).to_string()
}

/// Normalized, non-empty word tokens of a line. Any character other than a
/// letter, digit or apostrophe separates tokens.
pub fn tokens(line: &str) -> impl Iterator<Item = String> + '_ {
    line.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .map(normalize_token)
        .filter(|w| !w.is_empty())
}

/// Normalized final word of a line, if it has one.
pub fn last_word(line: &str) -> Option<String> {
    tokens(line).last()
}

/// Word to pronunciation map in the `word<TAB>IPA` file format.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PronouncingDictionary {
    entries: BTreeMap<String, PhonemeSequence>,
}

impl PronouncingDictionary {
    /// Parses the dictionary format. Blank lines and `#` comments are skipped;
    /// the first entry of a repeated word wins.
    pub fn parse(text: &str) -> Result<Self, PhoneticsError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((word, ipa)) = trimmed.split_once('\t') else {
                return Err(PhoneticsError::DictionaryLine {
                    line: idx + 1,
                    reason: "expected word<TAB>phonemes".into(),
                });
            };
            let word = normalize_token(word);
            if word.is_empty() {
                return Err(PhoneticsError::DictionaryLine { line: idx + 1, reason: "empty word".into() });
            }
            let seq = PhonemeSequence::from_ipa(ipa, PhonemeSource::Dictionary);
            if seq.nucleus_count() == 0 {
                return Err(PhoneticsError::DictionaryLine { line: idx + 1, reason: "no vowel".into() });
            }
            entries.entry(word).or_insert(seq);
        }
        Ok(PronouncingDictionary { entries })
    }

    /// The dictionary snapshot compiled into the crate.
    pub fn bundled() -> Arc<PronouncingDictionary> {
        BUNDLED.clone()
    }

    pub fn get(&self, word: &str) -> Option<&PhonemeSequence> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// External grapheme-to-phoneme engine. Implementations return space
/// separated IPA phonemes (stress marks allowed) or `None` when the word is
/// not covered.
pub trait G2pEngine: Send + Sync {
    fn transcribe(&self, word: &str) -> Option<String>;
}

/// Which source wins when both the engine and the dictionary know a word.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourcePreference {
    #[default]
    DictionaryFirst,
    EngineFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhonemizerConfig {
    pub preference: SourcePreference,
    pub fallback: bool,
    pub cache: bool,
}

impl Default for PhonemizerConfig {
    fn default() -> Self {
        PhonemizerConfig { preference: SourcePreference::DictionaryFirst, fallback: true, cache: true }
    }
}

/// Append-only word cache. Concurrent readers share the lock; inserts are
/// serialized and never replace an existing entry.
#[derive(Debug, Default)]
pub struct PhonemeCache {
    entries: spin::RwLock<BTreeMap<String, PhonemeSequence>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl PhonemeCache {
    pub fn get(&self, word: &str) -> Option<PhonemeSequence> {
        let found = self.entries.read().get(word).cloned();
        match found {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        found
    }

    /// Stores `seq` unless the word is already cached; returns the cached value.
    pub fn store(&self, word: &str, seq: PhonemeSequence) -> PhonemeSequence {
        self.entries.write().entry(word.to_string()).or_insert(seq).clone()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

/// Resolves words to phoneme sequences and counts syllables.
pub struct Phonemizer {
    dictionary: Arc<PronouncingDictionary>,
    engine: Option<Box<dyn G2pEngine>>,
    config: PhonemizerConfig,
    cache: PhonemeCache,
}

impl core::fmt::Debug for Phonemizer {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Phonemizer")
            .field("dictionary_entries", &self.dictionary.len())
            .field("engine", &self.engine.is_some())
            .field("config", &self.config)
            .field("cached", &self.cache.len())
            .finish()
    }
}

impl Default for Phonemizer {
    fn default() -> Self {
        Phonemizer::new(PronouncingDictionary::bundled())
    }
}

impl Phonemizer {
    pub fn new(dictionary: Arc<PronouncingDictionary>) -> Self {
        Phonemizer { dictionary, engine: None, config: PhonemizerConfig::default(), cache: PhonemeCache::default() }
    }

    pub fn with_engine(mut self, engine: Box<dyn G2pEngine>) -> Self {
        self.engine = Some(engine);
        self
    }

    pub fn with_config(mut self, config: PhonemizerConfig) -> Self {
        self.config = config;
        self
    }

    pub fn config(&self) -> PhonemizerConfig {
        self.config
    }

    pub fn dictionary(&self) -> &PronouncingDictionary {
        &self.dictionary
    }

    pub fn cache(&self) -> &PhonemeCache {
        &self.cache
    }

    /// Phonemes for `word` (normalized first). Engine and dictionary are
    /// consulted in the configured order, then the orthographic fallback.
    pub fn phonemize(&self, word: &str) -> Result<PhonemeSequence, PhoneticsError> {
        let word = normalize_token(word);
        if word.is_empty() {
            return Err(PhoneticsError::EmptyWord);
        }
        if self.config.cache {
            if let Some(seq) = self.cache.get(&word) {
                return Ok(seq);
            }
        }
        let seq = self.resolve(&word)?;
        if self.config.cache {
            return Ok(self.cache.store(&word, seq));
        }
        Ok(seq)
    }

    fn resolve(&self, word: &str) -> Result<PhonemeSequence, PhoneticsError> {
        let from_engine = || {
            self.engine
                .as_ref()
                .and_then(|e| e.transcribe(word))
                .map(|ipa| PhonemeSequence::from_ipa(&ipa, PhonemeSource::Engine))
                .filter(|s| s.nucleus_count() > 0)
        };
        let from_dictionary = || self.dictionary.get(word).cloned();
        let found = match self.config.preference {
            SourcePreference::DictionaryFirst => from_dictionary().or_else(from_engine),
            SourcePreference::EngineFirst => from_engine().or_else(from_dictionary),
        };
        match found {
            Some(seq) => Ok(seq),
            None if self.config.fallback => Ok(orthographic_fallback(word)),
            None => Err(PhoneticsError::UnresolvableWord(word.to_string())),
        }
    }

    /// Number of vowel nuclei in the word; 0 for an empty word.
    pub fn syllable_count_word(&self, word: &str) -> usize {
        // With the fallback disabled an unknown word still needs a count.
        match self.phonemize(word) {
            Ok(seq) => seq.nucleus_count(),
            Err(PhoneticsError::EmptyWord) => 0,
            Err(_) => orthographic_fallback(&normalize_token(word)).nucleus_count(),
        }
    }

    /// Sum of word syllable counts over the line's tokens.
    pub fn syllable_count_line(&self, line: &str) -> usize {
        tokens(line).map(|w| self.syllable_count_word(&w)).sum()
    }
}

/// Letter-based pronunciation guess: each maximal group of vowel letters
/// (a, e, i, o, u, y) becomes one nucleus, a silent final `e` is dropped when
/// another group exists, and at least one nucleus is always produced.
pub fn orthographic_fallback(word: &str) -> PhonemeSequence {
    let chars: Vec<char> = word.chars().filter(|c| c.is_alphanumeric()).collect();
    let is_vowel_letter = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');

    // (start, end) of each vowel-letter group
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if is_vowel_letter(chars[i]) {
            let start = i;
            while i < chars.len() && is_vowel_letter(chars[i]) {
                i += 1;
            }
            groups.push((start, i));
        } else {
            i += 1;
        }
    }
    let silent_e =
        groups.len() > 1 && groups.last().is_some_and(|&(s, e)| e == chars.len() && e - s == 1 && chars[s] == 'e');
    if silent_e {
        groups.pop();
    }

    let mut phonemes: Vec<String> = Vec::new();
    let mut i = 0;
    let mut group_iter = groups.iter().peekable();
    while i < chars.len() {
        if let Some(&&(start, end)) = group_iter.peek() {
            if i == start {
                phonemes.push(vowel_for_letter(chars[start]).to_string());
                i = end;
                group_iter.next();
                continue;
            }
        }
        let c = chars[i];
        if is_vowel_letter(c) {
            // silent final e
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (symbol, width) = match (c, next) {
            ('n', Some('g')) => ("ŋ", 2),
            ('s', Some('h')) => ("ʃ", 2),
            ('c', Some('h')) => ("tʃ", 2),
            ('t', Some('h')) => ("θ", 2),
            ('p', Some('h')) => ("f", 2),
            ('c', Some('k')) => ("k", 2),
            ('c', _) | ('q', _) => ("k", 1),
            ('x', _) => ("ks", 1),
            ('j', _) => ("dʒ", 1),
            ('g', _) => ("ɡ", 1),
            ('r', _) => ("ɹ", 1),
            _ => ("", 1),
        };
        if symbol.is_empty() {
            phonemes.push(c.to_string());
        } else if symbol == "ks" {
            phonemes.push("k".into());
            phonemes.push("s".into());
        } else {
            phonemes.push(symbol.into());
        }
        i += width;
    }
    if !phonemes.iter().any(|p| is_vowel_symbol(p)) {
        phonemes.push("ə".into());
    }
    let mut seq = PhonemeSequence { phonemes, stress_indices: Vec::new(), source: PhonemeSource::Fallback };
    if let Some(last) = seq.nucleus_indices().last() {
        seq.stress_indices.push(last);
    }
    seq
}

fn vowel_for_letter(c: char) -> &'static str {
    match c {
        'a' => "æ",
        'e' => "ɛ",
        'i' | 'y' => "ɪ",
        'o' => "ɑ",
        _ => "ʌ",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    struct FixedEngine;

    impl G2pEngine for FixedEngine {
        fn transcribe(&self, word: &str) -> Option<String> {
            (word == "cat").then(|| "k ˈɑ t".to_string())
        }
    }

    #[test]
    fn normalize_strips_case_and_punctuation() {
        assert_eq!(normalize_token("Hello,"), "hello");
        assert_eq!(normalize_token("don't"), "don't");
        assert_eq!(normalize_token("Don\u{2019}t!"), "don't");
        assert_eq!(normalize_token("—"), "");
        assert_eq!(normalize_token("\"(Yeah)\""), "yeah");
    }

    #[test]
    fn tokens_split_on_internal_punctuation() {
        let words: Vec<String> = tokens("Hey—you, don't stop-now!").collect();
        assert_eq!(words, vec!["hey", "you", "don't", "stop", "now"]);
        assert_eq!(last_word("nothing I can do,"), Some("do".into()));
        assert_eq!(last_word("... !"), None);
    }

    #[test]
    fn cat_resolves_from_dictionary() {
        let p = Phonemizer::default();
        let seq = p.phonemize("cat").unwrap();
        assert_eq!(seq.phonemes(), &["k", "æ", "t"]);
        assert_eq!(seq.source(), PhonemeSource::Dictionary);
        assert_eq!(seq.stress_indices(), &[1]);
    }

    #[test]
    fn doing_ends_in_velar_nasal_with_one_stress() {
        let seq = Phonemizer::default().phonemize("doing").unwrap();
        let tail: Vec<&str> = seq.phonemes()[seq.phonemes().len() - 2..].iter().map(String::as_str).collect();
        assert_eq!(tail, ["ɪ", "ŋ"]);
        assert_eq!(seq.stress_indices().len(), 1);
    }

    #[test]
    fn out_of_vocabulary_word_uses_fallback() {
        let p = Phonemizer::default();
        let seq = p.phonemize("zzzqx").unwrap();
        assert_eq!(seq.source(), PhonemeSource::Fallback);
        assert_eq!(seq.nucleus_count(), 1);
        let strict = Phonemizer::default().with_config(PhonemizerConfig { fallback: false, ..Default::default() });
        assert_eq!(strict.phonemize("zzzqx"), Err(PhoneticsError::UnresolvableWord("zzzqx".into())));
        assert_eq!(strict.phonemize("..."), Err(PhoneticsError::EmptyWord));
    }

    #[test]
    fn fallback_vowel_groups_and_silent_e() {
        assert_eq!(orthographic_fallback("skrrt").nucleus_count(), 1);
        assert_eq!(orthographic_fallback("bae").nucleus_count(), 1);
        assert_eq!(orthographic_fallback("vibe").nucleus_count(), 1);
        assert_eq!(orthographic_fallback("finna").nucleus_count(), 2);
        assert_eq!(orthographic_fallback("shawty").nucleus_count(), 2);
        assert_eq!(orthographic_fallback("e").nucleus_count(), 1);
        let s = orthographic_fallback("thang");
        assert_eq!(s.phonemes(), &["θ", "æ", "ŋ"]);
        assert_eq!(s.stress_indices(), &[1]);
    }

    #[test]
    fn syllable_counts() {
        let p = Phonemizer::default();
        assert_eq!(p.syllable_count_word(""), 0);
        assert_eq!(p.syllable_count_word("hello"), 2);
        assert_eq!(p.syllable_count_word("beautiful"), 3);
        assert_eq!(p.syllable_count_line(""), 0);
        assert_eq!(p.syllable_count_line("hello hello"), 4);
        assert_eq!(p.syllable_count_line("beautiful"), p.syllable_count_word("beautiful"));
    }

    #[test]
    fn stress_on_onset_moves_to_next_vowel() {
        let seq = PhonemeSequence::from_ipa("h ə ˈl oʊ", PhonemeSource::Engine);
        assert_eq!(seq.stress_indices(), &[3]);
        let unmarked = PhonemeSequence::from_ipa("b ɛ t ɚ", PhonemeSource::Engine);
        assert_eq!(unmarked.stress_indices(), &[3]);
    }

    #[test]
    fn dictionary_parse_errors_carry_line_numbers() {
        let err = PronouncingDictionary::parse("# c\ncat\tk ˈæ t\ndog d ɔ ɡ\n").unwrap_err();
        assert_eq!(err, PhoneticsError::DictionaryLine { line: 3, reason: "expected word<TAB>phonemes".into() });
        let dict = PronouncingDictionary::parse("cat\tk ˈæ t\ncat\tk ˈɑ t\n").unwrap();
        assert_eq!(dict.get("cat").unwrap().phonemes()[1], "æ");
    }

    #[test]
    fn engine_preference_is_configurable() {
        let dict_first = Phonemizer::default().with_engine(Box::new(FixedEngine));
        assert_eq!(dict_first.phonemize("cat").unwrap().phonemes()[1], "æ");
        let engine_first = Phonemizer::default()
            .with_engine(Box::new(FixedEngine))
            .with_config(PhonemizerConfig { preference: SourcePreference::EngineFirst, ..Default::default() });
        let seq = engine_first.phonemize("cat").unwrap();
        assert_eq!(seq.phonemes()[1], "ɑ");
        assert_eq!(seq.source(), PhonemeSource::Engine);
        assert_eq!(engine_first.phonemize("dog").unwrap().source(), PhonemeSource::Dictionary);
    }

    #[test]
    fn cache_counts_hits_and_keeps_first_store() {
        let p = Phonemizer::default();
        let first = p.phonemize("Hello").unwrap();
        let second = p.phonemize("hello").unwrap();
        assert_eq!(first, second);
        assert_eq!(p.cache().hits(), 1);
        assert_eq!(p.cache().misses(), 1);
        let kept = p.cache().store("hello", orthographic_fallback("hello"));
        assert_eq!(kept, first);
    }

    #[test]
    fn stress_indices_point_at_vowels_in_bundled_dictionary() {
        let dict = PronouncingDictionary::bundled();
        for word in dict.words() {
            let seq = dict.get(word).unwrap();
            assert!(!seq.is_empty(), "{word}");
            for &i in seq.stress_indices() {
                assert!(is_vowel_symbol(&seq.phonemes()[i]), "{word}: {}", seq.to_ipa());
            }
        }
    }
}
