//! Lyric corpora and the preprocessing rules applied before dataset building.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::phonetics;

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("duplicate song id {0:?}")]
    DuplicateId(String),
    #[error("test fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verse {
    pub lines: Vec<String>,
}

impl Verse {
    pub fn new<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Verse { lines: lines.into_iter().map(Into::into).collect() }
    }

    /// Total characters over all lines (line breaks not counted).
    pub fn char_len(&self) -> usize {
        self.lines.iter().map(|l| l.chars().count()).sum()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Song {
    pub id: String,
    pub artist: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_tag: Option<String>,
    pub verses: Vec<Verse>,
}

/// Songs with unique ids, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    songs: Vec<Song>,
}

impl Corpus {
    pub fn new(songs: Vec<Song>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for song in &songs {
            if !seen.insert(song.id.as_str()) {
                return Err(CorpusError::DuplicateId(song.id.clone()));
            }
        }
        Ok(Corpus { songs })
    }

    pub fn songs(&self) -> &[Song] {
        &self.songs
    }

    pub fn into_songs(self) -> Vec<Song> {
        self.songs
    }

    pub fn len(&self) -> usize {
        self.songs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.songs.is_empty()
    }

    pub fn verse_count(&self) -> usize {
        self.songs.iter().map(|s| s.verses.len()).sum()
    }

    pub fn lines(&self) -> impl Iterator<Item = &str> {
        self.songs.iter().flat_map(|s| s.verses.iter()).flat_map(|v| v.lines.iter()).map(String::as_str)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.songs.iter().map(|s| s.id.as_str())
    }

    fn from_filtered(songs: Vec<Song>) -> Self {
        Corpus { songs }
    }
}

/// Ratcliff/Obershelp gestalt ratio `2M / T` over characters, where `M` is the
/// total size of the matching blocks found by recursively taking the longest
/// common substring (leftmost in `a`, then leftmost in `b`) and `T` the sum of
/// both lengths. Two empty strings score 1.0.
pub fn gestalt_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * matched_chars(&a, &b) as f64 / total as f64
}

fn matched_chars(a: &[char], b: &[char]) -> usize {
    let mut matched = 0;
    let mut pending = alloc::vec![(0, a.len(), 0, b.len())];
    // one row of the longest-suffix table, indexed by position in b + 1
    let mut prev = alloc::vec![0usize; b.len() + 1];
    let mut cur = alloc::vec![0usize; b.len() + 1];
    while let Some((alo, ahi, blo, bhi)) = pending.pop() {
        let (mut best_i, mut best_j, mut best) = (alo, blo, 0);
        prev[blo..=bhi].fill(0);
        for (i, ai) in a.iter().enumerate().take(ahi).skip(alo) {
            cur[blo] = 0;
            for j in blo..bhi {
                let k = if *ai == b[j] { prev[j] + 1 } else { 0 };
                cur[j + 1] = k;
                if k > best {
                    best = k;
                    best_i = i + 1 - k;
                    best_j = j + 1 - k;
                }
            }
            core::mem::swap(&mut prev, &mut cur);
        }
        if best == 0 {
            continue;
        }
        matched += best;
        if alo < best_i && blo < best_j {
            pending.push((alo, best_i, blo, best_j));
        }
        if best_i + best < ahi && best_j + best < bhi {
            pending.push((best_i + best, ahi, best_j + best, bhi));
        }
    }
    matched
}

/// Drops every line whose similarity to the last retained line is strictly
/// greater than `threshold`.
pub fn dedup_consecutive(verse: &Verse, threshold: f64) -> Verse {
    let mut kept: Vec<String> = Vec::with_capacity(verse.lines.len());
    for line in &verse.lines {
        match kept.last() {
            Some(last) if gestalt_similarity(last, line) > threshold => {}
            _ => kept.push(line.clone()),
        }
    }
    Verse { lines: kept }
}

/// Thresholds of the preprocessing rules. All comparisons are strict: a line
/// is a duplicate above `similarity_threshold`, a verse is too short below
/// `min_lines` lines or below `min_chars` characters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterRules {
    pub similarity_threshold: f64,
    pub min_lines: usize,
    pub min_chars: usize,
}

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules { similarity_threshold: 0.70, min_lines: 6, min_chars: 50 }
    }
}

impl FilterRules {
    pub fn keeps(&self, verse: &Verse) -> bool {
        verse.len() >= self.min_lines && verse.char_len() >= self.min_chars
    }
}

/// Keeps verses that pass `rules`, dropping songs left without verses.
pub fn filter_verses(corpus: &Corpus, rules: &FilterRules) -> Corpus {
    let songs = corpus
        .songs
        .iter()
        .filter_map(|song| {
            let verses: Vec<Verse> = song.verses.iter().filter(|v| rules.keeps(v)).cloned().collect();
            (!verses.is_empty()).then(|| Song { verses, ..song.clone() })
        })
        .collect();
    Corpus::from_filtered(songs)
}

/// English detection from language tags, with a stopword-ratio test for
/// untagged songs.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageFilter {
    stopwords: BTreeSet<String>,
    /// Untagged songs are English when the stopword share of their tokens is
    /// strictly greater than this.
    pub stopword_floor: f64,
}

impl Default for LanguageFilter {
    fn default() -> Self {
        LanguageFilter::new(BUNDLED_STOPWORDS.lines(), 0.25)
    }
}

impl LanguageFilter {
    pub fn new<I, S>(stopwords: I, stopword_floor: f64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let stopwords =
            stopwords.into_iter().map(|w| phonetics::normalize_token(w.as_ref())).filter(|w| !w.is_empty()).collect();
        LanguageFilter { stopwords, stopword_floor }
    }

    pub fn stopword_ratio(&self, song: &Song) -> f64 {
        let (mut hits, mut total) = (0usize, 0usize);
        for line in song.verses.iter().flat_map(|v| v.lines.iter()) {
            for token in phonetics::tokens(line) {
                total += 1;
                hits += usize::from(self.stopwords.contains(&token));
            }
        }
        if total == 0 {
            0.0
        } else {
            hits as f64 / total as f64
        }
    }

    pub fn is_english(&self, song: &Song) -> bool {
        match &song.language_tag {
            Some(tag) => is_english_tag(tag),
            None => self.stopword_ratio(song) > self.stopword_floor,
        }
    }
}

fn is_english_tag(tag: &str) -> bool {
    let tag = tag.trim().to_ascii_lowercase();
    tag == "en" || tag == "eng" || tag == "english" || tag.starts_with("en-") || tag.starts_with("en_")
}

pub fn filter_language(corpus: &Corpus, filter: &LanguageFilter) -> Corpus {
    Corpus::from_filtered(corpus.songs.iter().filter(|s| filter.is_english(s)).cloned().collect())
}

/// Counts of what each preprocessing rule removed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessStats {
    pub songs_in: usize,
    pub verses_in: usize,
    pub songs_dropped_language: usize,
    pub lines_deduplicated: usize,
    pub verses_dropped_line_count: usize,
    pub verses_dropped_length: usize,
    pub songs_dropped_empty: usize,
    pub songs_out: usize,
    pub verses_out: usize,
}

impl PreprocessStats {
    pub fn total_drops(&self) -> usize {
        self.songs_dropped_language
            + self.lines_deduplicated
            + self.verses_dropped_line_count
            + self.verses_dropped_length
            + self.songs_dropped_empty
    }
}

/// Language filter, then per-verse dedup, then the verse length rules.
pub fn preprocess(corpus: &Corpus, rules: &FilterRules, language: &LanguageFilter) -> (Corpus, PreprocessStats) {
    let mut stats = PreprocessStats { songs_in: corpus.len(), verses_in: corpus.verse_count(), ..Default::default() };
    let english = filter_language(corpus, language);
    stats.songs_dropped_language = corpus.len() - english.len();

    let mut songs = Vec::with_capacity(english.len());
    for song in english.songs {
        let mut verses = Vec::with_capacity(song.verses.len());
        for verse in &song.verses {
            let deduped = dedup_consecutive(verse, rules.similarity_threshold);
            stats.lines_deduplicated += verse.len() - deduped.len();
            if deduped.len() < rules.min_lines {
                stats.verses_dropped_line_count += 1;
            } else if deduped.char_len() < rules.min_chars {
                stats.verses_dropped_length += 1;
            } else {
                verses.push(deduped);
            }
        }
        if verses.is_empty() {
            stats.songs_dropped_empty += 1;
        } else {
            songs.push(Song { verses, ..song });
        }
    }
    let out = Corpus::from_filtered(songs);
    stats.songs_out = out.len();
    stats.verses_out = out.verse_count();
    (out, stats)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
    /// When non-empty, only these artists are used.
    #[serde(default)]
    pub allow_artists: Vec<String>,
    /// Artists removed before splitting.
    #[serde(default)]
    pub deny_artists: Vec<String>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { test_fraction: 0.1, seed: 0, allow_artists: Vec::new(), deny_artists: Vec::new() }
    }
}

impl SplitConfig {
    fn artist_allowed(&self, artist: &str) -> bool {
        let artist = artist.trim().to_lowercase();
        let listed = |list: &[String]| list.iter().any(|a| a.trim().to_lowercase() == artist);
        !listed(&self.deny_artists) && (self.allow_artists.is_empty() || listed(&self.allow_artists))
    }
}

/// Partitions songs into `(train, test)` after applying the artist lists.
/// `round(n * test_fraction)` songs, clamped to `1..n`, go to test; a
/// single-song corpus goes entirely to train. Both halves keep input order.
pub fn split_by_song(corpus: &Corpus, cfg: &SplitConfig) -> Result<(Corpus, Corpus), CorpusError> {
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(cfg.test_fraction));
    }
    let songs: Vec<&Song> = corpus.songs.iter().filter(|s| cfg.artist_allowed(&s.artist)).collect();
    let n = songs.len();
    if n == 0 {
        return Err(CorpusError::EmptyCorpus);
    }
    let n_test = if n == 1 { 0 } else { (libm::round(n as f64 * cfg.test_fraction) as usize).clamp(1, n - 1) };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut crate::seeded_rng(cfg.seed));
    let test_idx: BTreeSet<usize> = order[..n_test].iter().copied().collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, song) in songs.into_iter().enumerate() {
        if test_idx.contains(&i) {
            test.push(song.clone());
        } else {
            train.push(song.clone());
        }
    }
    Ok((Corpus::from_filtered(train), Corpus::from_filtered(test)))
}

impl Song {
    pub fn new(id: impl Into<String>, artist: impl Into<String>, title: impl Into<String>, verses: Vec<Verse>) -> Self {
        Song { id: id.into(), artist: artist.into(), title: title.into(), language_tag: None, verses }
    }

    pub fn with_language(mut self, tag: &str) -> Self {
        self.language_tag = Some(tag.to_string());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn song(id: &str, artist: &str, verses: Vec<Verse>) -> Song {
        Song::new(id, artist, format!("title {id}"), verses)
    }

    #[test]
    fn gestalt_examples() {
        assert_eq!(gestalt_similarity("abc", "abc"), 1.0);
        assert_eq!(gestalt_similarity("abc", "xyz"), 0.0);
        assert_eq!(gestalt_similarity("hello", "hello world"), 0.625);
        assert_eq!(gestalt_similarity("", ""), 1.0);
        assert_eq!(gestalt_similarity("", "a"), 0.0);
    }

    #[test]
    fn gestalt_matches_difflib_values() {
        // SequenceMatcher(None, a, b, autojunk=False).ratio()
        let cases = [
            ("la la land", "la la la", 0.8888888888888888),
            ("abcd", "bcda", 0.75),
            ("I want it that way", "I want it this way", 0.8888888888888888),
            ("tell me why", "ain't nothing but a heartache", 0.15),
        ];
        for (a, b, want) in cases {
            assert!((gestalt_similarity(a, b) - want).abs() < 1e-12, "{a:?} {b:?}");
        }
    }

    #[test]
    fn dedup_collapses_runs() {
        let v = Verse::new(["la la", "la la", "end"]);
        assert_eq!(dedup_consecutive(&v, 0.70).lines, ["la la", "end"]);
        let distinct = Verse::new(["first line here", "something else", "zzz"]);
        assert_eq!(dedup_consecutive(&distinct, 0.70), distinct);
        assert_eq!(dedup_consecutive(&v, 1.0), v);
        // compares against the last kept line, not the raw predecessor
        let run = Verse::new(["oh oh oh oh", "oh oh oh oh!", "oh oh oh oh!!", "done"]);
        assert_eq!(dedup_consecutive(&run, 0.70).lines, ["oh oh oh oh", "done"]);
    }

    #[test]
    fn verse_filter_boundaries() {
        let five = Verse::new(["aaaaaaaaaaaa"; 5]);
        let six_49 = Verse::new(["aaaaaaaa", "aaaaaaaa", "aaaaaaaa", "aaaaaaaa", "aaaaaaaa", "aaaaaaaaa"]);
        let six_50 = Verse::new(["aaaaaaaa", "aaaaaaaa", "aaaaaaaa", "aaaaaaaa", "aaaaaaaaa", "aaaaaaaaa"]);
        assert_eq!(six_49.char_len(), 49);
        assert_eq!(six_50.char_len(), 50);
        let rules = FilterRules::default();
        assert!(!rules.keeps(&five));
        assert!(!rules.keeps(&six_49));
        assert!(rules.keeps(&six_50));
        let corpus =
            Corpus::new(vec![song("a", "x", vec![five, six_50.clone()]), song("b", "x", vec![six_49])]).unwrap();
        let out = filter_verses(&corpus, &rules);
        assert_eq!(out.len(), 1);
        assert_eq!(out.songs()[0].verses, [six_50]);
    }

    #[test]
    fn language_filter() {
        let english = Verse::new(["I want you to know that I am here for you"]);
        let spanish = Verse::new(["quiero bailar contigo esta noche bonita"]);
        let f = LanguageFilter::default();
        assert!(f.is_english(&song("1", "a", vec![spanish.clone()]).with_language("en")));
        assert!(!f.is_english(&song("2", "a", vec![english.clone()]).with_language("es")));
        assert!(f.is_english(&song("3", "a", vec![english])));
        assert!(!f.is_english(&song("4", "a", vec![spanish])));
        assert!(f.is_english(&song("5", "a", vec![]).with_language("en-US")));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Corpus::new(vec![song("x", "a", vec![]), song("x", "b", vec![])]).unwrap_err();
        assert_eq!(err, CorpusError::DuplicateId("x".into()));
    }

    #[test]
    fn split_partitions_deterministically() {
        let songs: Vec<Song> = (0..10).map(|i| song(&format!("s{i}"), "a", vec![])).collect();
        let corpus = Corpus::new(songs).unwrap();
        let cfg = SplitConfig { test_fraction: 0.2, seed: 7, ..Default::default() };
        let (train, test) = split_by_song(&corpus, &cfg).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let train_ids: BTreeSet<&str> = train.ids().collect();
        assert!(test.ids().all(|id| !train_ids.contains(id)));
        assert_eq!(split_by_song(&corpus, &cfg).unwrap(), (train, test));
    }

    #[test]
    fn split_applies_artist_lists() {
        let corpus = Corpus::new(vec![
            song("1", "Pop Star", vec![]),
            song("2", "Rock Band", vec![]),
            song("3", "pop star", vec![]),
            song("4", "Other", vec![]),
        ])
        .unwrap();
        let deny = SplitConfig { test_fraction: 0.5, deny_artists: vec!["rock band".into()], ..Default::default() };
        let (train, test) = split_by_song(&corpus, &deny).unwrap();
        assert!(train.ids().chain(test.ids()).all(|id| id != "2"));
        assert_eq!(train.len() + test.len(), 3);
        let allow = SplitConfig { test_fraction: 0.5, allow_artists: vec!["Pop Star".into()], ..Default::default() };
        let (train, test) = split_by_song(&corpus, &allow).unwrap();
        let mut ids: Vec<&str> = train.ids().chain(test.ids()).collect();
        ids.sort();
        assert_eq!(ids, ["1", "3"]);
        let nobody = SplitConfig { allow_artists: vec!["nobody".into()], ..Default::default() };
        assert_eq!(split_by_song(&corpus, &nobody), Err(CorpusError::EmptyCorpus));
        let bad = SplitConfig { test_fraction: 1.0, ..Default::default() };
        assert_eq!(split_by_song(&corpus, &bad), Err(CorpusError::InvalidFraction(1.0)));
    }

    #[test]
    fn preprocess_counts_each_rule() {
        let good = Verse::new([
            "I walked along the river",
            "the water running cold",
            "I thought about the summer",
            "and the stories that we told",
            "the sky was turning silver",
            "and the night was getting old",
        ]);
        let repetitive = Verse::new(["na na na", "na na na", "na na na", "hey", "hey", "hey", "ok"]);
        let corpus = Corpus::new(vec![
            song("a", "x", vec![good.clone(), repetitive]),
            song("b", "x", vec![Verse::new(["hola"])]).with_language("es"),
        ])
        .unwrap();
        let (out, stats) = preprocess(&corpus, &FilterRules::default(), &LanguageFilter::default());
        assert_eq!(out.songs()[0].verses, [good]);
        assert_eq!(stats.songs_dropped_language, 1);
        assert_eq!(stats.lines_deduplicated, 4);
        assert_eq!(stats.verses_dropped_line_count, 1);
        let (again, stats2) = preprocess(&out, &FilterRules::default(), &LanguageFilter::default());
        assert_eq!(again, out);
        assert_eq!(stats2.total_drops(), 0);
    }
}
