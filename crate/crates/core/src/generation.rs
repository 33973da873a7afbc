//! Generation backends and constrained line suggestion.
//!
//! A [`GenerationBackend`] turns a rendered task input into candidate lines.
//! [`suggest`] builds the queries for a songwriter's request, calls the
//! backend, retries toward a hard syllable target and attaches a constraint
//! report that is always recomputed from the candidate text.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::dataset::{self, TaskKind, TrainingExample};
use crate::ngram::{Direction, NgramModel};
use crate::phonetics::{self, normalize_token, Phonemizer};
use crate::rhyme::{RhymeClass, RhymeDictionary, RhymeError, Rhymer, DEFAULT_TOP_RHYMES};

/// Generations tried per candidate when a syllable count is required.
pub const MAX_ATTEMPTS: usize = 5;
/// Candidates per query when the request does not say.
pub const DEFAULT_CANDIDATES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerationError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("ending_word and force_rhyme cannot be combined")]
    ConstraintConflict,
    #[error("unknown word {0:?}")]
    UnknownWord(String),
}

impl From<RhymeError> for GenerationError {
    fn from(e: RhymeError) -> Self {
        match e {
            RhymeError::UnknownWord(w) => GenerationError::UnknownWord(w),
            other => GenerationError::InvalidRequest(other.to_string()),
        }
    }
}

/// Anything that maps a rendered input to candidate lines. Implementations
/// return at most `k` lines and must be callable from several threads.
pub trait GenerationBackend: Send + Sync {
    fn id(&self) -> &str;

    fn generate(&self, rendered_input: &str, k: usize, rng: &mut dyn RngCore) -> Result<Vec<String>, GenerationError>;

    /// Cheap reachability probe for health checks.
    fn is_available(&self) -> bool {
        true
    }
}

impl<B: GenerationBackend + ?Sized> GenerationBackend for Arc<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn generate(&self, rendered_input: &str, k: usize, rng: &mut dyn RngCore) -> Result<Vec<String>, GenerationError> {
        (**self).generate(rendered_input, k, rng)
    }

    fn is_available(&self) -> bool {
        (**self).is_available()
    }
}

/// The n-gram baseline: ending-word and rhyme queries are generated
/// right-to-left from a chosen end word, control queries left-to-right.
#[derive(Debug)]
pub struct NgramBackend {
    model: NgramModel,
    dictionary: RhymeDictionary,
    rhymer: Arc<Rhymer>,
}

impl NgramBackend {
    pub fn new(model: NgramModel, dictionary: RhymeDictionary, rhymer: Arc<Rhymer>) -> Self {
        NgramBackend { model, dictionary, rhymer }
    }

    pub fn model(&self) -> &NgramModel {
        &self.model
    }

    /// One line for a parsed query.
    pub fn generate_line<R: Rng + ?Sized>(&self, query: &TrainingExample, rng: &mut R) -> String {
        let phonemizer = self.rhymer.phonemizer();
        let target = query.syllable_tag;
        let words = match query.task {
            TaskKind::Ending => {
                let end = query.ending_word_tag.clone().unwrap_or_default();
                self.model.generate(Direction::Backward, &[normalize_token(&end)], target, phonemizer, rng)
            }
            TaskKind::Rhyme => {
                let anchors: Vec<String> = query.flagged_words().collect();
                let end = self.pick_rhyme(&anchors, rng);
                match end {
                    Some(end) => self.model.generate(Direction::Backward, &[end], target, phonemizer, rng),
                    None => self.model.generate(Direction::Forward, &[], target, phonemizer, rng),
                }
            }
            TaskKind::RhymeList => {
                let anchors = query.rhyme_list_words.clone().unwrap_or_default();
                self.pick_rhyme(&anchors, rng).into_iter().collect()
            }
            TaskKind::Control => self.model.generate(Direction::Forward, &[], target, phonemizer, rng),
        };
        words.join(" ")
    }

    /// Frequency-weighted draw from the buckets of the anchor words,
    /// preferring words other than the anchors themselves.
    fn pick_rhyme<R: Rng + ?Sized>(&self, anchors: &[String], rng: &mut R) -> Option<String> {
        let anchors: Vec<String> = anchors.iter().map(|a| normalize_token(a)).filter(|a| !a.is_empty()).collect();
        let mut pool: BTreeMap<&str, u64> = BTreeMap::new();
        for anchor in &anchors {
            let Ok(key) = self.rhymer.canonical_key(anchor) else { continue };
            if let Some(bucket) = self.dictionary.bucket(&key) {
                for (w, f) in bucket {
                    if !anchors.contains(w) {
                        pool.insert(w.as_str(), (*f).max(1));
                    }
                }
            }
        }
        if pool.is_empty() {
            return anchors.last().cloned();
        }
        let total: u64 = pool.values().sum();
        let mut left = rng.random_range(0..total);
        for (w, f) in &pool {
            if left < *f {
                return Some(w.to_string());
            }
            left -= f;
        }
        None
    }
}

impl GenerationBackend for NgramBackend {
    fn id(&self) -> &str {
        "ngram-baseline"
    }

    fn generate(&self, rendered_input: &str, k: usize, rng: &mut dyn RngCore) -> Result<Vec<String>, GenerationError> {
        let query = dataset::parse_input(rendered_input).map_err(|e| GenerationError::InvalidRequest(e.to_string()))?;
        Ok((0..k).map(|_| self.generate_line(&query, rng)).filter(|l| !l.is_empty()).collect())
    }
}

/// Replays the reference target of each known input, in order. Used to pin
/// metric values: evaluating it against the same examples is a perfect score.
#[derive(Debug, Default)]
pub struct EchoBackend {
    targets: spin::Mutex<BTreeMap<String, VecDeque<String>>>,
}

impl EchoBackend {
    pub fn from_examples<'a, I>(examples: I) -> Self
    where
        I: IntoIterator<Item = &'a TrainingExample>,
    {
        let mut targets: BTreeMap<String, VecDeque<String>> = BTreeMap::new();
        for ex in examples {
            targets.entry(dataset::render_input(ex)).or_default().push_back(ex.target.clone());
        }
        EchoBackend { targets: spin::Mutex::new(targets) }
    }
}

impl GenerationBackend for EchoBackend {
    fn id(&self) -> &str {
        "echo"
    }

    fn generate(&self, rendered_input: &str, k: usize, _rng: &mut dyn RngCore) -> Result<Vec<String>, GenerationError> {
        let mut targets = self.targets.lock();
        let queue = targets.get_mut(rendered_input).ok_or_else(|| {
            GenerationError::InvalidRequest(format!("no reference target for input {rendered_input:?}"))
        })?;
        let line = if queue.len() > 1 { queue.pop_front() } else { queue.front().cloned() };
        Ok(line.into_iter().take(k).collect())
    }
}

fn default_k() -> usize {
    DEFAULT_CANDIDATES
}

/// A songwriter's query: recent lines plus optional constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionRequest {
    pub input_lines: Vec<String>,
    #[serde(default)]
    pub syllable_target: Option<usize>,
    #[serde(default)]
    pub ending_word: Option<String>,
    #[serde(default)]
    pub force_rhyme: bool,
    #[serde(default = "default_k")]
    pub k: usize,
}

impl SuggestionRequest {
    pub fn new<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SuggestionRequest {
            input_lines: lines.into_iter().map(Into::into).collect(),
            syllable_target: None,
            ending_word: None,
            force_rhyme: false,
            k: DEFAULT_CANDIDATES,
        }
    }

    /// Checks the request invariants and returns the sanitized input lines.
    pub fn validate(&self) -> Result<Vec<String>, GenerationError> {
        if self.ending_word.is_some() && self.force_rhyme {
            return Err(GenerationError::ConstraintConflict);
        }
        if self.k == 0 {
            return Err(GenerationError::InvalidRequest("k must be at least 1".into()));
        }
        let lines: Vec<String> = self.input_lines.iter().map(|l| dataset::sanitize_line(l)).collect();
        if lines.is_empty() || lines.len() > dataset::MAX_INPUT_LINES {
            return Err(GenerationError::InvalidRequest(format!(
                "expected 1 to {} input lines, got {}",
                dataset::MAX_INPUT_LINES,
                lines.len()
            )));
        }
        if lines.iter().any(String::is_empty) {
            return Err(GenerationError::InvalidRequest("input lines must not be empty".into()));
        }
        if let Some(w) = &self.ending_word {
            let w = normalize_token(w);
            if w.is_empty() || w.contains(char::is_whitespace) {
                return Err(GenerationError::InvalidRequest("ending_word must be a single word".into()));
            }
        }
        Ok(lines)
    }
}

/// Rounded (half to even) mean syllable count of the lines, at least 1.
pub fn derive_syllable_target<S: AsRef<str>>(lines: &[S], phonemizer: &Phonemizer) -> usize {
    if lines.is_empty() {
        return 1;
    }
    let total: usize = lines.iter().map(|l| phonemizer.syllable_count_line(l.as_ref())).sum();
    let mean = total as f64 / lines.len() as f64;
    (libm::rint(mean) as usize).max(1)
}

fn syllable_target(req: &SuggestionRequest, lines: &[String], phonemizer: &Phonemizer) -> usize {
    req.syllable_target.unwrap_or_else(|| derive_syllable_target(lines, phonemizer))
}

fn ending_query(lines: &[String], word: &str, syllables: usize) -> String {
    let mut ex = TrainingExample::control(lines.to_vec(), String::new(), None);
    ex.task = TaskKind::Ending;
    ex.syllable_tag = Some(syllables);
    ex.ending_word_tag = Some(normalize_token(word));
    dataset::render_input(&ex)
}

/// Rendered input for a request without force-rhyme: an ending-word query
/// when an end word is given, otherwise a rhyme query whose `[RHYME]` flags
/// mark input lines rhyming with the last given word. The syllable tag is
/// always present.
pub fn build_query(req: &SuggestionRequest, rhymer: &Rhymer) -> Result<String, GenerationError> {
    let lines = req.validate()?;
    let syllables = syllable_target(req, &lines, rhymer.phonemizer());
    if let Some(word) = &req.ending_word {
        return Ok(ending_query(&lines, word, syllables));
    }
    let last = lines.last().and_then(|l| phonetics::last_word(l));
    let mut ex = TrainingExample::control(lines.clone(), String::new(), None);
    ex.task = TaskKind::Rhyme;
    ex.rhyme_flags = lines
        .iter()
        .map(|l| match (phonetics::last_word(l), &last) {
            (Some(w), Some(anchor)) => rhymer.rhymes(&w, anchor),
            _ => false,
        })
        .collect();
    ex.syllable_tag = Some(syllables);
    Ok(dataset::render_input(&ex))
}

/// A query sent to the backend, with the end word it requires, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub input: String,
    pub required_end_word: Option<String>,
}

/// One ending-word query per top rhyme of the last input word. The advisory
/// is set when there are no rhymes to offer.
pub fn force_rhyme_queries(
    req: &SuggestionRequest,
    dictionary: &RhymeDictionary,
    rhymer: &Rhymer,
) -> Result<(Vec<Query>, Option<String>), GenerationError> {
    let lines = req.validate()?;
    let syllables = syllable_target(req, &lines, rhymer.phonemizer());
    let anchor = lines
        .last()
        .and_then(|l| phonetics::last_word(l))
        .ok_or_else(|| GenerationError::InvalidRequest("last input line has no word".into()))?;
    let rhymes = dictionary.top_rhymes(rhymer, &anchor, DEFAULT_TOP_RHYMES)?;
    let advisory = rhymes.is_empty().then(|| format!("no rhymes for {anchor:?} in the dictionary"));
    let queries = rhymes
        .into_iter()
        .map(|r| Query { input: ending_query(&lines, &r.word, syllables), required_end_word: Some(r.word) })
        .collect();
    Ok((queries, advisory))
}

/// Constraint checks recomputed from a candidate's text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub syllables: usize,
    pub syllable_target: usize,
    pub syllable_distance: usize,
    pub end_word: Option<String>,
    pub required_end_word: Option<String>,
    /// `None` when no end word was required.
    pub end_word_match: Option<bool>,
    /// Best rhyme class of the candidate's end word against the input end words.
    pub rhyme_class: RhymeClass,
}

impl ConstraintReport {
    pub fn compute(
        line: &str,
        input_lines: &[String],
        syllable_target: usize,
        required_end_word: Option<&str>,
        rhymer: &Rhymer,
    ) -> Self {
        let syllables = rhymer.phonemizer().syllable_count_line(line);
        let end_word = phonetics::last_word(line);
        let required = required_end_word.map(normalize_token);
        let end_word_match = required.as_ref().map(|r| end_word.as_deref() == Some(r.as_str()));
        let rhyme_class = match &end_word {
            Some(w) => input_lines
                .iter()
                .filter_map(|l| phonetics::last_word(l))
                .filter_map(|anchor| rhymer.classify(w, &anchor).ok())
                .max()
                .unwrap_or(RhymeClass::None),
            None => RhymeClass::None,
        };
        ConstraintReport {
            syllables,
            syllable_target,
            syllable_distance: syllables.abs_diff(syllable_target),
            end_word,
            required_end_word: required,
            end_word_match,
            rhyme_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub line: String,
    pub report: ConstraintReport,
    /// Generations spent on this candidate (1 unless retried).
    pub attempts: usize,
    pub query_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionSet {
    pub candidates: Vec<Candidate>,
    pub queries: Vec<Query>,
    pub advisory: Option<String>,
}

/// Runs a request against `backend`.
///
/// With a requested syllable count every candidate off target is regenerated
/// until it hits the count or [`MAX_ATTEMPTS`] generations are spent; the
/// closest attempt is kept. Candidates are ranked by end-word match, then
/// syllable distance, then rhyme class, then backend order.
pub fn suggest<B: GenerationBackend + ?Sized>(
    req: &SuggestionRequest,
    backend: &B,
    dictionary: &RhymeDictionary,
    rhymer: &Rhymer,
    rng: &mut dyn RngCore,
) -> Result<SuggestionSet, GenerationError> {
    let lines = req.validate()?;
    let target = syllable_target(req, &lines, rhymer.phonemizer());
    let (queries, advisory) = if req.force_rhyme {
        force_rhyme_queries(req, dictionary, rhymer)?
    } else {
        let required = req.ending_word.as_deref().map(normalize_token);
        (alloc::vec![Query { input: build_query(req, rhymer)?, required_end_word: required }], None)
    };

    let mut candidates = Vec::new();
    for (qi, query) in queries.iter().enumerate() {
        let required = query.required_end_word.as_deref();
        let report_for = |line: &str| ConstraintReport::compute(line, &lines, target, required, rhymer);
        let mut lines_out = backend.generate(&query.input, req.k, rng)?;
        lines_out.retain(|l| !l.trim().is_empty());
        lines_out.truncate(req.k);
        for line in lines_out {
            let mut best = (report_for(&line), line);
            let mut attempts = 1;
            if req.syllable_target.is_some() {
                while best.0.syllable_distance > 0 && attempts < MAX_ATTEMPTS {
                    attempts += 1;
                    let Some(retry) =
                        backend.generate(&query.input, 1, rng)?.into_iter().find(|l| !l.trim().is_empty())
                    else {
                        continue;
                    };
                    let report = report_for(&retry);
                    if report.syllable_distance < best.0.syllable_distance {
                        best = (report, retry);
                    }
                }
            }
            let (report, line) = best;
            candidates.push(Candidate { line, report, attempts, query_index: qi });
        }
    }
    candidates.sort_by_key(|c| {
        (c.report.end_word_match == Some(false), c.report.syllable_distance, core::cmp::Reverse(c.report.rhyme_class))
    });
    Ok(SuggestionSet { candidates, queries, advisory })
}
