//! Tagged text-to-text training examples and the combined task mixture.
//!
//! Input grammar, in order:
//!
//! ```text
//! <task prefix> <line> [LINE] <line> ... [ syllable count: <n>][ ending word: <w>]
//! rhyme list: <w1> [RHYME] <w2> [RHYME] <w3> [RHYME] <w4> [RHYME] <w5>
//! ```
//!
//! Inside a line, `[RHYME] ` precedes the final word when that word rhymes
//! with the target's final word. [`render_input`] and [`parse_input`] are
//! inverses for every example that passes [`validate`].

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Verse};
use crate::phonetics::{self, Phonemizer};
use crate::rhyme::{RhymeDictionary, Rhymer};

pub const LINE_TOKEN: &str = "[LINE]";
pub const RHYME_TOKEN: &str = "[RHYME]";
pub const SYLLABLE_TAG: &str = "syllable count:";
pub const ENDING_TAG: &str = "ending word:";

/// Maximum number of input lines per example.
pub const MAX_INPUT_LINES: usize = 4;
/// Words per rhyme-list input.
pub const RHYME_LIST_LEN: usize = 5;
/// Default number of rhyme-list examples.
pub const DEFAULT_RHYME_LIST_EXAMPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("no rhyme bucket holds {} distinct words", RHYME_LIST_LEN + 1)]
    InsufficientRhymes,
    #[error("rhyme-task examples cannot carry an ending word tag")]
    RhymeTaskEndingTag,
    #[error("target line has no word")]
    EmptyTarget,
    #[error("malformed input: {0}")]
    Grammar(String),
    #[error("malformed row: {0}")]
    MalformedRow(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Control,
    Rhyme,
    Ending,
    RhymeList,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::Control, TaskKind::Rhyme, TaskKind::Ending, TaskKind::RhymeList];

    pub fn prefix(self) -> &'static str {
        match self {
            TaskKind::Control => "finish lines:",
            TaskKind::Rhyme => "finish lines rhyme:",
            TaskKind::Ending => "finish lines ending:",
            TaskKind::RhymeList => "rhyme list:",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Control => "control",
            TaskKind::Rhyme => "rhyme",
            TaskKind::Ending => "ending",
            TaskKind::RhymeList => "rhyme_list",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub task: TaskKind,
    pub input_lines: Vec<String>,
    /// One flag per input line: its final word carries `[RHYME]`.
    pub rhyme_flags: Vec<bool>,
    pub syllable_tag: Option<usize>,
    pub ending_word_tag: Option<String>,
    pub rhyme_list_words: Option<Vec<String>>,
    pub target: String,
    /// Source song; `None` for examples not drawn from a song.
    pub song_id: Option<String>,
}

impl TrainingExample {
    /// A control example over already-sanitized lines.
    pub fn control(input_lines: Vec<String>, target: String, song_id: Option<String>) -> Self {
        let rhyme_flags = alloc::vec![false; input_lines.len()];
        TrainingExample {
            task: TaskKind::Control,
            input_lines,
            rhyme_flags,
            syllable_tag: None,
            ending_word_tag: None,
            rhyme_list_words: None,
            target,
            song_id,
        }
    }

    /// Final words of the input lines that carry a `[RHYME]` flag.
    pub fn flagged_words(&self) -> impl Iterator<Item = String> + '_ {
        self.input_lines.iter().zip(&self.rhyme_flags).filter(|(_, f)| **f).filter_map(|(l, _)| phonetics::last_word(l))
    }
}

/// Makes a line safe for the tag grammar: whitespace (tabs, newlines)
/// collapsed to single spaces, reserved tokens removed and the colon dropped
/// from tag phrases.
pub fn sanitize_line(line: &str) -> String {
    let cleaned = line
        .replace(LINE_TOKEN, " ")
        .replace(RHYME_TOKEN, " ")
        .replace(SYLLABLE_TAG, "syllable count")
        .replace(ENDING_TAG, "ending word");
    let mut out = String::with_capacity(cleaned.len());
    for word in cleaned.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Index of the whitespace token holding the line's final word.
fn final_word_token(tokens: &[&str]) -> Option<usize> {
    tokens.iter().rposition(|t| !phonetics::normalize_token(t).is_empty())
}

fn render_line(line: &str, flagged: bool, out: &mut String) {
    let tokens: Vec<&str> = line.split(' ').collect();
    let marker = if flagged { final_word_token(&tokens) } else { None };
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        if Some(i) == marker {
            out.push_str(RHYME_TOKEN);
            out.push(' ');
        }
        out.push_str(tok);
    }
}

/// Canonical input string of an example.
pub fn render_input(example: &TrainingExample) -> String {
    let mut out = String::from(example.task.prefix());
    if example.task == TaskKind::RhymeList {
        let words = example.rhyme_list_words.as_deref().unwrap_or(&[]);
        for (i, w) in words.iter().enumerate() {
            out.push(' ');
            if i > 0 {
                out.push_str(RHYME_TOKEN);
                out.push(' ');
            }
            out.push_str(w);
        }
    } else {
        for (i, line) in example.input_lines.iter().enumerate() {
            out.push(' ');
            if i > 0 {
                out.push_str(LINE_TOKEN);
                out.push(' ');
            }
            render_line(line, example.rhyme_flags.get(i).copied().unwrap_or(false), &mut out);
        }
    }
    if let Some(n) = example.syllable_tag {
        out.push_str(&format!(" {SYLLABLE_TAG} {n}"));
    }
    if let Some(w) = &example.ending_word_tag {
        out.push_str(&format!(" {ENDING_TAG} {w}"));
    }
    out
}

/// Inverse of [`render_input`]. The returned example has an empty target and
/// no song id.
pub fn parse_input(text: &str) -> Result<TrainingExample, DatasetError> {
    let grammar = |m: &str| DatasetError::Grammar(m.to_string());
    let mut by_length = TaskKind::ALL;
    by_length.sort_by_key(|t| core::cmp::Reverse(t.prefix().len()));
    let (task, mut rest) = by_length
        .iter()
        .find_map(|t| {
            let rest = text.strip_prefix(t.prefix())?;
            (rest.is_empty() || rest.starts_with(' ')).then_some((*t, rest))
        })
        .ok_or_else(|| grammar("unknown task prefix"))?;

    let mut ending_word_tag = None;
    let ending_marker = format!(" {ENDING_TAG} ");
    if let Some(pos) = rest.rfind(&ending_marker) {
        let word = &rest[pos + ending_marker.len()..];
        if word.is_empty() || word.contains(' ') {
            return Err(grammar("ending word tag must be a single word"));
        }
        ending_word_tag = Some(word.to_string());
        rest = &rest[..pos];
    }
    let mut syllable_tag = None;
    let syllable_marker = format!(" {SYLLABLE_TAG} ");
    if let Some(pos) = rest.rfind(&syllable_marker) {
        let count = &rest[pos + syllable_marker.len()..];
        syllable_tag = Some(count.parse::<usize>().map_err(|_| grammar("syllable count is not a number"))?);
        rest = &rest[..pos];
    }
    let body = rest.strip_prefix(' ').ok_or_else(|| grammar("missing body"))?;
    if body.is_empty() {
        return Err(grammar("missing body"));
    }

    let mut example = TrainingExample::control(Vec::new(), String::new(), None);
    example.task = task;
    example.syllable_tag = syllable_tag;
    example.ending_word_tag = ending_word_tag;
    if task == TaskKind::RhymeList {
        let sep = format!(" {RHYME_TOKEN} ");
        let words: Vec<String> = body.split(sep.as_str()).map(String::from).collect();
        if words.iter().any(|w| w.is_empty() || w.contains(' ')) {
            return Err(grammar("rhyme list entries must be single words"));
        }
        example.rhyme_list_words = Some(words);
        return Ok(example);
    }
    let sep = format!(" {LINE_TOKEN} ");
    let flag = format!("{RHYME_TOKEN} ");
    for segment in body.split(sep.as_str()) {
        let flagged = segment.matches(RHYME_TOKEN).count();
        if flagged > 1 {
            return Err(grammar("more than one [RHYME] marker in a line"));
        }
        let line = if flagged == 1 {
            let start = segment.find(&flag).ok_or_else(|| grammar("[RHYME] marker without a word"))?;
            let after = &segment[start + flag.len()..];
            let mut line = String::from(&segment[..start]);
            line.push_str(after);
            line
        } else {
            segment.to_string()
        };
        if line.is_empty() {
            return Err(grammar("empty line"));
        }
        example.input_lines.push(line);
        example.rhyme_flags.push(flagged == 1);
    }
    Ok(example)
}

/// Parses a rendered input and attaches its target line.
pub fn parse_pair(input: &str, target: &str) -> Result<TrainingExample, DatasetError> {
    let mut ex = parse_input(input)?;
    ex.target = target.to_string();
    Ok(ex)
}

/// One `rendered_input<TAB>target` row.
pub fn to_tsv_row(example: &TrainingExample) -> Result<String, DatasetError> {
    let input = render_input(example);
    if input.contains(['\t', '\n', '\r']) || example.target.contains(['\t', '\n', '\r']) {
        return Err(DatasetError::MalformedRow("tab or newline inside a field".into()));
    }
    Ok(format!("{input}\t{}", example.target))
}

pub fn from_tsv_row(row: &str) -> Result<TrainingExample, DatasetError> {
    let row = row.strip_suffix('\r').unwrap_or(row);
    let fields: Vec<&str> = row.split('\t').collect();
    if fields.len() != 2 {
        return Err(DatasetError::MalformedRow(format!("expected 2 tab-separated fields, found {}", fields.len())));
    }
    parse_pair(fields[0], fields[1])
}

/// One example per target line from the second line on; each takes the
/// `r` lines right before the target, `r` uniform in `1..=min(4, lines before)`.
pub fn make_finish_lines_examples<R: Rng + ?Sized>(
    verse: &Verse,
    song_id: Option<&str>,
    rng: &mut R,
) -> Vec<TrainingExample> {
    let lines: Vec<String> = verse.lines.iter().map(|l| sanitize_line(l)).collect();
    let mut out = Vec::with_capacity(lines.len().saturating_sub(1));
    for target_idx in 1..lines.len() {
        let r = rng.random_range(1..=MAX_INPUT_LINES.min(target_idx));
        let inputs = &lines[target_idx - r..target_idx];
        let target = &lines[target_idx];
        if phonetics::last_word(target).is_none() || inputs.iter().any(|l| l.is_empty()) {
            continue;
        }
        out.push(TrainingExample::control(inputs.to_vec(), target.clone(), song_id.map(String::from)));
    }
    out
}

/// Flags every input line whose final word rhymes with the target's final
/// word; `None` when no line does.
pub fn annotate_rhyme(example: &TrainingExample, rhymer: &Rhymer) -> Option<TrainingExample> {
    let target_word = phonetics::last_word(&example.target)?;
    let flags: Vec<bool> = example
        .input_lines
        .iter()
        .map(|l| phonetics::last_word(l).is_some_and(|w| rhymer.rhymes(&w, &target_word)))
        .collect();
    if !flags.iter().any(|f| *f) {
        return None;
    }
    let mut out = example.clone();
    out.task = TaskKind::Rhyme;
    out.rhyme_flags = flags;
    out.ending_word_tag = None;
    Some(out)
}

/// Sets the syllable tag to the target line's syllable count.
pub fn append_syllable_tag(example: &TrainingExample, phonemizer: &Phonemizer) -> TrainingExample {
    let mut out = example.clone();
    out.syllable_tag = Some(phonemizer.syllable_count_line(&example.target));
    out
}

/// Turns a control example into an ending-word example tagged with the
/// target's final normalized word.
pub fn append_ending_word_tag(example: &TrainingExample) -> Result<TrainingExample, DatasetError> {
    if example.task == TaskKind::Rhyme {
        return Err(DatasetError::RhymeTaskEndingTag);
    }
    let word = phonetics::last_word(&example.target).ok_or(DatasetError::EmptyTarget)?;
    let mut out = example.clone();
    out.task = TaskKind::Ending;
    out.ending_word_tag = Some(word);
    Ok(out)
}

/// `n` rhyme-list examples; each draws a bucket with at least six words
/// uniformly, then six distinct words from it: five inputs and the target.
pub fn make_rhyme_list_examples<R: Rng + ?Sized>(
    dict: &RhymeDictionary,
    n: usize,
    rng: &mut R,
) -> Result<Vec<TrainingExample>, DatasetError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let eligible: Vec<Vec<&str>> = dict
        .buckets()
        .map(|(_, words)| words.keys().map(String::as_str).collect::<Vec<_>>())
        .filter(|words| words.len() > RHYME_LIST_LEN)
        .collect();
    if eligible.is_empty() {
        return Err(DatasetError::InsufficientRhymes);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let bucket = eligible.choose(rng).expect("non-empty");
        let mut picked: Vec<String> = bucket.choose_multiple(rng, RHYME_LIST_LEN + 1).map(|w| w.to_string()).collect();
        picked.shuffle(rng);
        let target = picked.pop().expect("six words");
        let mut ex = TrainingExample::control(Vec::new(), target, None);
        ex.task = TaskKind::RhymeList;
        ex.rhyme_list_words = Some(picked);
        out.push(ex);
    }
    Ok(out)
}

/// The dataset variants the builder can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    /// Every finish-lines example, unbalanced.
    Control,
    /// Only examples with at least one rhyming input line.
    Rhyme,
    /// Only non-rhyming examples, tagged with their ending word.
    Ending,
    /// Rhyme and ending sets, the latter cut to the former's size.
    Combined,
    /// `Combined` plus the rhyme-list task.
    CombinedList,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Control => "control",
            DatasetKind::Rhyme => "rhyme",
            DatasetKind::Ending => "ending",
            DatasetKind::Combined => "combined",
            DatasetKind::CombinedList => "combined-list",
        }
    }
}

impl core::str::FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "control" => Ok(DatasetKind::Control),
            "rhyme" => Ok(DatasetKind::Rhyme),
            "ending" => Ok(DatasetKind::Ending),
            "combined" => Ok(DatasetKind::Combined),
            "combined-list" => Ok(DatasetKind::CombinedList),
            other => Err(format!("unknown dataset kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub seed: u64,
    /// Add syllable tags to control-task examples too.
    pub control_syllable_tag: bool,
    pub rhyme_list_examples: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { seed: 0, control_syllable_tag: false, rhyme_list_examples: DEFAULT_RHYME_LIST_EXAMPLES }
    }
}

/// One task's examples inside a mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDataset {
    pub task: TaskKind,
    pub weight: f64,
    pub examples: Vec<TrainingExample>,
}

/// Named task datasets sampled with equal weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMixture {
    pub kind: DatasetKind,
    pub tasks: Vec<TaskDataset>,
}

impl TaskMixture {
    pub fn task(&self, kind: TaskKind) -> Option<&TaskDataset> {
        self.tasks.iter().find(|t| t.task == kind)
    }

    pub fn examples(&self) -> impl Iterator<Item = &TrainingExample> {
        self.tasks.iter().flat_map(|t| t.examples.iter())
    }

    pub fn len(&self) -> usize {
        self.tasks.iter().map(|t| t.examples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn with_equal_weights(kind: DatasetKind, sets: Vec<(TaskKind, Vec<TrainingExample>)>) -> Self {
        let weight = 1.0 / sets.len() as f64;
        TaskMixture {
            kind,
            tasks: sets.into_iter().map(|(task, examples)| TaskDataset { task, weight, examples }).collect(),
        }
    }
}

/// Builds a dataset from a filtered training split.
///
/// Control examples come first; the rhyme set is every example that
/// [`annotate_rhyme`] keeps, the ending set is every other example with an
/// ending-word tag. Both carry syllable tags. For the combined kinds the
/// ending set is a seeded random subsample of the rhyme set's size, in
/// original order.
pub fn build_dataset(
    corpus: &Corpus,
    kind: DatasetKind,
    opts: &BuildOptions,
    rhymer: &Rhymer,
) -> Result<TaskMixture, DatasetError> {
    let mut rng = crate::seeded_rng(opts.seed);
    let mut control = Vec::new();
    for song in corpus.songs() {
        for verse in &song.verses {
            control.extend(make_finish_lines_examples(verse, Some(&song.id), &mut rng));
        }
    }
    let phonemizer = rhymer.phonemizer();
    if kind == DatasetKind::Control {
        if opts.control_syllable_tag {
            control = control.iter().map(|e| append_syllable_tag(e, phonemizer)).collect();
        }
        return Ok(TaskMixture::with_equal_weights(kind, alloc::vec![(TaskKind::Control, control)]));
    }

    let mut rhyme = Vec::new();
    let mut ending = Vec::new();
    for ex in &control {
        match annotate_rhyme(ex, rhymer) {
            Some(r) => rhyme.push(append_syllable_tag(&r, phonemizer)),
            None => ending.push(append_syllable_tag(&append_ending_word_tag(ex)?, phonemizer)),
        }
    }
    match kind {
        DatasetKind::Rhyme => return Ok(TaskMixture::with_equal_weights(kind, alloc::vec![(TaskKind::Rhyme, rhyme)])),
        DatasetKind::Ending => {
            return Ok(TaskMixture::with_equal_weights(kind, alloc::vec![(TaskKind::Ending, ending)]))
        }
        _ => {}
    }

    if ending.len() > rhyme.len() {
        let keep: BTreeSet<usize> = rand::seq::index::sample(&mut rng, ending.len(), rhyme.len()).into_iter().collect();
        ending = ending.into_iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, e)| e).collect();
    }
    let mut sets = alloc::vec![(TaskKind::Rhyme, rhyme), (TaskKind::Ending, ending)];
    if kind == DatasetKind::CombinedList {
        let dict = RhymeDictionary::from_corpus(corpus, rhymer);
        sets.push((TaskKind::RhymeList, make_rhyme_list_examples(&dict, opts.rhyme_list_examples, &mut rng)?));
    }
    Ok(TaskMixture::with_equal_weights(kind, sets))
}

/// Shorthand for the balanced mixture; `include_rhyme_list` adds the third task.
pub fn build_combined(
    corpus: &Corpus,
    include_rhyme_list: bool,
    opts: &BuildOptions,
    rhymer: &Rhymer,
) -> Result<TaskMixture, DatasetError> {
    let kind = if include_rhyme_list { DatasetKind::CombinedList } else { DatasetKind::Combined };
    build_dataset(corpus, kind, opts, rhymer)
}

/// A broken example invariant.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("{0} input lines, expected 1 to 4")]
    InputWindow(usize),
    #[error("rhyme flags do not match the input lines")]
    FlagCount,
    #[error("rhyme example without a flagged line")]
    NoRhymeFlag,
    #[error("flagged word {flagged:?} does not rhyme with target word {target:?}")]
    FlagDoesNotRhyme { flagged: String, target: String },
    #[error("syllable tag {tag} but target has {actual} syllables")]
    SyllableTag { tag: usize, actual: usize },
    #[error("ending word tag {tag:?} but target ends with {actual:?}")]
    EndingTag { tag: Option<String>, actual: Option<String> },
    #[error("rhyme example carries an ending word tag")]
    RhymeWithEndingTag,
    #[error("rhyme list has {0} words, expected 5")]
    RhymeListLength(usize),
    #[error("rhyme list word {0:?} does not rhyme with the target")]
    RhymeListWord(String),
    #[error("target line has no word")]
    EmptyTarget,
}

/// Checks every example invariant.
pub fn validate(example: &TrainingExample, rhymer: &Rhymer) -> Result<(), Violation> {
    let target_word = phonetics::last_word(&example.target).ok_or(Violation::EmptyTarget)?;
    if let Some(tag) = example.syllable_tag {
        let actual = rhymer.phonemizer().syllable_count_line(&example.target);
        if tag != actual {
            return Err(Violation::SyllableTag { tag, actual });
        }
    }
    if example.task == TaskKind::RhymeList {
        let words = example.rhyme_list_words.as_deref().unwrap_or(&[]);
        if words.len() != RHYME_LIST_LEN || !example.input_lines.is_empty() {
            return Err(Violation::RhymeListLength(words.len()));
        }
        for w in words {
            if !rhymer.rhymes(w, &target_word) {
                return Err(Violation::RhymeListWord(w.clone()));
            }
        }
        return Ok(());
    }
    let n = example.input_lines.len();
    if !(1..=MAX_INPUT_LINES).contains(&n) {
        return Err(Violation::InputWindow(n));
    }
    if example.rhyme_flags.len() != n {
        return Err(Violation::FlagCount);
    }
    match example.task {
        TaskKind::Rhyme => {
            if example.ending_word_tag.is_some() {
                return Err(Violation::RhymeWithEndingTag);
            }
            let mut any = false;
            for (line, _) in example.input_lines.iter().zip(&example.rhyme_flags).filter(|(_, f)| **f) {
                any = true;
                let flagged = phonetics::last_word(line).unwrap_or_default();
                if !rhymer.rhymes(&flagged, &target_word) {
                    return Err(Violation::FlagDoesNotRhyme { flagged, target: target_word });
                }
            }
            if !any {
                return Err(Violation::NoRhymeFlag);
            }
        }
        TaskKind::Ending if example.ending_word_tag.as_deref() != Some(target_word.as_str()) => {
            return Err(Violation::EndingTag { tag: example.ending_word_tag.clone(), actual: Some(target_word) });
        }
        _ => {}
    }
    Ok(())
}

/// Reference constants of the neural model served behind the remote
/// backend. Nothing in this crate consumes them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalModelProfile {
    pub parameter_count: u64,
    pub finetune_steps: u32,
    pub learning_rate: f64,
    pub batch_size: u32,
    pub max_seq_len: u32,
}

impl Default for ExternalModelProfile {
    fn default() -> Self {
        ExternalModelProfile {
            parameter_count: 220_000_000,
            finetune_steps: 12_000,
            learning_rate: 0.003,
            batch_size: 128,
            max_seq_len: 128,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lines(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn six_line_verse_gives_five_examples() {
        let verse = Verse::new(["one a", "two b", "three c", "four d", "five e", "six f"]);
        let mut rng = crate::seeded_rng(3);
        let examples = make_finish_lines_examples(&verse, Some("s"), &mut rng);
        assert_eq!(examples.len(), 5);
        assert_eq!(examples[0].input_lines, ["one a"]);
        for (t, ex) in examples.iter().enumerate() {
            let target_idx = t + 1;
            assert_eq!(ex.target, verse.lines[target_idx]);
            let r = ex.input_lines.len();
            assert!((1..=4.min(target_idx)).contains(&r));
            assert_eq!(ex.input_lines, verse.lines[target_idx - r..target_idx]);
        }
    }

    #[test]
    fn rhyme_annotation_flags_rhyming_lines() {
        let r = Rhymer::bundled();
        let ex = TrainingExample::control(
            lines(&["Don't you know that it's true", "I spend my days thinking of you"]),
            "There's nothing I can do".into(),
            None,
        );
        let annotated = annotate_rhyme(&ex, &r).unwrap();
        assert_eq!(annotated.task, TaskKind::Rhyme);
        assert_eq!(annotated.rhyme_flags, [true, true]);
        let plain = TrainingExample::control(lines(&["walking in the rain"]), "under city lights".into(), None);
        assert!(annotate_rhyme(&plain, &r).is_none());
    }

    #[test]
    fn rendered_rhyme_example() {
        let r = Rhymer::bundled();
        let ex = TrainingExample::control(
            lines(&["Don't you know that it's true", "I spend my days thinking of you"]),
            "There's nothing that I can do".into(),
            None,
        );
        let tagged = append_syllable_tag(&annotate_rhyme(&ex, &r).unwrap(), r.phonemizer());
        assert_eq!(
            render_input(&tagged),
            "finish lines rhyme: Don't you know that it's [RHYME] true [LINE] I spend my days thinking of [RHYME] you syllable count: 7"
        );
    }

    #[test]
    fn syllable_tag_is_idempotent() {
        let p = Phonemizer::default();
        let ex = TrainingExample::control(lines(&["x"]), "hello hello".into(), None);
        let once = append_syllable_tag(&ex, &p);
        assert_eq!(once.syllable_tag, Some(4));
        assert_eq!(append_syllable_tag(&once, &p), once);
        let one = TrainingExample::control(lines(&["x"]), "beautiful".into(), None);
        assert_eq!(append_syllable_tag(&one, &p).syllable_tag, Some(p.syllable_count_word("beautiful")));
    }

    #[test]
    fn ending_word_tag() {
        let ex = TrainingExample::control(lines(&["x"]), "nothing I can do".into(), None);
        let tagged = append_ending_word_tag(&ex).unwrap();
        assert_eq!(tagged.ending_word_tag.as_deref(), Some("do"));
        assert_eq!(tagged.task, TaskKind::Ending);
        let comma = TrainingExample::control(lines(&["x"]), "nothing I can do,".into(), None);
        assert_eq!(append_ending_word_tag(&comma).unwrap().ending_word_tag.as_deref(), Some("do"));
        let mut rhyme = ex.clone();
        rhyme.task = TaskKind::Rhyme;
        assert_eq!(append_ending_word_tag(&rhyme), Err(DatasetError::RhymeTaskEndingTag));
    }

    #[test]
    fn render_parse_round_trip() {
        let mut ex = TrainingExample::control(lines(&["hey there ...", "one more time"]), "t".into(), None);
        ex.task = TaskKind::Ending;
        ex.syllable_tag = Some(7);
        ex.ending_word_tag = Some("home".into());
        let text = render_input(&ex);
        assert_eq!(text, "finish lines ending: hey there ... [LINE] one more time syllable count: 7 ending word: home");
        assert_eq!(parse_pair(&text, "t").unwrap(), ex);

        let mut flagged = TrainingExample::control(lines(&["where are you !"]), "t".into(), None);
        flagged.task = TaskKind::Rhyme;
        flagged.rhyme_flags = vec![true];
        let text = render_input(&flagged);
        assert_eq!(text, "finish lines rhyme: where are [RHYME] you !");
        assert_eq!(parse_pair(&text, "t").unwrap(), flagged);

        let mut list = TrainingExample::control(vec![], "sell".into(), None);
        list.task = TaskKind::RhymeList;
        list.rhyme_list_words = Some(lines(&["bell", "tell", "well", "shell", "fell"]));
        let text = render_input(&list);
        assert_eq!(text, "rhyme list: bell [RHYME] tell [RHYME] well [RHYME] shell [RHYME] fell");
        assert_eq!(parse_pair(&text, "sell").unwrap(), list);
    }

    #[test]
    fn parse_rejects_bad_grammar() {
        assert!(parse_input("finish everything: a").is_err());
        assert!(parse_input("finish lines:").is_err());
        assert!(parse_input("finish lines: a syllable count: x").is_err());
        assert!(parse_input("finish lines: [RHYME] a [RHYME] b").is_err());
        assert!(parse_input("finish lines: a [LINE]  [LINE] b").is_err());
    }

    #[test]
    fn sanitize_removes_reserved_tokens() {
        assert_eq!(sanitize_line("  a\tb [LINE] c [RHYME]  d\n"), "a b c d");
        assert_eq!(sanitize_line("my ending word: gone"), "my ending word gone");
    }

    #[test]
    fn tsv_rows() {
        let ex = TrainingExample::control(lines(&["a b"]), "c d".into(), None);
        let row = to_tsv_row(&ex).unwrap();
        assert_eq!(row, "finish lines: a b\tc d");
        assert_eq!(from_tsv_row(&row).unwrap(), ex);
        assert!(matches!(from_tsv_row("finish lines: a\tb\tc\td"), Err(DatasetError::MalformedRow(_))));
        assert!(matches!(from_tsv_row("no tab"), Err(DatasetError::MalformedRow(_))));
    }

    #[test]
    fn rhyme_list_sampling() {
        let r = Rhymer::bundled();
        let dict = RhymeDictionary::from_frequencies(
            [("bell", 1), ("tell", 1), ("well", 1), ("shell", 1), ("fell", 1), ("sell", 1), ("cat", 4)],
            &r,
        );
        let mut rng = crate::seeded_rng(1);
        let examples = make_rhyme_list_examples(&dict, 3, &mut rng).unwrap();
        assert_eq!(examples.len(), 3);
        for ex in &examples {
            let mut all = ex.rhyme_list_words.clone().unwrap();
            assert_eq!(all.len(), 5);
            all.push(ex.target.clone());
            all.sort();
            assert_eq!(all, ["bell", "fell", "sell", "shell", "tell", "well"]);
            validate(ex, &r).unwrap();
        }
        assert!(make_rhyme_list_examples(&dict, 0, &mut rng).unwrap().is_empty());
        let small = RhymeDictionary::from_frequencies([("bell", 1), ("tell", 1)], &r);
        assert_eq!(make_rhyme_list_examples(&small, 1, &mut rng), Err(DatasetError::InsufficientRhymes));
        assert!(make_rhyme_list_examples(&small, 0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn validator_catches_violations() {
        let r = Rhymer::bundled();
        let mut ex = TrainingExample::control(lines(&["a b c d e"; 5]), "the end".into(), None);
        assert_eq!(validate(&ex, &r), Err(Violation::InputWindow(5)));
        ex = TrainingExample::control(lines(&["the cat"]), "a big dog".into(), None);
        ex.task = TaskKind::Rhyme;
        assert_eq!(validate(&ex, &r), Err(Violation::NoRhymeFlag));
        ex.rhyme_flags = vec![true];
        assert!(matches!(validate(&ex, &r), Err(Violation::FlagDoesNotRhyme { .. })));
        let mut ending = TrainingExample::control(lines(&["x"]), "going home".into(), None);
        ending.task = TaskKind::Ending;
        ending.ending_word_tag = Some("away".into());
        assert!(matches!(validate(&ending, &r), Err(Violation::EndingTag { .. })));
        ending.ending_word_tag = Some("home".into());
        ending.syllable_tag = Some(9);
        assert_eq!(validate(&ending, &r), Err(Violation::SyllableTag { tag: 9, actual: 3 }));
    }

    #[test]
    fn model_profile_constants() {
        let p = ExternalModelProfile::default();
        assert_eq!(p.learning_rate, 0.003);
        assert_eq!(p.batch_size, 128);
        assert_eq!(p.finetune_steps, 12_000);
    }
}
