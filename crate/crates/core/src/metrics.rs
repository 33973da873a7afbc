//! The five evaluation metrics and the evaluation harness.
//!
//! Every metric tokenizes with [`phonetics::tokens`], so scores are case
//! and punctuation insensitive.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{self, TaskKind, TrainingExample};
use crate::generation::{GenerationBackend, GenerationError};
use crate::phonetics::{self, Phonemizer};
use crate::rhyme::Rhymer;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("{predictions} predictions for {targets} targets")]
    LengthMismatch { predictions: usize, targets: usize },
    #[error("nothing to score")]
    Empty,
}

fn check_pairs(predictions: usize, targets: usize) -> Result<(), MetricsError> {
    if predictions != targets {
        return Err(MetricsError::LengthMismatch { predictions, targets });
    }
    if predictions == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// BLEU settings. Orders whose candidate n-gram count is zero across the
/// corpus are left out of the geometric mean; orders with candidates but no
/// matches use `epsilon / candidates` as their precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_order: usize,
    pub epsilon: f64,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { max_order: 4, epsilon: 0.1 }
    }
}

/// Corpus BLEU on a 0 to 100 scale with uniform weights and a brevity
/// penalty computed from total candidate and reference lengths.
pub fn corpus_bleu<P, T>(predictions: &[P], targets: &[T], cfg: &BleuConfig) -> Result<f64, MetricsError>
where
    P: AsRef<str>,
    T: AsRef<str>,
{
    check_pairs(predictions.len(), targets.len())?;
    let mut matches = alloc::vec![0u64; cfg.max_order];
    let mut totals = alloc::vec![0u64; cfg.max_order];
    let (mut cand_len, mut ref_len) = (0u64, 0u64);
    for (p, t) in predictions.iter().zip(targets) {
        let cand: Vec<String> = phonetics::tokens(p.as_ref()).collect();
        let refr: Vec<String> = phonetics::tokens(t.as_ref()).collect();
        cand_len += cand.len() as u64;
        ref_len += refr.len() as u64;
        for n in 1..=cfg.max_order {
            let ref_counts = ngram_counts(&refr, n);
            for (gram, count) in ngram_counts(&cand, n) {
                totals[n - 1] += count;
                matches[n - 1] += count.min(ref_counts.get(&gram).copied().unwrap_or(0));
            }
        }
    }
    if matches.iter().all(|&m| m == 0) {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for n in 0..cfg.max_order {
        if totals[n] == 0 {
            break;
        }
        let precision =
            if matches[n] == 0 { cfg.epsilon / totals[n] as f64 } else { matches[n] as f64 / totals[n] as f64 };
        log_sum += libm::log(precision);
        orders += 1;
    }
    let brevity = if cand_len >= ref_len { 1.0 } else { libm::exp(1.0 - ref_len as f64 / cand_len as f64) };
    let score = 100.0 * brevity * libm::exp(log_sum / orders as f64);
    Ok(score.clamp(0.0, 100.0))
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], u64> {
    let mut counts = BTreeMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_default() += 1;
        }
    }
    counts
}

/// Distinct tokens over total tokens; `None` for a line without tokens.
pub fn type_token_ratio(line: &str) -> Option<f64> {
    let tokens: Vec<String> = phonetics::tokens(line).collect();
    if tokens.is_empty() {
        return None;
    }
    let distinct: alloc::collections::BTreeSet<&String> = tokens.iter().collect();
    Some(distinct.len() as f64 / tokens.len() as f64)
}

fn rmse(diffs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for d in diffs {
        sum += d * d;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        libm::sqrt(sum / n as f64)
    }
}

/// A metric value with the number of inputs it had to work around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub value: f64,
    /// Empty lines (lexical diversity) or unphonemizable end words (rhyme score).
    pub warnings: usize,
}

/// RMSE of per-pair type-token-ratio differences. Empty lines count as TTR 0.
pub fn lexical_diversity_rmse<P, T>(predictions: &[P], targets: &[T]) -> Result<Scored, MetricsError>
where
    P: AsRef<str>,
    T: AsRef<str>,
{
    check_pairs(predictions.len(), targets.len())?;
    let mut warnings = 0;
    let mut ttr = |line: &str| {
        type_token_ratio(line).unwrap_or_else(|| {
            warnings += 1;
            0.0
        })
    };
    let diffs: Vec<f64> = predictions.iter().zip(targets).map(|(p, t)| ttr(p.as_ref()) - ttr(t.as_ref())).collect();
    Ok(Scored { value: rmse(diffs.into_iter()), warnings })
}

/// Fraction of predictions whose final word rhymes (near or perfect) with at
/// least one of the corresponding end words.
pub fn rhyme_score<P, W>(predictions: &[P], input_end_words: &[W], rhymer: &Rhymer) -> Result<Scored, MetricsError>
where
    P: AsRef<str>,
    W: AsRef<[String]>,
{
    check_pairs(predictions.len(), input_end_words.len())?;
    let (mut hits, mut warnings) = (0usize, 0usize);
    for (p, words) in predictions.iter().zip(input_end_words) {
        let Some(end) = phonetics::last_word(p.as_ref()) else {
            warnings += 1;
            continue;
        };
        let mut any = false;
        for w in words.as_ref() {
            match rhymer.classify(&end, w) {
                Ok(class) => any |= class.rhymes(),
                Err(_) => warnings += 1,
            }
        }
        hits += usize::from(any);
    }
    Ok(Scored { value: hits as f64 / predictions.len() as f64, warnings })
}

/// End words of an example's inputs: the final word of each input line, or
/// the words of a rhyme list.
pub fn input_end_words(example: &TrainingExample) -> Vec<String> {
    if example.task == TaskKind::RhymeList {
        return example.rhyme_list_words.clone().unwrap_or_default();
    }
    example.input_lines.iter().filter_map(|l| phonetics::last_word(l)).collect()
}

/// RMSE of per-pair syllable count differences.
pub fn syllable_rmse<P, T>(predictions: &[P], targets: &[T], phonemizer: &Phonemizer) -> Result<f64, MetricsError>
where
    P: AsRef<str>,
    T: AsRef<str>,
{
    check_pairs(predictions.len(), targets.len())?;
    Ok(rmse(predictions.iter().zip(targets).map(|(p, t)| {
        phonemizer.syllable_count_line(p.as_ref()) as f64 - phonemizer.syllable_count_line(t.as_ref()) as f64
    })))
}

/// Fraction of pairs with equal normalized final words.
pub fn end_word_accuracy<P, T>(predictions: &[P], targets: &[T]) -> Result<f64, MetricsError>
where
    P: AsRef<str>,
    T: AsRef<str>,
{
    check_pairs(predictions.len(), targets.len())?;
    let hits = predictions
        .iter()
        .zip(targets)
        .filter(|(p, t)| {
            let pw = phonetics::last_word(p.as_ref());
            pw.is_some() && pw == phonetics::last_word(t.as_ref())
        })
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// The five metrics for one backend over one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub bleu: f64,
    pub lexical_diversity_rmse: f64,
    pub rhyme_score: f64,
    pub syllable_rmse: f64,
    pub end_word_accuracy: f64,
    pub n_examples: usize,
    pub backend_id: String,
    pub dataset_id: String,
    pub seed: u64,
    pub empty_predictions: usize,
    pub empty_lines: usize,
    pub unphonemizable_end_words: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("evaluation stopped after {completed} of {total} examples: {source}")]
pub struct EvaluationError {
    pub completed: usize,
    pub total: usize,
    pub source: GenerationError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub seed: u64,
    pub dataset_id: String,
    pub bleu: BleuConfig,
}

impl EvaluationConfig {
    /// Stable digest of everything that affects the scores besides the data.
    pub fn hash(&self, backend_id: &str) -> String {
        let canonical = format!(
            "backend={backend_id};dataset={};seed={};bleu.max_order={};bleu.epsilon={};tokens=normalized-lowercase;candidates=1",
            self.dataset_id, self.seed, self.bleu.max_order, self.bleu.epsilon
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
    }
}

/// Generates one prediction per example (k = 1, one seeded generator for the
/// whole run, examples in order) and scores all five metrics.
pub fn evaluate<B: GenerationBackend + ?Sized>(
    backend: &B,
    examples: &[TrainingExample],
    rhymer: &Rhymer,
    cfg: &EvaluationConfig,
) -> Result<EvaluationReport, EvaluationError> {
    let total = examples.len();
    if total == 0 {
        return Err(EvaluationError {
            completed: 0,
            total,
            source: GenerationError::InvalidRequest("empty test set".to_string()),
        });
    }
    let mut rng = crate::seeded_rng(cfg.seed);
    let mut predictions = Vec::with_capacity(total);
    let mut empty_predictions = 0;
    for (completed, ex) in examples.iter().enumerate() {
        let input = dataset::render_input(ex);
        let out =
            backend.generate(&input, 1, &mut rng).map_err(|source| EvaluationError { completed, total, source })?;
        let line = out.into_iter().next().unwrap_or_default();
        empty_predictions += usize::from(line.trim().is_empty());
        predictions.push(line);
    }
    let targets: Vec<&str> = examples.iter().map(|e| e.target.as_str()).collect();
    let end_words: Vec<Vec<String>> = examples.iter().map(input_end_words).collect();
    // lengths already agree and are non-zero
    let bleu = corpus_bleu(&predictions, &targets, &cfg.bleu).expect("paired");
    let lexical = lexical_diversity_rmse(&predictions, &targets).expect("paired");
    let rhyme = rhyme_score(&predictions, &end_words, rhymer).expect("paired");
    let syllable = syllable_rmse(&predictions, &targets, rhymer.phonemizer()).expect("paired");
    let end_word = end_word_accuracy(&predictions, &targets).expect("paired");
    Ok(EvaluationReport {
        bleu,
        lexical_diversity_rmse: lexical.value,
        rhyme_score: rhyme.value,
        syllable_rmse: syllable,
        end_word_accuracy: end_word,
        n_examples: total,
        backend_id: backend.id().to_string(),
        dataset_id: cfg.dataset_id.clone(),
        seed: cfg.seed,
        empty_predictions,
        empty_lines: lexical.warnings,
        unphonemizable_end_words: rhyme.warnings,
        config_hash: cfg.hash(backend.id()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const BLEU_TOL: f64 = 1e-6;

    #[test]
    fn bleu_matches_reference_implementation() {
        // sacrebleu 2.x: tokenize="none", smooth_method="floor", smooth_value=0.1, effective_order=True
        let cfg = BleuConfig::default();
        let cases: [(&[&str], &[&str], f64); 4] = [
            (&["the cat sat on the mat"], &["the cat sat on a mat"], 53.7284965911771),
            (
                &["hello there my friend", "the sky is blue tonight"],
                &["hello my dear friend", "the sky was blue last night"],
                7.987758352755756,
            ),
            (&["we go", "love you"], &["we go home now", "i love you baby"], 36.78794411714425),
            (&["a b c", "x y"], &["d e f", "z w"], 0.0),
        ];
        for (p, t, want) in cases {
            let got = corpus_bleu(p, t, &cfg).unwrap();
            assert!((got - want).abs() < BLEU_TOL, "{p:?}: {got} vs {want}");
        }
    }

    #[test]
    fn bleu_identity_is_exactly_100() {
        let lines = ["la la", "oh", "the night is young and so are we"];
        assert_eq!(corpus_bleu(&lines, &lines, &BleuConfig::default()).unwrap(), 100.0);
        assert_eq!(
            corpus_bleu(&["a"], &["a", "b"], &BleuConfig::default()),
            Err(MetricsError::LengthMismatch { predictions: 1, targets: 2 })
        );
        assert_eq!(corpus_bleu::<&str, &str>(&[], &[], &BleuConfig::default()), Err(MetricsError::Empty));
    }

    #[test]
    fn lexical_diversity() {
        assert_eq!(type_token_ratio("la la la la"), Some(0.25));
        assert_eq!(type_token_ratio("La, la!"), Some(0.5));
        assert_eq!(type_token_ratio(""), None);
        let same = ["a b c", "la la"];
        assert_eq!(lexical_diversity_rmse(&same, &same).unwrap().value, 0.0);
        let s = lexical_diversity_rmse(&["", "a b"], &["a a", "a b"]).unwrap();
        assert_eq!(s.warnings, 1);
        assert!((s.value - libm::sqrt(0.25 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn rhyme_scores() {
        let r = Rhymer::bundled();
        let inputs = vec![vec!["true".to_string()], vec!["bell".to_string()], vec!["cat".into()], vec!["day".into()]];
        let all = rhyme_score(&["I knew", "well well", "a hat", "far away"], &inputs, &r).unwrap();
        assert_eq!(all.value, 1.0);
        let one = rhyme_score(&["I knew", "a dog", "a dog", "a dog"], &inputs, &r).unwrap();
        assert_eq!(one.value, 0.25);
        // only the final word matters
        let reworded = rhyme_score(&["nobody ever knew", "x dog", "y dog", "z dog"], &inputs, &r).unwrap();
        assert_eq!(reworded.value, 0.25);
    }

    #[test]
    fn syllable_and_end_word_metrics() {
        let p = Phonemizer::default();
        let t = ["hello there", "a cat"];
        assert_eq!(syllable_rmse(&t, &t, &p).unwrap(), 0.0);
        assert_eq!(syllable_rmse(&["hello", "cat"], &["hello cat", "hello"], &p).unwrap(), 1.0);
        assert_eq!(end_word_accuracy(&t, &t).unwrap(), 1.0);
        assert_eq!(end_word_accuracy(&["say hello", "a dog"], &["Hello!", "a cat"]).unwrap(), 0.5);
        assert_eq!(end_word_accuracy(&[""], &[""]).unwrap(), 0.0);
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let cfg = EvaluationConfig { seed: 1, dataset_id: "d".into(), bleu: BleuConfig::default() };
        assert_eq!(cfg.hash("echo"), cfg.hash("echo"));
        assert_eq!(cfg.hash("echo").len(), 32);
        assert_ne!(cfg.hash("echo"), EvaluationConfig { seed: 2, ..cfg.clone() }.hash("echo"));
    }
}
