//! Word n-gram model over lyric lines, trained in both directions.
//!
//! The backward table is the forward table of reversed lines, which lets the
//! baseline generator grow a line right-to-left from a fixed end word.
//! Probabilities use additive smoothing over the observed vocabulary plus the
//! end sentinel.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::phonetics::{self, Phonemizer};

pub const START: &str = "<s>";
pub const END: &str = "</s>";
/// Hard cap on generated line length, in words.
pub const MAX_WORDS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NgramError {
    #[error("no tokens to train on")]
    EmptyCorpus,
    #[error("order must be at least 1, got {0}")]
    InvalidOrder(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Continuation counts keyed by the space-joined context.
pub type NgramTable = BTreeMap<String, BTreeMap<String, u32>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramModel {
    order: usize,
    smoothing: f64,
    forward: NgramTable,
    backward: NgramTable,
    unigrams: BTreeMap<String, u32>,
}

impl NgramModel {
    /// Counts `order`-grams over the normalized tokens of each line, padded
    /// with `order - 1` start sentinels and one end sentinel.
    pub fn train<'a, I>(lines: I, order: usize) -> Result<Self, NgramError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        if order == 0 {
            return Err(NgramError::InvalidOrder(order));
        }
        let mut model = NgramModel {
            order,
            smoothing: 1.0,
            forward: BTreeMap::new(),
            backward: BTreeMap::new(),
            unigrams: BTreeMap::new(),
        };
        for line in lines {
            let mut words: Vec<String> = phonetics::tokens(line).collect();
            if words.is_empty() {
                continue;
            }
            for w in &words {
                *model.unigrams.entry(w.clone()).or_default() += 1;
            }
            count_line(&mut model.forward, &words, order);
            words.reverse();
            count_line(&mut model.backward, &words, order);
        }
        if model.unigrams.is_empty() {
            return Err(NgramError::EmptyCorpus);
        }
        Ok(model)
    }

    /// Additive smoothing constant; 1.0 is add-one.
    pub fn with_smoothing(mut self, alpha: f64) -> Self {
        self.smoothing = alpha.max(0.0);
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn table(&self, direction: Direction) -> &NgramTable {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        }
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.unigrams.keys().map(String::as_str)
    }

    pub fn count(&self, direction: Direction, context: &[&str], next: &str) -> u32 {
        self.table(direction).get(&context.join(" ")).and_then(|c| c.get(next)).copied().unwrap_or(0)
    }

    /// Smoothed `P(next | context)` over the vocabulary plus the end sentinel.
    pub fn probability(&self, direction: Direction, context: &[&str], next: &str) -> f64 {
        let outcomes = (self.unigrams.len() + 1) as f64;
        let (count, total) = match self.table(direction).get(&context.join(" ")) {
            Some(c) => (c.get(next).copied().unwrap_or(0), c.values().map(|&v| v as u64).sum::<u64>()),
            None => (0, 0),
        };
        (count as f64 + self.smoothing) / (total as f64 + self.smoothing * outcomes)
    }

    /// Samples the next word after `context`. Unseen contexts fall back to
    /// unigram frequencies. The end sentinel is excluded when `allow_end` is
    /// false.
    fn sample_next<R: Rng + ?Sized>(
        &self,
        direction: Direction,
        context: &str,
        allow_end: bool,
        rng: &mut R,
    ) -> String {
        let counts = self.table(direction).get(context);
        let seen: Vec<(&str, u32)> = match counts {
            Some(c) => {
                c.iter().filter(|(w, _)| allow_end || w.as_str() != END).map(|(w, n)| (w.as_str(), *n)).collect()
            }
            None => Vec::new(),
        };
        if seen.is_empty() {
            return self.sample_unigram(rng);
        }
        let seen_total: u64 = seen.iter().map(|(_, n)| *n as u64).sum();
        let outcomes = self.unigrams.len() + usize::from(allow_end);
        let smooth_mass = self.smoothing * outcomes as f64;
        let draw = rng.random::<f64>() * (seen_total as f64 + smooth_mass);
        if draw < seen_total as f64 {
            let mut left = draw as u64;
            for (w, n) in &seen {
                if left < *n as u64 {
                    return w.to_string();
                }
                left -= *n as u64;
            }
            return seen[seen.len() - 1].0.to_string();
        }
        // smoothing mass: uniform over every outcome
        let pick = rng.random_range(0..outcomes);
        match self.unigrams.keys().nth(pick) {
            Some(w) => w.clone(),
            None => END.to_string(),
        }
    }

    fn sample_unigram<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let total: u64 = self.unigrams.values().map(|&n| n as u64).sum();
        let mut left = rng.random_range(0..total);
        for (w, n) in &self.unigrams {
            if left < *n as u64 {
                return w.clone();
            }
            left -= *n as u64;
        }
        unreachable!("draw below total")
    }

    /// Grows a line from `seed` words (given in generation order). Stops at
    /// the end sentinel, when the line reaches `syllable_target` syllables, or
    /// at [`MAX_WORDS`]. With a syllable target the end sentinel is refused
    /// until the target is reached. Returned words are in reading order.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        direction: Direction,
        seed: &[String],
        syllable_target: Option<usize>,
        phonemizer: &Phonemizer,
        rng: &mut R,
    ) -> Vec<String> {
        let mut words: Vec<String> = seed.to_vec();
        let mut syllables: usize = words.iter().map(|w| phonemizer.syllable_count_word(w)).sum();
        let ctx_len = self.order - 1;
        while words.len() < MAX_WORDS {
            if syllable_target.is_some_and(|t| syllables >= t) {
                break;
            }
            let mut context: Vec<&str> = Vec::with_capacity(ctx_len);
            for i in 0..ctx_len {
                let back = ctx_len - i;
                context.push(if words.len() >= back { words[words.len() - back].as_str() } else { START });
            }
            let allow_end = syllable_target.is_none() && !words.is_empty();
            let next = self.sample_next(direction, &context.join(" "), allow_end, rng);
            if next == END {
                break;
            }
            syllables += phonemizer.syllable_count_word(&next);
            words.push(next);
        }
        if direction == Direction::Backward {
            words.reverse();
        }
        words
    }

    /// Distinct words seen in training.
    pub fn vocabulary_set(&self) -> BTreeSet<&str> {
        self.vocabulary().collect()
    }
}

fn count_line(table: &mut NgramTable, words: &[String], order: usize) {
    let mut padded: Vec<&str> = alloc::vec![START; order - 1];
    padded.extend(words.iter().map(String::as_str));
    padded.push(END);
    for i in (order - 1)..padded.len() {
        let context = padded[i + 1 - order..i].join(" ");
        *table.entry(context).or_default().entry(padded[i].to_string()).or_default() += 1;
    }
}
