//! Core algorithms for a line-level lyric co-writing workbench.
//!
//! Everything in this crate is `no_std` (with `alloc`) and free of IO. File
//! formats, the CLI, the HTTP service and remote backends live in the
//! `lyricraft` companion crate.
//!
//! Module map:
//!
//! * [`phonetics`]: token normalization, IPA phoneme sequences, the bundled
//!   pronouncing dictionary, orthographic fallback and syllable counts.
//! * [`rhyme`]: rhyme keys, perfect/near classification and the
//!   frequency-ranked rhyme dictionary.
//! * [`corpus`]: songs and verses, gestalt similarity, line dedup, verse and
//!   language filters, split by song.
//! * [`dataset`]: tagged text-to-text examples, the tag grammar and the
//!   balanced task mixture.
//! * [`ngram`]: the bidirectional n-gram baseline generator.
//! * [`generation`]: the backend contract and constrained suggestion logic.
//! * [`metrics`]: BLEU, lexical diversity, rhyme score, syllable RMSE, end
//!   word accuracy and the evaluation harness.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod dataset;
pub mod generation;
pub mod metrics;
pub mod ngram;
pub mod phonetics;
pub mod rhyme;

pub use corpus::{Corpus, Song, SplitConfig, Verse};
pub use dataset::{TaskKind, TrainingExample};
pub use generation::{GenerationBackend, SuggestionRequest, SuggestionSet};
pub use metrics::EvaluationReport;
pub use phonetics::{PhonemeSequence, Phonemizer};
pub use rhyme::{RhymeClass, RhymeDictionary, RhymeKey, Rhymer};

/// Seeded generator used across the crate so every seeded run is reproducible.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds the crate's reproducible generator from a `u64` seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
