//! Assembling phonetics and rhyme components from command-line options.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lyricraft_core::phonetics::{
    Phonemizer, PhonemizerConfig, PhoneticsError, PronouncingDictionary, SourcePreference,
};
use lyricraft_core::rhyme::{EquivalenceTable, RhymeDictionary, RhymeError, Rhymer};

use crate::corpus_io;
use crate::error::{Error, Result};
use crate::g2p::CommandEngine;

/// Overrides for the bundled pronouncing data.
#[derive(Debug, Clone, Default)]
pub struct PhoneticsOptions {
    /// `word<TAB>IPA` file replacing the bundled dictionary.
    pub dictionary: Option<PathBuf>,
    pub equivalence_table: Option<PathBuf>,
    /// External G2P command; the word is appended as the last argument.
    pub g2p_command: Option<String>,
    pub prefer_engine: bool,
    /// Disable the spelling-based fallback for words nobody knows.
    pub no_fallback: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_dictionary(path: Option<&Path>) -> Result<Arc<PronouncingDictionary>> {
    match path {
        Some(p) => Ok(Arc::new(PronouncingDictionary::parse(&read(p)?).map_err(|e| {
            let record = match &e {
                PhoneticsError::DictionaryLine { line, .. } => *line,
                _ => 0,
            };
            Error::Parse { path: p.to_path_buf(), record, message: e.to_string() }
        })?)),
        None => Ok(PronouncingDictionary::bundled()),
    }
}

pub fn load_equivalence_table(path: Option<&Path>) -> Result<EquivalenceTable> {
    match path {
        Some(p) => EquivalenceTable::parse(&read(p)?).map_err(|e| {
            let record = match &e {
                RhymeError::Table { line, .. } => *line,
                _ => 0,
            };
            Error::Parse { path: p.to_path_buf(), record, message: e.to_string() }
        }),
        None => Ok(EquivalenceTable::bundled()),
    }
}

pub fn build_rhymer(opts: &PhoneticsOptions) -> Result<Rhymer> {
    let mut phonemizer = Phonemizer::new(load_dictionary(opts.dictionary.as_deref())?).with_config(PhonemizerConfig {
        preference: if opts.prefer_engine { SourcePreference::EngineFirst } else { SourcePreference::DictionaryFirst },
        fallback: !opts.no_fallback,
        cache: true,
    });
    if let Some(cmd) = &opts.g2p_command {
        let engine = CommandEngine::parse(cmd).ok_or_else(|| Error::Config("empty --g2p-command".into()))?;
        phonemizer = phonemizer.with_engine(Box::new(engine));
    }
    Ok(Rhymer::new(phonemizer, load_equivalence_table(opts.equivalence_table.as_deref())?))
}

/// Rhyme buckets from a corpus file, or from the pronouncing dictionary's
/// word list (every frequency 1) when no corpus is given.
pub fn load_rhyme_dictionary(corpus: Option<&Path>, rhymer: &Rhymer) -> Result<RhymeDictionary> {
    match corpus {
        Some(p) => Ok(RhymeDictionary::from_corpus(&corpus_io::read_corpus(p)?, rhymer)),
        None => Ok(RhymeDictionary::from_frequencies(
            rhymer.phonemizer().dictionary().words().map(|w| (w.to_string(), 1u64)).collect::<Vec<_>>(),
            rhymer,
        )),
    }
}
