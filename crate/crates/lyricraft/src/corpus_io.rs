//! Line-delimited JSON corpus files: one song per line with `id`, `artist`,
//! `title`, optional `language_tag` and `verses`. A verse is either a list
//! of lines or an object with a `lines` list.

use std::fs;
use std::io::Write;
use std::path::Path;

use lyricraft_core::corpus::{Corpus, CorpusError, Song, Verse};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerseObject {
    lines: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VerseRecord {
    Lines(Vec<String>),
    Object(VerseObject),
}

#[derive(Deserialize)]
struct SongRecord {
    id: String,
    artist: String,
    title: String,
    #[serde(default)]
    language_tag: Option<String>,
    verses: Vec<VerseRecord>,
}

#[derive(Serialize)]
struct SongOut<'a> {
    id: &'a str,
    artist: &'a str,
    title: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    language_tag: Option<&'a str>,
    verses: Vec<&'a [String]>,
}

/// Parses corpus text. `record` in errors is the 1-based line number.
pub fn parse_corpus(text: &str, path: &Path) -> Result<Corpus> {
    let mut songs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: SongRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            record: idx + 1,
            message: e.to_string(),
        })?;
        let verses = record
            .verses
            .into_iter()
            .map(|v| match v {
                VerseRecord::Lines(lines) => Verse { lines },
                VerseRecord::Object(o) => Verse { lines: o.lines },
            })
            .collect();
        songs.push(Song {
            id: record.id,
            artist: record.artist,
            title: record.title,
            language_tag: record.language_tag,
            verses,
        });
    }
    if songs.is_empty() {
        return Err(Error::EmptyCorpus { path: path.to_path_buf() });
    }
    Corpus::new(songs).map_err(|e| match e {
        CorpusError::DuplicateId(id) => Error::Parse {
            path: path.to_path_buf(),
            record: text
                .lines()
                .enumerate()
                .filter(|(_, l)| l.contains(&format!("\"{id}\"")))
                .nth(1)
                .map_or(0, |(i, _)| i + 1),
            message: format!("duplicate song id {id:?}"),
        },
        other => other.into(),
    })
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, path)
}

pub fn render_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for song in corpus.songs() {
        let record = SongOut {
            id: &song.id,
            artist: &song.artist,
            title: &song.title,
            language_tag: song.language_tag.as_deref(),
            verses: song.verses.iter().map(|v| v.lines.as_slice()).collect(),
        };
        out.push_str(&serde_json::to_string(&record).expect("corpus records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(render_corpus(corpus).as_bytes()).map_err(|e| Error::io(path, e))
}
