//! Dataset TSV files (`rendered_input<TAB>target`) and the mixture manifest.

use std::fs;
use std::path::{Path, PathBuf};

use lyricraft_core::dataset::{self, DatasetKind, TaskKind, TaskMixture, TrainingExample};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn render_tsv(examples: &[TrainingExample]) -> Result<String> {
    let mut out = String::new();
    for ex in examples {
        out.push_str(&dataset::to_tsv_row(ex)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_tsv(path: &Path, examples: &[TrainingExample]) -> Result<()> {
    fs::write(path, render_tsv(examples)?).map_err(|e| Error::io(path, e))
}

/// Reads a dataset file. Rows are parsed back into examples; song ids are
/// not stored and come back as `None`.
pub fn read_tsv(path: &Path) -> Result<Vec<TrainingExample>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, row)| {
            dataset::from_tsv_row(row).map_err(|source| Error::MalformedRow {
                path: path.to_path_buf(),
                row: i + 1,
                source,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub task: TaskKind,
    pub path: PathBuf,
    pub examples: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: DatasetKind,
    pub seed: u64,
    pub tasks: Vec<ManifestEntry>,
}

/// Writes `<task>.tsv` per task plus `manifest.json` into `dir`. Paths in the
/// manifest are relative to `dir`.
pub fn write_mixture(dir: &Path, mixture: &TaskMixture, seed: u64) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tasks = Vec::new();
    for task in &mixture.tasks {
        let file = PathBuf::from(format!("{}.tsv", task.task.name()));
        write_tsv(&dir.join(&file), &task.examples)?;
        tasks.push(ManifestEntry { task: task.task, path: file, examples: task.examples.len(), weight: task.weight });
    }
    let manifest = Manifest { dataset: mixture.kind, seed, tasks };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        record: 1,
        message: e.to_string(),
    })
}
