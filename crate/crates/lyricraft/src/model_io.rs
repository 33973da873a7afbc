//! JSON persistence for the n-gram baseline and evaluation reports.

use std::fs;
use std::path::Path;

use lyricraft_core::metrics::EvaluationReport;
use lyricraft_core::ngram::NgramModel;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        record: 1,
        message: e.to_string(),
    })
}

pub fn save_model(path: &Path, model: &NgramModel) -> Result<()> {
    write_json(path, model)
}

pub fn load_model(path: &Path) -> Result<NgramModel> {
    read_json(path)
}

pub fn save_report(path: &Path, report: &EvaluationReport) -> Result<()> {
    write_json(path, report)
}

pub fn load_report(path: &Path) -> Result<EvaluationReport> {
    read_json(path)
}
