//! External grapheme-to-phoneme engine run as a subprocess.

use std::process::Command;

use lyricraft_core::phonetics::G2pEngine;

/// Runs `program args... <word>` and reads space separated IPA phonemes from
/// stdout. A non-zero exit or empty output means the word is not covered.
#[derive(Debug, Clone)]
pub struct CommandEngine {
    program: String,
    args: Vec<String>,
}

impl CommandEngine {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        CommandEngine { program: program.into(), args }
    }

    /// Splits a command line on whitespace: the first word is the program.
    pub fn parse(command_line: &str) -> Option<Self> {
        let mut parts = command_line.split_whitespace().map(String::from);
        let program = parts.next()?;
        Some(CommandEngine::new(program, parts.collect()))
    }
}

impl G2pEngine for CommandEngine {
    fn transcribe(&self, word: &str) -> Option<String> {
        let output = Command::new(&self.program).args(&self.args).arg(word).output().ok()?;
        if !output.status.success() {
            log::debug!("g2p engine failed for {word:?}: {}", String::from_utf8_lossy(&output.stderr));
            return None;
        }
        let text = String::from_utf8(output.stdout).ok()?;
        let text = text.trim();
        (!text.is_empty()).then(|| text.to_string())
    }
}
