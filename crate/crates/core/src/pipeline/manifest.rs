//! Tab-separated manifests.
//!
//! Header: `id audio_path offset duration speaker_id gender transcript`
//! (tab-separated, any column order). Gender codes are `F`, `M` or `U`.
//! Relative audio paths are resolved against the manifest's directory.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::policy::GenderLabel;

pub const COLUMNS: [&str; 7] = [
    "id",
    "audio_path",
    "offset",
    "duration",
    "speaker_id",
    "gender",
    "transcript",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    pub audio_path: PathBuf,
    /// Seconds from the start of the file.
    pub offset: f64,
    /// Seconds.
    pub duration: f64,
    pub speaker_id: String,
    pub gender: GenderLabel,
    pub transcript: String,
    /// Set when `gender` was filled in by inference rather than the manifest.
    pub gender_inferred: bool,
}

impl ManifestEntry {
    pub fn needs_inference(&self) -> bool {
        self.gender == GenderLabel::Unknown
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, path, base)
}

/// Parses manifest text; `origin` is only used in error messages.
pub fn parse_manifest(text: &str, origin: &Path, base_dir: &Path) -> Result<Vec<ManifestEntry>> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            None => {
                return Err(Error::MissingColumn {
                    path: origin.to_path_buf(),
                    column: COLUMNS[0].into(),
                })
            }
        }
    };
    let names: Vec<&str> = header.split('\t').map(str::trim).collect();
    let mut index = [0usize; 7];
    for (slot, column) in index.iter_mut().zip(COLUMNS) {
        *slot = names
            .iter()
            .position(|n| *n == column)
            .ok_or_else(|| Error::MissingColumn {
                path: origin.to_path_buf(),
                column: column.into(),
            })?;
    }
    let [i_id, i_path, i_offset, i_duration, i_speaker, i_gender, i_text] = index;

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut entries = Vec::new();
    for (lineno, line) in lines {
        let row = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let malformed = |message: String| Error::MalformedRow {
            path: origin.to_path_buf(),
            row,
            message,
        };
        let field = |i: usize, name: &str| {
            fields
                .get(i)
                .copied()
                .ok_or_else(|| malformed(format!("missing field '{name}'")))
        };
        let number = |i: usize, name: &str| -> Result<f64> {
            let raw = field(i, name)?;
            raw.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(format!("field '{name}' is not a number: '{raw}'")))
        };

        let id = field(i_id, "id")?.trim().to_string();
        if id.is_empty() {
            return Err(malformed("empty id".into()));
        }
        let offset = number(i_offset, "offset")?;
        let duration = number(i_duration, "duration")?;
        if offset < 0.0 {
            return Err(malformed(format!("offset must be >= 0, got {offset}")));
        }
        if duration <= 0.0 {
            return Err(malformed(format!("duration must be > 0, got {duration}")));
        }
        let gender = field(i_gender, "gender")?
            .parse::<GenderLabel>()
            .map_err(|e| malformed(e.to_string()))?;
        if let Some(&first_row) = seen.get(&id) {
            return Err(Error::DuplicateId {
                path: origin.to_path_buf(),
                id,
                first_row,
                second_row: row,
            });
        }
        seen.insert(id.clone(), row);

        let raw_path = PathBuf::from(field(i_path, "audio_path")?.trim());
        let audio_path = if raw_path.is_relative() {
            base_dir.join(raw_path)
        } else {
            raw_path
        };
        entries.push(ManifestEntry {
            id,
            audio_path,
            offset,
            duration,
            speaker_id: field(i_speaker, "speaker_id")?.trim().to_string(),
            gender,
            transcript: field(i_text, "transcript")?.trim().to_string(),
            gender_inferred: false,
        });
    }
    Ok(entries)
}
