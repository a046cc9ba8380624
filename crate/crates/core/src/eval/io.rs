//! Text formats for scoring.
//!
//! Transcripts: one `id<TAB>text` line per segment, no header.
//! Metadata: header row with columns `id` and `gender`, plus optional
//! `mean_f0` (Hz; blank or `unvoiced` for none) and `audio_path`.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::{score_text, BinnedReport, SegmentScore};
use crate::error::{Error, Result};
use crate::policy::GenderLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMeta {
    pub id: String,
    pub gender: GenderLabel,
    pub mean_f0: Option<f64>,
    pub audio_path: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn check_unique<'a>(
    path: &Path,
    seen: &mut HashMap<&'a str, usize>,
    id: &'a str,
    row: usize,
) -> Result<()> {
    if let Some(&first_row) = seen.get(id) {
        return Err(Error::DuplicateId {
            path: path.to_path_buf(),
            id: id.to_owned(),
            first_row,
            second_row: row,
        });
    }
    seen.insert(id, row);
    Ok(())
}

pub fn parse_transcripts(text: &str, origin: &Path) -> Result<Vec<Transcript>> {
    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = line.split_once('\t').unwrap_or((line, ""));
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::MalformedRow {
                path: origin.to_path_buf(),
                row: i + 1,
                message: "empty id".into(),
            });
        }
        check_unique(origin, &mut seen, id, i + 1)?;
        out.push(Transcript {
            id: id.to_owned(),
            text: body.to_owned(),
        });
    }
    Ok(out)
}

pub fn read_transcripts(path: impl AsRef<Path>) -> Result<Vec<Transcript>> {
    let path = path.as_ref();
    parse_transcripts(&read(path)?, path)
}

fn parse_f0(field: &str) -> std::result::Result<Option<f64>, String> {
    let f = field.trim();
    if f.is_empty() || f.eq_ignore_ascii_case("unvoiced") || f.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    match f.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(Some(v)),
        _ => Err(format!("invalid mean_f0 '{f}'")),
    }
}

pub fn parse_meta(text: &str, origin: &Path, base_dir: &Path) -> Result<Vec<SegmentMeta>> {
    let missing = |column: &str| Error::MissingColumn {
        path: origin.to_path_buf(),
        column: column.into(),
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| missing("id"))?;
    let names: Vec<&str> = header.split('\t').map(str::trim).collect();
    let col = |name: &str| names.iter().position(|n| *n == name);
    let i_id = col("id").ok_or_else(|| missing("id"))?;
    let i_gender = col("gender").ok_or_else(|| missing("gender"))?;
    let i_f0 = col("mean_f0");
    let i_audio = col("audio_path");

    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in lines {
        let row = i + 1;
        let bad = |message: String| Error::MalformedRow {
            path: origin.to_path_buf(),
            row,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let get = |k: usize| fields.get(k).copied().unwrap_or("").trim();
        let id = get(i_id);
        if id.is_empty() {
            return Err(bad("empty id".into()));
        }
        check_unique(origin, &mut seen, id, row)?;
        let gender = get(i_gender).parse::<GenderLabel>().map_err(|e| bad(e.to_string()))?;
        let mean_f0 = i_f0.map(|k| parse_f0(get(k))).transpose().map_err(bad)?.flatten();
        let audio_path = i_audio
            .map(get)
            .filter(|p| !p.is_empty())
            .map(|p| base_dir.join(p));
        out.push(SegmentMeta {
            id: id.to_owned(),
            gender,
            mean_f0,
            audio_path,
        });
    }
    Ok(out)
}

pub fn read_meta(path: impl AsRef<Path>) -> Result<Vec<SegmentMeta>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_meta(&read(path)?, path, base)
}

/// Scores every reference segment in reference order.
///
/// Each reference id must appear in `hyps` and `meta`; the paths only label
/// errors.
pub fn score_segments(
    refs: &[Transcript],
    hyps: &[Transcript],
    meta: &[SegmentMeta],
    hyp_path: &Path,
    meta_path: &Path,
) -> Result<Vec<SegmentScore>> {
    let hyps: HashMap<&str, &str> = hyps.iter().map(|t| (t.id.as_str(), t.text.as_str())).collect();
    let meta: HashMap<&str, &SegmentMeta> = meta.iter().map(|m| (m.id.as_str(), m)).collect();
    refs.iter()
        .map(|r| {
            let missing = |path: &Path| Error::MissingId {
                path: path.to_path_buf(),
                id: r.id.clone(),
            };
            let hyp = hyps.get(r.id.as_str()).ok_or_else(|| missing(hyp_path))?;
            let m = meta.get(r.id.as_str()).ok_or_else(|| missing(meta_path))?;
            let breakdown = score_text(&r.text, hyp).map_err(|e| match e {
                Error::EmptyReference => Error::InvalidArgument(format!("empty reference for '{}'", r.id)),
                other => other,
            })?;
            Ok(SegmentScore {
                id: r.id.clone(),
                gender: m.gender,
                breakdown,
                mean_f0: m.mean_f0,
            })
        })
        .collect()
}

/// Writes one line per bin with a header; WERR is blank when undefined.
pub fn write_bins_tsv<W: Write>(mut out: W, report: &BinnedReport) -> io::Result<()> {
    writeln!(
        out,
        "bin_low\tbin_high\tgender\tbaseline_wer\tsystem_wer\twerr_percent\tword_count\tlow_confidence"
    )?;
    for b in &report.bins {
        let werr = b.werr_percent.map(|w| format!("{w:.2}")).unwrap_or_default();
        writeln!(
            out,
            "{}\t{}\t{}\t{:.2}\t{:.2}\t{werr}\t{}\t{}",
            b.bin_low, b.bin_high, b.gender.code(), b.baseline_wer, b.system_wer, b.word_count, b.low_confidence
        )?;
    }
    Ok(())
}
