use std::ops::{Add, AddAssign};
use std::sync::LazyLock;

use regex::Regex;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct WerBreakdown {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub ref_words: usize,
}

impl WerBreakdown {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    /// Error rate as a fraction (may exceed 1).
    pub fn wer(&self) -> Result<f64> {
        if self.ref_words == 0 {
            return Err(Error::EmptyReference);
        }
        Ok(self.errors() as f64 / self.ref_words as f64)
    }
}

impl Add for WerBreakdown {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            substitutions: self.substitutions + o.substitutions,
            deletions: self.deletions + o.deletions,
            insertions: self.insertions + o.insertions,
            ref_words: self.ref_words + o.ref_words,
        }
    }
}

impl AddAssign for WerBreakdown {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for WerBreakdown {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Minimal-edit alignment with unit costs.
///
/// Among optimal alignments the backtrace prefers substitution (or match),
/// then insertion, then deletion, walking from the end of both sequences.
pub fn wer_align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<WerBreakdown> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut d = vec![0u32; (n + 1) * w];
    for (j, cell) in d[..w].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=n {
        d[i * w] = i as u32;
        for j in 1..=m {
            let sub = d[(i - 1) * w + j - 1] + u32::from(reference[i - 1] != hypothesis[j - 1]);
            let ins = d[i * w + j - 1] + 1;
            let del = d[(i - 1) * w + j] + 1;
            d[i * w + j] = sub.min(ins).min(del);
        }
    }

    let mut out = WerBreakdown {
        ref_words: n,
        ..Default::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let mismatch = reference[i - 1] != hypothesis[j - 1];
            if d[(i - 1) * w + j - 1] + u32::from(mismatch) == here {
                out.substitutions += usize::from(mismatch);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && d[i * w + j - 1] + 1 == here {
            out.insertions += 1;
            j -= 1;
        } else {
            out.deletions += 1;
            i -= 1;
        }
    }
    Ok(out)
}

static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{P}").expect("valid regex"));

/// Lowercases, deletes Unicode punctuation and splits on whitespace.
pub fn normalize_text(text: &str) -> Vec<String> {
    PUNCT
        .replace_all(&text.to_lowercase(), "")
        .split_whitespace()
        .map(str::to_owned)
        .collect()
}

/// Normalizes both strings and aligns them.
pub fn score_text(reference: &str, hypothesis: &str) -> Result<WerBreakdown> {
    wer_align(&normalize_text(reference), &normalize_text(hypothesis))
}
