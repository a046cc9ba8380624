use crate::error::{Error, Result};
use crate::policy::GenderLabel;

use super::WerBreakdown;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentScore {
    pub id: String,
    pub gender: GenderLabel,
    pub breakdown: WerBreakdown,
    /// Mean f0 in Hz; `None` when the segment is unvoiced or unmeasured.
    pub mean_f0: Option<f64>,
}

/// Pooled WER in percent over `scores`, optionally restricted to one gender.
pub fn corpus_wer(scores: &[SegmentScore], group: Option<GenderLabel>) -> Result<f64> {
    let mut selected = scores
        .iter()
        .filter(|s| group.is_none_or(|g| s.gender == g))
        .peekable();
    if selected.peek().is_none() {
        return Err(Error::EmptyGroup(
            group.map_or_else(|| "all".to_owned(), |g| g.to_string()),
        ));
    }
    let total: WerBreakdown = selected.map(|s| s.breakdown).sum();
    Ok(total.wer()? * 100.0)
}

/// Relative WER reduction in percent; positive when the system improves.
pub fn werr(baseline_wer: f64, system_wer: f64) -> Result<f64> {
    if !(baseline_wer > 0.0) {
        return Err(Error::ZeroBaseline(baseline_wer));
    }
    Ok((baseline_wer - system_wer) / baseline_wer * 100.0)
}
