use std::collections::BTreeMap;

use super::bootstrap::check_paired;
use super::{werr, SegmentScore, WerBreakdown};
use crate::error::{Error, Result};
use crate::policy::GenderLabel;

/// Bins with fewer reference words than this are flagged.
pub const LOW_CONFIDENCE_WORDS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct BinReport {
    pub bin_low: f64,
    pub bin_high: f64,
    pub gender: GenderLabel,
    pub baseline_wer: f64,
    pub system_wer: f64,
    /// `None` when the baseline makes no errors in the bin.
    pub werr_percent: Option<f64>,
    pub word_count: usize,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedReport {
    /// Ordered by gender (F, M, U), then by frequency.
    pub bins: Vec<BinReport>,
    /// Reference words in segments without a mean f0.
    pub excluded_unvoiced_words: usize,
    pub total_words: usize,
}

/// Groups paired segments into `[k·width, (k+1)·width)` mean-f0 bins per
/// gender. Bin membership uses the baseline's `mean_f0`.
pub fn binned_werr_report(
    baseline: &[SegmentScore],
    system: &[SegmentScore],
    bin_width: f64,
) -> Result<BinnedReport> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidArgument(format!("bin width must be positive, got {bin_width}")));
    }
    check_paired(baseline, system)?;
    let rank = |g: GenderLabel| match g {
        GenderLabel::Female => 0u8,
        GenderLabel::Male => 1,
        GenderLabel::Unknown => 2,
    };

    let mut groups: BTreeMap<(u8, i64), (GenderLabel, WerBreakdown, WerBreakdown)> = BTreeMap::new();
    let mut excluded_unvoiced_words = 0;
    let mut total_words = 0;
    for (b, s) in baseline.iter().zip(system) {
        total_words += b.breakdown.ref_words;
        let Some(f0) = b.mean_f0.filter(|f| f.is_finite() && *f >= 0.0) else {
            excluded_unvoiced_words += b.breakdown.ref_words;
            continue;
        };
        let k = (f0 / bin_width).floor() as i64;
        let slot = groups
            .entry((rank(b.gender), k))
            .or_insert((b.gender, WerBreakdown::default(), WerBreakdown::default()));
        slot.1 += b.breakdown;
        slot.2 += s.breakdown;
    }

    let bins = groups
        .into_iter()
        .map(|((_, k), (gender, base, sys))| {
            let baseline_wer = base.wer()? * 100.0;
            let system_wer = sys.wer()? * 100.0;
            Ok(BinReport {
                bin_low: k as f64 * bin_width,
                bin_high: (k + 1) as f64 * bin_width,
                gender,
                baseline_wer,
                system_wer,
                werr_percent: werr(baseline_wer, system_wer).ok(),
                word_count: base.ref_words,
                low_confidence: base.ref_words < LOW_CONFIDENCE_WORDS,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BinnedReport {
        bins,
        excluded_unvoiced_words,
        total_words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(id: &str, g: GenderLabel, f0: Option<f64>, errors: usize, words: usize) -> SegmentScore {
        SegmentScore {
            id: id.into(),
            gender: g,
            breakdown: WerBreakdown {
                substitutions: errors,
                ref_words: words,
                ..Default::default()
            },
            mean_f0: f0,
        }
    }

    #[test]
    fn bins_and_accounting() {
        use GenderLabel::*;
        let base = vec![
            seg("a", Female, Some(201.0), 10, 100),
            seg("b", Female, Some(209.9), 10, 100),
            seg("c", Male, Some(235.0), 4, 30),
            seg("d", Male, Some(120.0), 5, 50),
            seg("e", Male, None, 3, 17),
        ];
        let mut sys = base.clone();
        sys[0].breakdown.substitutions = 8;
        sys[1].breakdown.substitutions = 8;
        sys[2].breakdown.substitutions = 6;
        let r = binned_werr_report(&base, &sys, 10.0).unwrap();
        assert_eq!(r.bins.len(), 3);
        let f = &r.bins[0];
        assert_eq!((f.gender, f.bin_low, f.bin_high, f.word_count), (Female, 200.0, 210.0, 200));
        assert!((f.werr_percent.unwrap() - 20.0).abs() < 1e-9);
        assert!(!f.low_confidence);
        assert_eq!(r.bins[1].bin_low, 120.0);
        assert_eq!(r.bins[1].werr_percent, Some(0.0));
        let high = &r.bins[2];
        assert!(high.low_confidence && high.werr_percent.unwrap() < 0.0);
        let summed: usize = r.bins.iter().map(|b| b.word_count).sum();
        assert_eq!(summed + r.excluded_unvoiced_words, r.total_words);
        assert_eq!(r.total_words, 297);
    }

    #[test]
    fn single_segment_one_bin() {
        let s = vec![seg("a", GenderLabel::Male, Some(133.3), 1, 9)];
        let r = binned_werr_report(&s, &s, 10.0).unwrap();
        assert_eq!(r.bins.len(), 1);
        assert!(r.bins.iter().all(|b| (b.bin_high - b.bin_low - 10.0).abs() < 1e-12));
    }

    #[test]
    fn zero_baseline_bin_has_no_werr() {
        let s = vec![seg("a", GenderLabel::Female, Some(250.0), 0, 9)];
        let r = binned_werr_report(&s, &s, 10.0).unwrap();
        assert_eq!(r.bins[0].werr_percent, None);
    }
}
