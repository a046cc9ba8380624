use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SegmentScore, WerBreakdown};
use crate::error::{Error, Result};

/// Percentile interval of `WER(baseline) - WER(system)` in percentage points.
/// Positive values mean the system is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapResult {
    pub difference: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub n_resamples: usize,
    pub significant: bool,
}

pub(crate) fn check_paired(baseline: &[SegmentScore], system: &[SegmentScore]) -> Result<()> {
    if baseline.len() != system.len() {
        let index = baseline.len().min(system.len());
        let id = |s: &[SegmentScore]| s.get(index).map_or_else(|| "<end>".to_owned(), |x| x.id.clone());
        return Err(Error::MismatchedIds {
            index,
            baseline: id(baseline),
            system: id(system),
        });
    }
    for (index, (b, s)) in baseline.iter().zip(system).enumerate() {
        if b.id != s.id {
            return Err(Error::MismatchedIds {
                index,
                baseline: b.id.clone(),
                system: s.id.clone(),
            });
        }
    }
    Ok(())
}

fn pooled(parts: impl Iterator<Item = WerBreakdown>) -> f64 {
    let t: WerBreakdown = parts.sum();
    t.errors() as f64 / t.ref_words as f64 * 100.0
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Paired bootstrap over segment indices shared by both systems.
///
/// `confidence` is in percent. Both lists must carry the same ids in the same
/// order.
pub fn bootstrap_significance(
    baseline: &[SegmentScore],
    system: &[SegmentScore],
    n_resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapResult> {
    check_paired(baseline, system)?;
    if baseline.is_empty() {
        return Err(Error::EmptyGroup("all".into()));
    }
    if n_resamples == 0 || !(confidence > 0.0 && confidence < 100.0) {
        return Err(Error::InvalidArgument(format!(
            "need n_resamples > 0 and confidence in (0, 100), got {n_resamples} and {confidence}"
        )));
    }
    let n = baseline.len();
    let difference = pooled(baseline.iter().map(|s| s.breakdown)) - pooled(system.iter().map(|s| s.breakdown));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![0usize; n];
    let mut diffs: Vec<f64> = (0..n_resamples)
        .map(|_| {
            idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
            pooled(idx.iter().map(|&i| baseline[i].breakdown))
                - pooled(idx.iter().map(|&i| system[i].breakdown))
        })
        .collect();
    diffs.sort_by(f64::total_cmp);

    let tail = (1.0 - confidence / 100.0) / 2.0;
    let lower = quantile(&diffs, tail);
    let upper = quantile(&diffs, 1.0 - tail);
    Ok(BootstrapResult {
        difference,
        lower,
        upper,
        confidence,
        n_resamples,
        significant: lower > 0.0 || upper < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::GenderLabel;

    fn seg(id: usize, errors: usize, words: usize) -> SegmentScore {
        SegmentScore {
            id: format!("s{id}"),
            gender: GenderLabel::Male,
            breakdown: WerBreakdown {
                substitutions: errors,
                ref_words: words,
                ..Default::default()
            },
            mean_f0: None,
        }
    }

    fn corpus(f: impl Fn(usize) -> usize) -> Vec<SegmentScore> {
        (0..60).map(|i| seg(i, f(i), 12)).collect()
    }

    #[test]
    fn identical_systems_not_significant() {
        let a = corpus(|i| i % 4);
        let r = bootstrap_significance(&a, &a, 1000, 95.0, 1).unwrap();
        assert!(r.lower <= 0.0 && r.upper >= 0.0);
        assert!(!r.significant);
    }

    #[test]
    fn uniformly_better_is_significant() {
        let a = corpus(|i| 2 + i % 3);
        let b = corpus(|i| 1 + i % 3);
        let r = bootstrap_significance(&a, &b, 1000, 95.0, 1).unwrap();
        assert!(r.significant && r.lower > 0.0, "{r:?}");
    }

    #[test]
    fn deterministic_and_nested() {
        let a = corpus(|i| (i * 7) % 5);
        let b = corpus(|i| (i * 3) % 4);
        let r95 = bootstrap_significance(&a, &b, 500, 95.0, 9).unwrap();
        assert_eq!(r95, bootstrap_significance(&a, &b, 500, 95.0, 9).unwrap());
        let r90 = bootstrap_significance(&a, &b, 500, 90.0, 9).unwrap();
        assert!(r95.lower <= r90.lower && r90.upper <= r95.upper);
    }

    #[test]
    fn mismatched_ids() {
        let a = corpus(|_| 1);
        let mut b = corpus(|_| 1);
        b.swap(3, 4);
        let err = bootstrap_significance(&a, &b, 10, 95.0, 0).unwrap_err();
        assert!(matches!(err, Error::MismatchedIds { index: 3, .. }));
        assert!(bootstrap_significance(&a, &b[..5], 10, 95.0, 0).is_err());
    }
}
