//! Pitch-mark (epoch) placement for PSOLA.
//!
//! Voiced regions get one mark per local period, anchored at the strongest
//! waveform peak of the region and propagated in both directions by searching
//! the expected position ±20% of a period. Unvoiced stretches get uniform marks
//! every 10 ms.

use crate::audio::AudioBuffer;
use crate::dsp::pitch::PitchContour;

const UNVOICED_SPACING_SECONDS: f64 = 0.010;
const SEARCH_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct PitchMarks {
    epochs: Vec<usize>,
    periods: Vec<f64>,
    voiced: Vec<bool>,
}

impl PitchMarks {
    /// Strictly increasing mark positions in samples.
    pub fn epochs(&self) -> &[usize] {
        &self.epochs
    }

    /// Local period (in samples) associated with each mark.
    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn voiced(&self) -> &[bool] {
        &self.voiced
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Index of the mark closest to sample position `t`.
    pub fn nearest(&self, t: f64) -> Option<usize> {
        if self.epochs.is_empty() {
            return None;
        }
        let i = self.epochs.partition_point(|&e| (e as f64) < t);
        if i == 0 {
            return Some(0);
        }
        if i == self.epochs.len() {
            return Some(i - 1);
        }
        let (l, r) = (self.epochs[i - 1] as f64, self.epochs[i] as f64);
        Some(if t - l <= r - t { i - 1 } else { i })
    }

    /// Largest period among the marks, or zero when empty.
    pub fn max_period(&self) -> f64 {
        self.periods.iter().copied().fold(0.0, f64::max)
    }
}

/// Places pitch marks on `audio` using the voicing decisions of `contour`.
pub fn detect_pitch_marks(audio: &AudioBuffer, contour: &PitchContour) -> PitchMarks {
    let x = audio.samples();
    let len = x.len();
    let sr = audio.sample_rate() as f64;
    let spacing = (UNVOICED_SPACING_SECONDS * sr).round().max(1.0) as usize;

    let regions = voiced_regions(contour, len);
    let mut marks: Vec<(usize, f64, bool)> = Vec::new();

    // Voiced marks, region by region.
    for &(a, b) in &regions {
        let region_marks = mark_region(x, contour, a, b, sr);
        let n = region_marks.len();
        for (k, &m) in region_marks.iter().enumerate() {
            let period = if n < 2 {
                sr / contour.f0_at_sample(m as f64).unwrap_or(contour.floor_hz())
            } else if k + 1 < n {
                (region_marks[k + 1] - m) as f64
            } else {
                (m - region_marks[k - 1]) as f64
            };
            marks.push((m, period, true));
        }
    }

    // Uniform marks over the complement of the voiced regions.
    let mut cursor = 0;
    let mut gaps = Vec::new();
    for &(a, b) in &regions {
        if a > cursor {
            gaps.push((cursor, a));
        }
        cursor = b;
    }
    if cursor < len {
        gaps.push((cursor, len));
    }
    let voiced_marks: Vec<(usize, f64)> = marks.iter().map(|&(m, p, _)| (m, p)).collect();
    for (a, b) in gaps {
        let mut t = a;
        while t < b {
            let clash = voiced_marks
                .iter()
                .any(|&(m, p)| (m as f64 - t as f64).abs() < 0.5 * p);
            if !clash {
                marks.push((t, spacing as f64, false));
            }
            t += spacing;
        }
    }

    marks.sort_by_key(|&(m, _, _)| m);
    marks.dedup_by_key(|&mut (m, _, _)| m);

    PitchMarks {
        epochs: marks.iter().map(|m| m.0).collect(),
        periods: marks.iter().map(|m| m.1).collect(),
        voiced: marks.iter().map(|m| m.2).collect(),
    }
}

/// Contiguous voiced stretches as half-open sample ranges.
fn voiced_regions(contour: &PitchContour, len: usize) -> Vec<(usize, usize)> {
    let hop = contour.hop_samples() as f64;
    let n = contour.len();
    let f0 = contour.frame_f0();
    let mut regions = Vec::new();
    let mut i = 0;
    while i < n {
        if f0[i].is_none() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && f0[i].is_some() {
            i += 1;
        }
        let end = i - 1;
        let a = if start == 0 {
            0
        } else {
            (contour.frame_center(start) - hop / 2.0).max(0.0) as usize
        };
        let b = if end == n - 1 {
            len
        } else {
            ((contour.frame_center(end) + hop / 2.0) as usize).min(len)
        };
        if b > a {
            regions.push((a, b));
        }
    }
    regions
}

fn mark_region(x: &[f32], contour: &PitchContour, a: usize, b: usize, sr: f64) -> Vec<usize> {
    let region = &x[a..b];
    let (max, min) = region
        .iter()
        .fold((f32::MIN, f32::MAX), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let polarity = if max >= -min { 1.0 } else { -1.0 };
    let value = |i: usize| polarity * x[i];

    let fallback = contour
        .median_f0()
        .unwrap_or((contour.floor_hz() * contour.ceiling_hz()).sqrt());
    let period_at = |t: usize| sr / contour.f0_at_sample(t as f64).unwrap_or(fallback);

    let argmax = |lo: usize, hi: usize| -> usize {
        (lo..hi)
            .max_by(|&i, &j| value(i).total_cmp(&value(j)).then(j.cmp(&i)))
            .unwrap_or(lo)
    };

    let anchor = argmax(a, b);
    let mut marks = vec![anchor];

    let mut t = anchor;
    loop {
        let p = period_at(t);
        let pred = t as f64 + p;
        if pred >= b as f64 {
            break;
        }
        let lo = ((pred - SEARCH_FRACTION * p).ceil() as usize).max(t + 1);
        let hi = ((pred + SEARCH_FRACTION * p).floor() as usize + 1).min(b);
        if lo >= hi {
            break;
        }
        t = argmax(lo, hi);
        marks.push(t);
    }

    let mut t = anchor;
    let mut back = Vec::new();
    loop {
        let p = period_at(t);
        let pred = t as f64 - p;
        if pred < a as f64 {
            break;
        }
        let lo = ((pred - SEARCH_FRACTION * p).ceil().max(a as f64)) as usize;
        let hi = ((pred + SEARCH_FRACTION * p).floor() as usize + 1).min(t);
        if lo >= hi {
            break;
        }
        t = argmax(lo, hi);
        back.push(t);
    }
    back.reverse();
    back.extend(marks);
    back
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::pitch::estimate_default;
    use crate::synth;

    fn marks_for(a: &AudioBuffer) -> PitchMarks {
        detect_pitch_marks(a, &estimate_default(a).unwrap())
    }

    #[test]
    fn silence_marks_every_10ms() {
        let a = AudioBuffer::silence(16_000, 16_000);
        let m = marks_for(&a);
        assert_eq!(m.len(), 100);
        assert!(m.epochs().windows(2).all(|w| w[1] - w[0] == 160));
        assert!(m.voiced().iter().all(|v| !v));
    }

    #[test]
    fn pulse_train_spacing() {
        let a = synth::test_vowel(140.0, 1.0, 16_000);
        let m = marks_for(&a);
        let expected = 16_000.0 / 140.0;
        let e = m.epochs();
        let mut voiced_pairs = 0;
        for k in 0..e.len() - 1 {
            if m.voiced()[k] && m.voiced()[k + 1] {
                let d = (e[k + 1] - e[k]) as f64;
                assert!((d - expected).abs() / expected <= 0.2, "spacing {d}");
                voiced_pairs += 1;
            }
        }
        assert!(voiced_pairs > 100);
    }

    #[test]
    fn edges_stay_in_range() {
        // Voiced tone that runs into the end of the buffer, preceded by silence.
        let mut x = vec![0.0; 4000];
        x.extend(synth::sine(150.0, 0.5, 0.5, 16_000));
        let a = AudioBuffer::from_f64(&x, 16_000).unwrap();
        let m = marks_for(&a);
        assert!(m.epochs().iter().all(|&e| e < a.len()));
        assert!(m.epochs().windows(2).all(|w| w[1] > w[0]));
        assert!(m.voiced().iter().any(|&v| v));
    }

    #[test]
    fn nearest_lookup() {
        let m = marks_for(&AudioBuffer::silence(1600, 16_000));
        assert_eq!(m.nearest(0.0), Some(0));
        assert_eq!(m.nearest(170.0), Some(1));
        assert_eq!(m.nearest(1e9), Some(m.len() - 1));
    }
}
