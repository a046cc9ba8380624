//! Time-domain pitch-synchronous overlap-add.
//!
//! Synthesis marks are generated on the output time axis with a spacing of the
//! local analysis period divided by the pitch factor (unvoiced marks keep
//! their spacing). Each synthesis mark copies the Hann-windowed grain of the
//! analysis mark nearest to its time-scaled position. The overlap-add is
//! normalised by the summed window weight, so every output sample is a convex
//! combination of input samples.

use crate::audio::AudioBuffer;
use crate::dsp::marks::PitchMarks;
use crate::error::{Error, Result};

pub const MIN_SCALE: f64 = 0.25;
pub const MAX_SCALE: f64 = 4.0;
/// Lanczos half-width used to place grains at fractional output positions.
const LANCZOS_TAPS: usize = 4;

const WEIGHT_EPSILON: f64 = 1e-9;

/// Pitch modification factor, either constant or varying over time.
#[derive(Debug, Clone, PartialEq)]
pub enum PitchScale {
    Constant(f64),
    /// One factor per analysis frame; frame `i` is centred at
    /// `offset + i * hop` input samples.
    Contour {
        values: Vec<f64>,
        hop: usize,
        offset: usize,
    },
}

impl PitchScale {
    fn at(&self, t: f64) -> f64 {
        match self {
            PitchScale::Constant(v) => *v,
            PitchScale::Contour {
                values,
                hop,
                offset,
            } => {
                if values.is_empty() {
                    return 1.0;
                }
                let i = ((t - *offset as f64) / (*hop).max(1) as f64).round();
                values[i.clamp(0.0, (values.len() - 1) as f64) as usize]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let check = |v: f64| {
            if v.is_finite() && (MIN_SCALE..=MAX_SCALE).contains(&v) {
                Ok(())
            } else {
                Err(Error::ScaleOutOfRange(v))
            }
        };
        match self {
            PitchScale::Constant(v) => check(*v),
            PitchScale::Contour { values, .. } => values.iter().try_for_each(|&v| check(v)),
        }
    }
}

impl From<f64> for PitchScale {
    fn from(v: f64) -> Self {
        PitchScale::Constant(v)
    }
}

/// Resynthesises `audio` with its pitch scaled by `f0_scale` and its duration
/// scaled by `time_scale`.
///
/// The output has exactly `round(len * time_scale)` samples at the input rate.
pub fn psola_resynthesize(
    audio: &AudioBuffer,
    marks: &PitchMarks,
    f0_scale: impl Into<PitchScale>,
    time_scale: f64,
) -> Result<AudioBuffer> {
    let f0_scale = f0_scale.into();
    f0_scale.validate()?;
    PitchScale::Constant(time_scale).validate()?;

    let out = resynthesize(audio.samples(), marks, &f0_scale, time_scale);
    AudioBuffer::new(out, audio.sample_rate())
}

pub(crate) fn resynthesize(
    x: &[f32],
    marks: &PitchMarks,
    f0_scale: &PitchScale,
    time_scale: f64,
) -> Vec<f32> {
    let out_len = (x.len() as f64 * time_scale).round() as usize;
    if out_len == 0 || x.is_empty() || marks.is_empty() {
        return vec![0.0; out_len];
    }

    let epochs = marks.epochs();
    let periods = marks.periods();
    let voiced = marks.voiced();

    let mut acc = vec![0.0f64; out_len];
    let mut weight = vec![0.0f64; out_len];

    let mut t_out = epochs[0] as f64 * time_scale;
    // Cover the head of the output when the first mark sits late.
    while t_out > 0.0 {
        t_out -= periods[0];
    }
    let max_period = marks.max_period();

    while t_out < out_len as f64 + max_period {
        let t_in = t_out / time_scale;
        let k = marks.nearest(t_in).expect("non-empty marks");
        let centre_in = epochs[k] as isize;
        let period = periods[k].max(1.0);
        add_grain(x, centre_in, t_out, period, &mut acc, &mut weight);

        let step = if voiced[k] {
            period / f0_scale.at(epochs[k] as f64)
        } else {
            period
        };
        t_out += step.max(1.0);
    }

    acc.iter()
        .zip(&weight)
        .map(|(&a, &w)| if w > WEIGHT_EPSILON { (a / w) as f32 } else { 0.0 })
        .collect()
}

/// Overlap-adds the Hann grain of half-length `half_len` centred on input
/// sample `centre_in` at the fractional output position `centre_out`.
fn add_grain(
    x: &[f32],
    centre_in: isize,
    centre_out: f64,
    half_len: f64,
    acc: &mut [f64],
    weight: &mut [f64],
) {
    let first = (centre_out - half_len).floor() as isize + 1;
    let last = (centre_out + half_len).ceil() as isize - 1;
    let frac = centre_out - centre_out.floor();
    let n_out = acc.len() as isize;
    for o in first.max(0)..=last.min(n_out - 1) {
        let d = o as f64 - centre_out;
        let w = 0.5 * (1.0 + (std::f64::consts::PI * d / half_len).cos());
        if w <= 0.0 {
            continue;
        }
        let s = if frac == 0.0 {
            sample(x, centre_in + d as isize)
        } else {
            interpolate(x, centre_in as f64 + d)
        };
        if let Some(s) = s {
            acc[o as usize] += w * s;
            weight[o as usize] += w;
        }
    }
}

fn sample(x: &[f32], i: isize) -> Option<f64> {
    (0..x.len() as isize).contains(&i).then(|| x[i as usize] as f64)
}

/// Lanczos interpolation of `x` at fractional index `t`; `None` outside the
/// signal.
fn interpolate(x: &[f32], t: f64) -> Option<f64> {
    if t < 0.0 || t > (x.len() - 1) as f64 {
        return None;
    }
    let base = t.floor() as isize;
    let a = LANCZOS_TAPS as isize;
    let mut acc = 0.0;
    for k in base - a + 1..=base + a {
        let Some(v) = sample(x, k) else { continue };
        let d = std::f64::consts::PI * (t - k as f64);
        let kernel = if d == 0.0 {
            1.0
        } else {
            let e = d / LANCZOS_TAPS as f64;
            (d.sin() / d) * (e.sin() / e)
        };
        acc += v * kernel;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::marks::detect_pitch_marks;
    use crate::dsp::pitch::estimate_default;
    use crate::synth;

    fn run(a: &AudioBuffer, f0: f64, ts: f64) -> AudioBuffer {
        let c = estimate_default(a).unwrap();
        let m = detect_pitch_marks(a, &c);
        psola_resynthesize(a, &m, f0, ts).unwrap()
    }

    fn median(a: &AudioBuffer) -> f64 {
        estimate_default(a).unwrap().median_f0().unwrap()
    }

    #[test]
    fn identity_reconstructs_input() {
        let a = synth::test_vowel(140.0, 0.5, 16_000);
        let b = run(&a, 1.0, 1.0);
        assert_eq!(b.len(), a.len());
        // Skip head and tail, where grains beyond the outer marks are blended in.
        let n = a.len();
        let err = a.samples()[300..n - 300]
            .iter()
            .zip(&b.samples()[300..n - 300])
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f32, f32::max);
        assert!(err < 1e-4, "max deviation {err}");
    }

    #[test]
    fn doubles_pitch() {
        let a = synth::test_vowel(140.0, 1.0, 16_000);
        let b = run(&a, 2.0, 1.0);
        assert_eq!(b.len(), a.len());
        let m = median(&b);
        assert!((m - 280.0).abs() / 280.0 < 0.05, "median {m}");
    }

    #[test]
    fn stretches_time() {
        let a = synth::test_vowel(140.0, 1.0, 16_000);
        let b = run(&a, 1.0, 1.2);
        let ratio = b.len() as f64 / a.len() as f64;
        assert!((ratio - 1.2).abs() < 0.012);
        let (ma, mb) = (median(&a), median(&b));
        assert!((ma - mb).abs() / ma < 0.05);
    }

    #[test]
    fn rejects_out_of_range_scales() {
        let a = synth::test_vowel(140.0, 0.3, 16_000);
        let m = detect_pitch_marks(&a, &estimate_default(&a).unwrap());
        for (f, t) in [(0.2, 1.0), (4.5, 1.0), (1.0, 0.1), (1.0, 5.0), (f64::NAN, 1.0)] {
            assert!(matches!(
                psola_resynthesize(&a, &m, f, t),
                Err(Error::ScaleOutOfRange(_))
            ));
        }
        let contour = PitchScale::Contour {
            values: vec![1.0, 5.0],
            hop: 160,
            offset: 320,
        };
        assert!(psola_resynthesize(&a, &m, contour, 1.0).is_err());
    }

    #[test]
    fn contour_scale_matches_constant() {
        let a = synth::test_vowel(140.0, 0.5, 16_000);
        let c = estimate_default(&a).unwrap();
        let m = detect_pitch_marks(&a, &c);
        let contour = PitchScale::Contour {
            values: vec![1.5; c.len()],
            hop: c.hop_samples(),
            offset: c.frame_len_samples() / 2,
        };
        let x = psola_resynthesize(&a, &m, contour, 1.0).unwrap();
        let y = psola_resynthesize(&a, &m, 1.5, 1.0).unwrap();
        assert_eq!(x, y);
    }
}
