//! f0 and formant shifting built on PSOLA and the sinc resampler.

use crate::audio::AudioBuffer;
use crate::dsp::marks::detect_pitch_marks;
use crate::dsp::pitch::{estimate_default, PitchContour};
use crate::dsp::psola::{self, PitchScale};
use crate::dsp::resample::resample_by_rates;
use crate::error::{Error, Result};

pub const MIN_BETA: f64 = 0.5;
pub const MAX_BETA: f64 = 2.0;

/// Result of an f0 shift, with the ratio that was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Shift {
    pub audio: AudioBuffer,
    pub source_median: f64,
    pub alpha: f64,
}

/// Scales the whole voiced contour of `audio` so that its median becomes
/// `target_median`.
pub fn shift_f0(audio: &AudioBuffer, target_median: f64) -> Result<AudioBuffer> {
    shift_f0_detailed(audio, target_median).map(|s| s.audio)
}

pub fn shift_f0_detailed(audio: &AudioBuffer, target_median: f64) -> Result<F0Shift> {
    let contour = estimate_default(audio)?;
    shift_f0_with_contour(audio, &contour, target_median)
}

pub fn shift_f0_with_contour(
    audio: &AudioBuffer,
    contour: &PitchContour,
    target_median: f64,
) -> Result<F0Shift> {
    if !(target_median.is_finite() && target_median > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target median must be positive, got {target_median}"
        )));
    }
    let source_median = contour.median_f0()?;
    let alpha = target_median / source_median;
    let marks = detect_pitch_marks(audio, contour);
    let out = psola::psola_resynthesize(audio, &marks, PitchScale::Constant(alpha), 1.0)?;
    Ok(F0Shift {
        audio: out,
        source_median,
        alpha,
    })
}

/// Scales the spectral envelope by `beta` while keeping f0 and duration.
///
/// 1. The buffer is relabelled as sampled at `beta * sr`, which scales every
///    frequency by `beta` and the duration by `1 / beta`.
/// 2. PSOLA with `time_scale = beta` and `f0_scale = 1 / beta` restores the
///    duration and f0 while the envelope stays scaled.
/// 3. The result is sinc-resampled from `beta * sr` back to `sr`.
pub fn shift_formants(audio: &AudioBuffer, beta: f64) -> Result<AudioBuffer> {
    if !(beta.is_finite() && (MIN_BETA..=MAX_BETA).contains(&beta)) {
        return Err(Error::BetaOutOfRange(beta));
    }
    let sr = audio.sample_rate() as f64;
    let relabelled_rate = beta * sr;

    // Pitch marks are sample positions and do not depend on the rate label.
    let contour = estimate_default(audio)?;
    let marks = detect_pitch_marks(audio, &contour);
    let stretched = psola::resynthesize(
        audio.samples(),
        &marks,
        &PitchScale::Constant(1.0 / beta),
        beta,
    );

    let mut out = resample_by_rates(&stretched, relabelled_rate, sr);
    out.resize(audio.len(), 0.0);
    Ok(AudioBuffer::new(out, audio.sample_rate())?.clamped())
}
