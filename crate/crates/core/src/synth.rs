//! Deterministic synthetic test signals.
//!
//! Band-limited harmonic sources filtered through second-order resonators give
//! vowel-like signals whose f0 and formant frequencies are known exactly. They
//! are used by the test suites and the CLI demos.

use std::f64::consts::PI;

use crate::audio::AudioBuffer;

/// A single formant resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formant {
    pub frequency: f64,
    pub bandwidth: f64,
}

impl Formant {
    pub const fn new(frequency: f64, bandwidth: f64) -> Self {
        Self {
            frequency,
            bandwidth,
        }
    }
}

/// Pure sine tone.
pub fn sine(frequency: f64, amplitude: f64, seconds: f64, sample_rate: u32) -> Vec<f64> {
    let n = (seconds * sample_rate as f64).round() as usize;
    let sr = sample_rate as f64;
    (0..n)
        .map(|i| amplitude * (2.0 * PI * frequency * i as f64 / sr).sin())
        .collect()
}

/// Sum of equal-amplitude cosine harmonics of `f0` up to Nyquist.
///
/// This is a band-limited pulse train with an exact period of `sr / f0`
/// samples, including fractional periods.
pub fn harmonic_source(f0: f64, seconds: f64, sample_rate: u32) -> Vec<f64> {
    let n = (seconds * sample_rate as f64).round() as usize;
    let sr = sample_rate as f64;
    let harmonics = ((0.5 * sr - 1.0) / f0).floor() as usize;
    let mut out = vec![0.0; n];
    for h in 1..=harmonics {
        let w = 2.0 * PI * h as f64 * f0 / sr;
        for (i, o) in out.iter_mut().enumerate() {
            *o += (w * i as f64).cos();
        }
    }
    out
}

/// Two-pole resonator, applied in place.
pub fn resonate(signal: &mut [f64], formant: Formant, sample_rate: u32) {
    let sr = sample_rate as f64;
    let r = (-PI * formant.bandwidth / sr).exp();
    let theta = 2.0 * PI * formant.frequency / sr;
    let a1 = 2.0 * r * theta.cos();
    let a2 = -r * r;
    let (mut y1, mut y2) = (0.0, 0.0);
    for s in signal.iter_mut() {
        let y = *s + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *s = y;
    }
}

/// Harmonic source at `f0` through the given cascade of resonators, peak
/// normalised to `peak`.
pub fn vowel(f0: f64, formants: &[Formant], seconds: f64, sample_rate: u32, peak: f64) -> Vec<f64> {
    let mut x = harmonic_source(f0, seconds, sample_rate);
    for &f in formants {
        resonate(&mut x, f, sample_rate);
    }
    normalize_peak(&mut x, peak);
    x
}

/// The two-formant vowel used throughout the test suites (F1 = 700 Hz,
/// F2 = 1200 Hz).
pub fn test_vowel(f0: f64, seconds: f64, sample_rate: u32) -> AudioBuffer {
    const FORMANTS: [Formant; 2] = [Formant::new(700.0, 90.0), Formant::new(1200.0, 110.0)];
    let x = vowel(f0, &FORMANTS, seconds, sample_rate, 0.8);
    AudioBuffer::from_f64(&x, sample_rate).expect("finite synthesis")
}

pub fn normalize_peak(x: &mut [f64], peak: f64) {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max > 0.0 {
        let g = peak / max;
        x.iter_mut().for_each(|v| *v *= g);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_source_is_periodic() {
        let x = harmonic_source(100.0, 0.1, 16_000);
        for i in 0..1000 {
            assert!((x[i] - x[i + 160]).abs() < 1e-6);
        }
    }

    #[test]
    fn vowel_peak_normalised() {
        let v = test_vowel(140.0, 0.2, 16_000);
        let max = v.samples().iter().fold(0.0f32, |m, s| m.max(s.abs()));
        assert!((max - 0.8).abs() < 1e-6);
    }
}
