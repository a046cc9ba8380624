use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::FeatureMatrix;
use crate::audio::AudioBuffer;
use crate::dsp::vtlp_warp;
use crate::error::{Error, Result};

/// Floor applied to mel power before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelConfig {
    pub channels: usize,
    /// Window length in seconds.
    pub window: f64,
    /// Hop in seconds.
    pub hop: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self {
            channels: 80,
            window: 0.025,
            hop: 0.010,
        }
    }
}

impl MelConfig {
    fn validate(&self) -> Result<()> {
        if self.channels == 0 || !(self.window > 0.0) || !(self.hop > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid mel config {self:?}")));
        }
        Ok(())
    }
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular HTK filters over `[0, Nyquist]`, each a list of `(bin, weight)`.
fn mel_filterbank(channels: usize, n_fft: usize, sample_rate: f64) -> Vec<Vec<(usize, f64)>> {
    let bins = n_fft / 2 + 1;
    let top = hz_to_mel(sample_rate / 2.0);
    let edges: Vec<f64> = (0..channels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (channels + 1) as f64))
        .collect();
    let bin_hz = sample_rate / n_fft as f64;
    (0..channels)
        .map(|c| {
            let (lo, mid, hi) = (edges[c], edges[c + 1], edges[c + 2]);
            (0..bins)
                .filter_map(|k| {
                    let f = k as f64 * bin_hz;
                    let w = if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    };
                    (w > 0.0).then_some((k, w))
                })
                .collect()
        })
        .collect()
}

struct Frontend {
    win_len: usize,
    hop: usize,
    n_fft: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    filters: Vec<Vec<(usize, f64)>>,
}

impl Frontend {
    fn new(config: &MelConfig, sample_rate: u32) -> Result<Self> {
        config.validate()?;
        let sr = sample_rate as f64;
        let win_len = (config.window * sr).round() as usize;
        let hop = (config.hop * sr).round() as usize;
        if win_len < 2 || hop == 0 {
            return Err(Error::InvalidArgument(format!(
                "window {win_len} / hop {hop} samples too short"
            )));
        }
        let n_fft = win_len.next_power_of_two();
        let window = (0..win_len)
            .map(|i| {
                0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (win_len - 1) as f64).cos()
            })
            .collect();
        Ok(Self {
            win_len,
            hop,
            n_fft,
            window,
            fft: FftPlanner::new().plan_fft_forward(n_fft),
            filters: mel_filterbank(config.channels, n_fft, sr),
        })
    }

    fn frame_count(&self, len: usize) -> Result<usize> {
        if len < self.win_len {
            return Err(Error::InsufficientFrames {
                needed: self.win_len,
                got: len,
            });
        }
        Ok(1 + (len - self.win_len) / self.hop)
    }

    fn run(&self, x: &[f64], mut warp: impl FnMut(Vec<f64>) -> Result<Vec<f64>>) -> Result<FeatureMatrix> {
        let frames = self.frame_count(x.len())?;
        let channels = self.filters.len();
        let mut values = Vec::with_capacity(frames * channels);
        let mut buf = vec![Complex::new(0.0, 0.0); self.n_fft];
        for t in 0..frames {
            let seg = &x[t * self.hop..t * self.hop + self.win_len];
            for (b, (&s, &w)) in buf.iter_mut().zip(seg.iter().zip(&self.window)) {
                *b = Complex::new(s * w, 0.0);
            }
            buf[self.win_len..].fill(Complex::new(0.0, 0.0));
            self.fft.process(&mut buf);
            let power: Vec<f64> = buf[..=self.n_fft / 2].iter().map(|c| c.norm_sqr()).collect();
            let power = warp(power)?;
            values.extend(self.filters.iter().map(|f| {
                let e: f64 = f.iter().map(|&(k, w)| power[k] * w).sum();
                e.max(LOG_FLOOR).ln()
            }));
        }
        FeatureMatrix::new(frames, channels, values)
    }
}

/// Log-power mel spectrogram with a Hamming window and an FFT length of the
/// next power of two above the window.
///
/// `frames = 1 + (len - window) / hop` in samples.
pub fn log_mel_spectrogram(audio: &AudioBuffer, config: &MelConfig) -> Result<FeatureMatrix> {
    Frontend::new(config, audio.sample_rate())?.run(&audio.samples_f64(), Ok)
}

/// As [`log_mel_spectrogram`], with each magnitude spectrum passed through
/// [`vtlp_warp`] before mel projection.
pub fn log_mel_spectrogram_warped(
    audio: &AudioBuffer,
    config: &MelConfig,
    warp_factor: f64,
    boundary_hz: f64,
) -> Result<FeatureMatrix> {
    let sr = audio.sample_rate() as f64;
    Frontend::new(config, audio.sample_rate())?.run(&audio.samples_f64(), |power| {
        let mag: Vec<f64> = power.iter().map(|p| p.sqrt()).collect();
        Ok(vtlp_warp(&mag, warp_factor, boundary_hz, sr)?
            .into_iter()
            .map(|m| m * m)
            .collect())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn one_second_shape() {
        let a = AudioBuffer::silence(16_000, 16_000);
        let m = log_mel_spectrogram(&a, &MelConfig::default()).unwrap();
        assert_eq!((m.frames(), m.channels()), (98, 80));
    }

    #[test]
    fn frame_count_formula() {
        let cfg = MelConfig::default();
        for len in [400, 401, 559, 560, 561, 12_345] {
            let a = AudioBuffer::silence(len, 16_000);
            let m = log_mel_spectrogram(&a, &cfg).unwrap();
            assert_eq!(m.frames(), 1 + (len - 400) / 160, "len {len}");
        }
        assert!(log_mel_spectrogram(&AudioBuffer::silence(399, 16_000), &cfg).is_err());
    }

    #[test]
    fn zero_signal_hits_floor() {
        let m = log_mel_spectrogram(&AudioBuffer::silence(4000, 16_000), &MelConfig::default()).unwrap();
        assert!(m.values().iter().all(|&v| v == LOG_FLOOR.ln()));
    }

    #[test]
    fn gain_is_additive_shift() {
        let a = synth::test_vowel(150.0, 0.3, 16_000);
        let c = 0.25f64;
        let b = AudioBuffer::from_f64(
            &a.samples().iter().map(|&s| s as f64 * c).collect::<Vec<_>>(),
            16_000,
        )
        .unwrap();
        let cfg = MelConfig::default();
        let ma = log_mel_spectrogram(&a, &cfg).unwrap();
        let mb = log_mel_spectrogram(&b, &cfg).unwrap();
        let shift = 2.0 * c.ln();
        for (x, y) in ma.values().iter().zip(mb.values()) {
            if *x > LOG_FLOOR.ln() + 10.0 {
                assert!((y - x - shift).abs() < 1e-4, "{x} {y}");
            }
        }
    }

    #[test]
    fn tone_lands_in_matching_channel() {
        let a = AudioBuffer::from_f64(&synth::sine(1000.0, 0.5, 0.2, 16_000), 16_000).unwrap();
        let m = log_mel_spectrogram(&a, &MelConfig::default()).unwrap();
        let row = m.row(10);
        let best = (0..80).max_by(|&i, &j| row[i].total_cmp(&row[j])).unwrap();
        let top = hz_to_mel(8000.0);
        let centre = mel_to_hz(top * (best + 1) as f64 / 81.0);
        assert!((centre - 1000.0).abs() < 80.0, "channel centre {centre}");
    }

    #[test]
    fn unit_warp_is_identity() {
        let a = synth::test_vowel(150.0, 0.2, 16_000);
        let cfg = MelConfig::default();
        let plain = log_mel_spectrogram(&a, &cfg).unwrap();
        let warped = log_mel_spectrogram_warped(&a, &cfg, 1.0, 4800.0).unwrap();
        for (x, y) in plain.values().iter().zip(warped.values()) {
            assert!((x - y).abs() < 1e-9);
        }
        let up = log_mel_spectrogram_warped(&a, &cfg, 1.1, 4800.0).unwrap();
        assert_ne!(plain, up);
    }
}
