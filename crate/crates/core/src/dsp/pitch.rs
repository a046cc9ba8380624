//! Normalised-autocorrelation pitch tracking.
//!
//! Each analysis frame is 40 ms long, Hann windowed and advanced by 10 ms. The
//! frame autocorrelation is divided by the autocorrelation of the window, which
//! removes the taper bias at long lags, and the best peak in
//! `[sr / ceiling, sr / floor]` is refined by evaluating the normalised
//! autocorrelation at fractional lags directly from the power spectrum. A small per-octave penalty on long lags
//! suppresses sub-harmonic picks.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_FLOOR_HZ: f64 = 75.0;
pub const DEFAULT_CEILING_HZ: f64 = 500.0;

const FRAME_SECONDS: f64 = 0.040;
const HOP_SECONDS: f64 = 0.010;
const VOICING_THRESHOLD: f64 = 0.45;
/// Frames whose peak amplitude is below this fraction of the global peak are
/// treated as silence.
const SILENCE_THRESHOLD: f64 = 0.03;
const OCTAVE_COST: f64 = 0.01;
/// Peaks whose rough score trails the best by more than this are not refined.
const REFINE_MARGIN: f64 = 0.02;

/// Framewise f0 estimates with voicing flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchContour {
    sample_rate: u32,
    frame_len: usize,
    hop: usize,
    floor_hz: f64,
    ceiling_hz: f64,
    frame_f0: Vec<Option<f64>>,
    voicing_strength: Vec<f64>,
}

impl PitchContour {
    /// Assembles a contour from precomputed frames using the standard frame
    /// geometry for `sample_rate`.
    pub fn from_frames(
        sample_rate: u32,
        floor_hz: f64,
        ceiling_hz: f64,
        frame_f0: Vec<Option<f64>>,
        voicing_strength: Vec<f64>,
    ) -> Result<Self> {
        if frame_f0.len() != voicing_strength.len() {
            return Err(Error::InvalidArgument(
                "f0 and voicing strength lengths differ".into(),
            ));
        }
        if frame_f0
            .iter()
            .flatten()
            .any(|&f| !(floor_hz..=ceiling_hz).contains(&f))
        {
            return Err(Error::InvalidArgument(
                "voiced f0 outside [floor, ceiling]".into(),
            ));
        }
        let (frame_len, hop) = frame_geometry(sample_rate);
        Ok(Self {
            sample_rate,
            frame_len,
            hop,
            floor_hz,
            ceiling_hz,
            frame_f0,
            voicing_strength,
        })
    }

    pub fn frame_hop(&self) -> f64 {
        self.hop as f64 / self.sample_rate as f64
    }

    pub fn hop_samples(&self) -> usize {
        self.hop
    }

    pub fn frame_len_samples(&self) -> usize {
        self.frame_len
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn floor_hz(&self) -> f64 {
        self.floor_hz
    }

    pub fn ceiling_hz(&self) -> f64 {
        self.ceiling_hz
    }

    pub fn frame_f0(&self) -> &[Option<f64>] {
        &self.frame_f0
    }

    pub fn voicing_strength(&self) -> &[f64] {
        &self.voicing_strength
    }

    pub fn len(&self) -> usize {
        self.frame_f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame_f0.is_empty()
    }

    /// Sample index at the centre of frame `i`.
    pub fn frame_center(&self, i: usize) -> f64 {
        i as f64 * self.hop as f64 + self.frame_len as f64 / 2.0
    }

    /// Index of the frame whose centre is closest to sample `t`.
    pub fn frame_at_sample(&self, t: f64) -> usize {
        if self.frame_f0.is_empty() {
            return 0;
        }
        let idx = ((t - self.frame_len as f64 / 2.0) / self.hop as f64).round();
        idx.clamp(0.0, (self.frame_f0.len() - 1) as f64) as usize
    }

    /// f0 of the frame nearest to sample `t`, if voiced.
    pub fn f0_at_sample(&self, t: f64) -> Option<f64> {
        self.frame_f0.get(self.frame_at_sample(t)).copied().flatten()
    }

    pub fn voiced_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.frame_f0.iter().flatten().copied()
    }

    pub fn voiced_count(&self) -> usize {
        self.frame_f0.iter().filter(|f| f.is_some()).count()
    }

    pub fn voiced_fraction(&self) -> f64 {
        if self.frame_f0.is_empty() {
            0.0
        } else {
            self.voiced_count() as f64 / self.frame_f0.len() as f64
        }
    }

    /// Median f0 over voiced frames; the mean of the two central values for
    /// even counts.
    pub fn median_f0(&self) -> Result<f64> {
        let mut v: Vec<f64> = self.voiced_values().collect();
        if v.is_empty() {
            return Err(Error::UnvoicedInput);
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Ok(if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        })
    }

    /// Arithmetic mean f0 over voiced frames.
    pub fn mean_f0(&self) -> Option<f64> {
        let n = self.voiced_count();
        (n > 0).then(|| self.voiced_values().sum::<f64>() / n as f64)
    }
}

/// Median over the voiced frames of `contour`.
pub fn median_f0(contour: &PitchContour) -> Result<f64> {
    contour.median_f0()
}

fn frame_geometry(sample_rate: u32) -> (usize, usize) {
    let sr = sample_rate as f64;
    (
        (FRAME_SECONDS * sr).round() as usize,
        (HOP_SECONDS * sr).round().max(1.0) as usize,
    )
}

/// Minimum buffer length accepted by [`estimate_pitch_contour`].
pub fn min_samples(sample_rate: u32) -> usize {
    2 * frame_geometry(sample_rate).0
}

pub fn estimate_default(audio: &AudioBuffer) -> Result<PitchContour> {
    estimate_pitch_contour(audio, DEFAULT_FLOOR_HZ, DEFAULT_CEILING_HZ)
}

pub fn estimate_pitch_contour(
    audio: &AudioBuffer,
    floor_hz: f64,
    ceiling_hz: f64,
) -> Result<PitchContour> {
    let sr = audio.sample_rate() as f64;
    if !(floor_hz > 0.0 && floor_hz < ceiling_hz && ceiling_hz < sr / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "pitch range must satisfy 0 < floor < ceiling < sr/2, got [{floor_hz}, {ceiling_hz}] at {sr} Hz"
        )));
    }
    let (frame_len, hop) = frame_geometry(audio.sample_rate());
    let needed = 2 * frame_len;
    if audio.len() < needed {
        return Err(Error::InsufficientFrames {
            needed,
            got: audio.len(),
        });
    }

    let min_lag = ((sr / ceiling_hz).floor() as usize).max(2);
    let max_lag = ((sr / floor_hz).ceil() as usize).min(frame_len - 2);
    let tracker = FrameTracker::new(frame_len, max_lag);

    let x = audio.samples();
    let global_peak = x.iter().fold(0.0f64, |m, &s| m.max(s.abs() as f64));
    let n_frames = 1 + (x.len() - frame_len) / hop;

    let mut frame_f0 = Vec::with_capacity(n_frames);
    let mut strength = Vec::with_capacity(n_frames);
    let mut scratch = tracker.scratch();
    for i in 0..n_frames {
        let frame = &x[i * hop..i * hop + frame_len];
        let (f0, s) = if global_peak == 0.0 {
            (None, 0.0)
        } else {
            let local_peak = frame.iter().fold(0.0f64, |m, &s| m.max(s.abs() as f64));
            if local_peak < SILENCE_THRESHOLD * global_peak {
                (None, 0.0)
            } else {
                tracker.analyse(frame, &mut scratch, min_lag, max_lag, sr, floor_hz, ceiling_hz)
            }
        };
        frame_f0.push(f0);
        strength.push(s);
    }

    Ok(PitchContour {
        sample_rate: audio.sample_rate(),
        frame_len,
        hop,
        floor_hz,
        ceiling_hz,
        frame_f0,
        voicing_strength: strength,
    })
}

/// Oversampling factor of the autocorrelation lag grid.
const LAG_OVERSAMPLE: usize = 4;

struct FrameTracker {
    window: Vec<f64>,
    /// Window autocorrelation on the oversampled lag grid.
    window_acf: Vec<f64>,
    window_power: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    nfft: usize,
}

/// Per-thread buffers for [`FrameTracker::analyse`].
struct Scratch {
    buf: Vec<Complex<f64>>,
    wide: Vec<Complex<f64>>,
    power: Vec<f64>,
}

impl FrameTracker {
    fn new(frame_len: usize, max_lag: usize) -> Self {
        let nfft = (frame_len + max_lag + 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(nfft);
        let inverse = planner.plan_fft_inverse(nfft * LAG_OVERSAMPLE);
        let window = hann(frame_len);
        let mut tracker = Self {
            window,
            window_acf: Vec::new(),
            window_power: Vec::new(),
            forward,
            inverse,
            nfft,
        };
        let mut scratch = tracker.scratch();
        let w = tracker.window.clone();
        tracker.window_acf = tracker.autocorrelation(&w, &mut scratch);
        tracker.window_power = scratch.power;
        tracker
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            buf: vec![Complex::default(); self.nfft],
            wide: vec![Complex::default(); self.nfft * LAG_OVERSAMPLE],
            power: vec![0.0; self.nfft / 2 + 1],
        }
    }

    /// Linear autocorrelation sampled every `1 / LAG_OVERSAMPLE` lags and
    /// normalised so that lag 0 equals 1. Leaves the one-sided power spectrum
    /// in `scratch.power`.
    fn autocorrelation(&self, seg: &[f64], scratch: &mut Scratch) -> Vec<f64> {
        let buf = &mut scratch.buf;
        for (b, &s) in buf.iter_mut().zip(seg.iter().chain(std::iter::repeat(&0.0))) {
            *b = Complex::new(s, 0.0);
        }
        self.forward.process(buf);
        let half = self.nfft / 2;
        for (p, b) in scratch.power.iter_mut().zip(buf.iter()) {
            *p = b.norm_sqr();
        }
        // Zero-padding the spectrum interpolates the lag axis.
        let wide = &mut scratch.wide;
        wide.fill(Complex::default());
        let m = wide.len();
        wide[0] = Complex::new(scratch.power[0], 0.0);
        for k in 1..half {
            wide[k] = Complex::new(scratch.power[k], 0.0);
            wide[m - k] = wide[k];
        }
        wide[half] = Complex::new(0.5 * scratch.power[half], 0.0);
        wide[m - half] = wide[half];
        self.inverse.process(wide);
        let r0 = wide[0].re;
        if r0 <= 0.0 {
            return vec![0.0; m];
        }
        wide.iter().map(|c| c.re / r0).collect()
    }

    /// Normalised autocorrelation at a fractional lag, evaluated exactly from
    /// the power spectra of the frame and the window.
    fn normalised_at(&self, power: &[f64], tau: f64) -> f64 {
        let at = |p: &[f64]| {
            let step = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * tau / self.nfft as f64);
            let mut phasor = Complex::new(1.0, 0.0);
            let mut acc = p[0];
            let last = p.len() - 1;
            for &pk in &p[1..last] {
                phasor *= step;
                acc += 2.0 * pk * phasor.re;
            }
            phasor *= step;
            acc + p[last] * phasor.re
        };
        let r = at(power) / power_sum(power);
        let w = at(&self.window_power) / power_sum(&self.window_power);
        r / w
    }

    #[allow(clippy::too_many_arguments)]
    fn analyse(
        &self,
        frame: &[f32],
        scratch: &mut Scratch,
        min_lag: usize,
        max_lag: usize,
        sr: f64,
        floor_hz: f64,
        ceiling_hz: f64,
    ) -> (Option<f64>, f64) {
        let mean = frame.iter().map(|&s| s as f64).sum::<f64>() / frame.len() as f64;
        let seg: Vec<f64> = frame
            .iter()
            .zip(&self.window)
            .map(|(&s, &w)| (s as f64 - mean) * w)
            .collect();
        let r = self.autocorrelation(&seg, scratch);
        let norm = |i: usize| r[i] / self.window_acf[i];
        let score = |tau: f64, value: f64| value - OCTAVE_COST * (floor_hz * tau / sr).log2();
        let step = 1.0 / LAG_OVERSAMPLE as f64;

        // Parabolic estimates for every local maximum of the fine grid.
        let mut candidates: Vec<(f64, f64)> = Vec::new(); // (score, lag)
        for i in (min_lag * LAG_OVERSAMPLE).max(1)..=max_lag * LAG_OVERSAMPLE {
            let (a, b, c) = (norm(i - 1), norm(i), norm(i + 1));
            if !(b > a && b >= c) || b <= 0.0 {
                continue;
            }
            let denom = a - 2.0 * b + c;
            let (shift, value) = if denom < 0.0 {
                let d = 0.5 * (a - c) / denom;
                (d, b - 0.25 * (a - c) * d)
            } else {
                (0.0, b)
            };
            let tau = (i as f64 + shift) * step;
            candidates.push((score(tau, value), tau));
        }
        let Some(rough_best) = candidates.iter().map(|c| c.0).reduce(f64::max) else {
            return (None, 0.0);
        };

        // Exact refinement of the contenders.
        let power = &scratch.power;
        let mut best: Option<(f64, f64, f64)> = None; // (score, lag, value)
        for &(rough, tau) in &candidates {
            if rough < rough_best - REFINE_MARGIN {
                continue;
            }
            let (tau, value) = golden_max(|t| self.normalised_at(power, t), tau - step, tau + step);
            let s = score(tau, value);
            if best.is_none_or(|(b, _, _)| s > b) {
                best = Some((s, tau, value));
            }
        }

        match best {
            Some((_, tau, value)) => {
                let strength = value.clamp(0.0, 1.0);
                if value >= VOICING_THRESHOLD {
                    (Some((sr / tau).clamp(floor_hz, ceiling_hz)), strength)
                } else {
                    (None, strength)
                }
            }
            None => (None, 0.0),
        }
    }
}

fn power_sum(p: &[f64]) -> f64 {
    let last = p.len() - 1;
    p[0] + 2.0 * p[1..last].iter().sum::<f64>() + p[last]
}

/// Maximum of a unimodal `f` on `[lo, hi]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_895;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-4 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos())
        .collect()
}
