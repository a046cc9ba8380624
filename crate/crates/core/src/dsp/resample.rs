//! Kaiser-windowed sinc resampling.
//!
//! Integer rate pairs use an exact polyphase table with one row per output
//! phase (`target / gcd` rows). Other ratios, including the fractional rates
//! produced by formant relabelling, fall back to a 1024-row table with linear
//! interpolation between adjacent phases.

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Zero crossings of the sinc kept on each side at the pass-band rate.
const HALF_ZERO_CROSSINGS: usize = 32;
const KAISER_BETA: f64 = 9.0;
/// Cutoff as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.94;
const MAX_EXACT_PHASES: u64 = 4096;
const INTERPOLATED_PHASES: usize = 1024;

/// Resamples `audio` to `target_rate`.
///
/// The output holds `round(len * target / source)` samples. Equal rates return
/// an exact copy.
pub fn sinc_resample(audio: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::InvalidArgument("target rate must be positive".into()));
    }
    if target_rate == audio.sample_rate() {
        return Ok(audio.clone());
    }
    let out = resample_by_rates(audio.samples(), audio.sample_rate() as f64, target_rate as f64);
    AudioBuffer::new(out, target_rate)
}

/// Resamples raw samples between arbitrary positive rates.
pub(crate) fn resample_by_rates(x: &[f32], from: f64, to: f64) -> Vec<f32> {
    let out_len = (x.len() as f64 * to / from).round() as usize;
    if (from - to).abs() < 1e-9 {
        let mut y = x.to_vec();
        y.resize(out_len, 0.0);
        return y;
    }
    let cutoff = ROLLOFF * (to / from).min(1.0);
    let half_width = (HALF_ZERO_CROSSINGS as f64 / cutoff.min(1.0)).ceil() as usize;
    let kernel = Kernel {
        cutoff,
        half_width,
        beta: KAISER_BETA,
    };

    match integer_ratio(from, to) {
        Some((up, down)) if up <= MAX_EXACT_PHASES => {
            let table = PhaseTable::build(&kernel, up as usize);
            (0..out_len)
                .map(|n| {
                    let pos = n as u64 * down;
                    let base = (pos / up) as isize;
                    let phase = (pos % up) as usize;
                    convolve(x, base, table.row(phase)) as f32
                })
                .collect()
        }
        _ => {
            let table = PhaseTable::build(&kernel, INTERPOLATED_PHASES);
            let step = from / to;
            let mut row = vec![0.0; table.taps];
            (0..out_len)
                .map(|n| {
                    let t = n as f64 * step;
                    let base = t.floor();
                    let p = (t - base) * INTERPOLATED_PHASES as f64;
                    let p0 = p.floor() as usize;
                    let w = p - p0 as f64;
                    let (r0, r1) = (table.row(p0), table.row(p0 + 1));
                    for ((r, a), b) in row.iter_mut().zip(r0).zip(r1) {
                        *r = a + w * (b - a);
                    }
                    convolve(x, base as isize, &row) as f32
                })
                .collect()
        }
    }
}

fn integer_ratio(from: f64, to: f64) -> Option<(u64, u64)> {
    let is_int = |v: f64| (v - v.round()).abs() < 1e-6 && v >= 1.0;
    if !(is_int(from) && is_int(to)) {
        return None;
    }
    let (f, t) = (from.round() as u64, to.round() as u64);
    let g = gcd(f, t);
    Some((t / g, f / g))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `y = sum_k x[base + k] * row[k + half_width - 1]` for `k` in
/// `(-half_width, half_width]`, treating out-of-range input as zero.
fn convolve(x: &[f32], base: isize, row: &[f64]) -> f64 {
    let half = (row.len() / 2) as isize;
    let start = base - half + 1;
    let lo = (-start).max(0) as usize;
    let hi = ((x.len() as isize - start).max(0) as usize).min(row.len());
    let mut acc = 0.0;
    for j in lo..hi {
        acc += row[j] * x[(start + j as isize) as usize] as f64;
    }
    acc
}

struct Kernel {
    cutoff: f64,
    half_width: usize,
    beta: f64,
}

impl Kernel {
    /// Response at distance `d` input samples from the output position.
    fn eval(&self, d: f64) -> f64 {
        let w = self.half_width as f64;
        if d.abs() >= w {
            return 0.0;
        }
        let r = d / w;
        let window = bessel_i0(self.beta * (1.0 - r * r).sqrt()) / bessel_i0(self.beta);
        self.cutoff * sinc(self.cutoff * d) * window
    }
}

struct PhaseTable {
    taps: usize,
    rows: Vec<f64>,
}

impl PhaseTable {
    /// Rows for fractional offsets `p / phases`, `p` in `0..=phases`, each
    /// normalised to unit DC gain.
    fn build(kernel: &Kernel, phases: usize) -> Self {
        let taps = 2 * kernel.half_width;
        let half = kernel.half_width as isize;
        let mut rows = Vec::with_capacity((phases + 1) * taps);
        for p in 0..=phases {
            let frac = p as f64 / phases as f64;
            let start = rows.len();
            for k in (-half + 1)..=half {
                rows.push(kernel.eval(k as f64 - frac));
            }
            let sum: f64 = rows[start..].iter().sum();
            if sum.abs() > 1e-12 {
                rows[start..].iter_mut().for_each(|c| *c /= sum);
            }
        }
        Self { taps, rows }
    }

    fn row(&self, phase: usize) -> &[f64] {
        &self.rows[phase * self.taps..(phase + 1) * self.taps]
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn same_rate_is_identity() {
        let a = AudioBuffer::from_f64(&synth::sine(300.0, 0.5, 0.1, 16_000), 16_000).unwrap();
        assert_eq!(sinc_resample(&a, 16_000).unwrap(), a);
    }

    #[test]
    fn output_length() {
        let a = AudioBuffer::silence(16_001, 16_000);
        assert_eq!(sinc_resample(&a, 48_000).unwrap().len(), 48_003);
        assert_eq!(sinc_resample(&a, 22_050).unwrap().len(), 22_051);
        assert_eq!(resample_by_rates(&[0.0; 1000], 19_200.5, 16_000.0).len(), 833);
    }

    #[test]
    fn zero_rate_rejected() {
        assert!(sinc_resample(&AudioBuffer::silence(10, 16_000), 0).is_err());
    }

    #[test]
    fn dc_preserved() {
        let x = vec![0.5f32; 4000];
        for (from, to) in [(16_000.0, 48_000.0), (48_000.0, 16_000.0), (19_200.3, 16_000.0)] {
            let y = resample_by_rates(&x, from, to);
            let mid = y.len() / 2;
            assert!((y[mid] - 0.5).abs() < 1e-4, "{from}->{to}: {}", y[mid]);
        }
    }

    #[test]
    fn bessel_reference_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-12);
        assert!((bessel_i0(9.0) - 1_093.588_354_511_374_5).abs() < 1e-8);
    }

    #[test]
    fn interpolated_path_tracks_exact_path() {
        let x: Vec<f32> = synth::sine(440.0, 0.5, 0.2, 16_000)
            .into_iter()
            .map(|v| v as f32)
            .collect();
        let exact = resample_by_rates(&x, 16_000.0, 12_000.0);
        let approx = resample_by_rates(&x, 16_000.000_5, 12_000.0);
        let err = exact[200..2000]
            .iter()
            .zip(&approx[200..2000])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(err < 1e-3, "{err}");
    }
}
