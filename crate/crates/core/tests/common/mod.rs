//! Measurement oracles shared by the integration suites. Apart from
//! `median_f0`, which reads the library's own tracker, none of these reuse the
//! library's analysis code.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use voxbalance::AudioBuffer;

/// Spectral-envelope peaks (Hz, ascending, below 4 kHz) of an all-pole fit
/// of the given order, via autocorrelation LPC and Levinson recursion.
pub fn lpc_formants(audio: &AudioBuffer, order: usize) -> Vec<f64> {
    let x: Vec<f64> = audio.samples().iter().map(|&s| s as f64).collect();
    let n = x.len();
    let w: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, s)| s * (0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()))
        .collect();
    let r: Vec<f64> = (0..=order)
        .map(|k| (k..n).map(|i| w[i] * w[i - k]).sum())
        .collect();
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for i in 1..=order {
        let acc: f64 = r[i] + (1..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
    }
    let sr = audio.sample_rate() as f64;
    let envelope: Vec<f64> = (0..4000)
        .map(|f| {
            let wv = 2.0 * PI * f as f64 / sr;
            let (re, im) = a.iter().enumerate().fold((0.0, 0.0), |(re, im), (j, c)| {
                (re + c * (wv * j as f64).cos(), im - c * (wv * j as f64).sin())
            });
            -(re * re + im * im).ln()
        })
        .collect();
    (1..envelope.len() - 1)
        .filter(|&i| envelope[i] > envelope[i - 1] && envelope[i] >= envelope[i + 1])
        .map(|i| i as f64)
        .collect()
}

/// Frequency (Hz) of the largest DFT magnitude bin of `x` at `rate`.
pub fn dominant_frequency(x: &[f32], rate: u32) -> (f64, f64) {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .enumerate()
        .map(|(i, &s)| Complex::new(s as f64 * (0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let k = (1..n / 2)
        .max_by(|&i, &j| buf[i].norm().total_cmp(&buf[j].norm()))
        .unwrap();
    let bin = rate as f64 / n as f64;
    (k as f64 * bin, bin)
}

/// Pitch from the whole-signal spectrum, independent of the crate's tracker.
/// Scores each candidate by the summed magnitude on its harmonic comb minus
/// the sum on the half-way points, so octave errors in both directions lose.
pub fn harmonic_f0(audio: &AudioBuffer, lo: f64, hi: f64) -> f64 {
    const HARMONICS: usize = 8;
    let x = audio.samples();
    let n = (x.len() * 4).next_power_of_two();
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (i, &s) in x.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / x.len() as f64).cos();
        buf[i] = Complex::new(s as f64 * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm()).collect();
    let bin = audio.sample_rate() as f64 / n as f64;
    let at = |f: f64| {
        let pos = f / bin;
        let i = pos.floor() as usize;
        let t = pos - i as f64;
        mag[i] * (1.0 - t) + mag[i + 1] * t
    };
    let score = |f: f64| {
        (1..=HARMONICS)
            .map(|k| at(k as f64 * f) - at((k as f64 - 0.5) * f))
            .sum::<f64>()
    };
    let steps = ((hi - lo) / 0.02) as usize;
    (0..=steps)
        .map(|i| lo + i as f64 * 0.02)
        .max_by(|a, b| score(*a).total_cmp(&score(*b)))
        .unwrap()
}

/// Seeded white noise with every component at or above `cutoff_hz` removed.
pub fn band_limited_noise(seed: u64, len: usize, rate: u32, cutoff_hz: f64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex<f64>> = (0..len)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let bin = rate as f64 / len as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(len - k) as f64 * bin;
        if f >= cutoff_hz {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let mut y: Vec<f64> = buf.iter().map(|c| c.re / len as f64).collect();
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    y.iter_mut().for_each(|v| *v *= 0.5 / peak);
    AudioBuffer::from_f64(&y, rate).unwrap()
}

/// `10·log10(Σ ref² / Σ (ref − test)²)` over the given index range.
pub fn snr_db(reference: &[f32], test: &[f32], range: std::ops::Range<usize>) -> f64 {
    let (mut sig, mut noise) = (0.0, 0.0);
    for i in range {
        let r = reference[i] as f64;
        let e = r - test[i] as f64;
        sig += r * r;
        noise += e * e;
    }
    10.0 * (sig / noise).log10()
}

/// All strings over `0..alphabet` with length at most `max_len`, shortest
/// first.
pub fn all_strings(alphabet: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|s: &Vec<u8>| {
                (0..alphabet).map(move |c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Unit-cost edit distances from `source` to every string of length at most
/// `max_len`, by breadth-first search over single insert, delete and
/// substitute moves. Indexed like [`all_strings`].
pub struct EditGraph {
    alphabet: u8,
    max_len: usize,
    offsets: Vec<usize>,
}

impl EditGraph {
    pub fn new(alphabet: u8, max_len: usize) -> Self {
        let mut offsets = vec![0];
        let mut count = 1usize;
        for _ in 0..=max_len {
            offsets.push(offsets.last().unwrap() + count);
            count *= alphabet as usize;
        }
        Self {
            alphabet,
            max_len,
            offsets,
        }
    }

    pub fn size(&self) -> usize {
        self.offsets[self.max_len + 1]
    }

    pub fn index(&self, s: &[u8]) -> usize {
        self.offsets[s.len()]
            + s.iter().fold(0usize, |acc, &c| acc * self.alphabet as usize + c as usize)
    }

    fn neighbours(&self, s: &[u8], mut visit: impl FnMut(&[u8])) {
        let mut t = Vec::with_capacity(s.len() + 1);
        for i in 0..s.len() {
            t.clear();
            t.extend_from_slice(&s[..i]);
            t.extend_from_slice(&s[i + 1..]);
            visit(&t);
            for c in 0..self.alphabet {
                if c != s[i] {
                    t.clear();
                    t.extend_from_slice(s);
                    t[i] = c;
                    visit(&t);
                }
            }
        }
        if s.len() < self.max_len {
            for i in 0..=s.len() {
                for c in 0..self.alphabet {
                    t.clear();
                    t.extend_from_slice(&s[..i]);
                    t.push(c);
                    t.extend_from_slice(&s[i..]);
                    visit(&t);
                }
            }
        }
    }

    /// Distances from `source`; `strings` must be `all_strings(alphabet, max_len)`.
    pub fn distances(&self, source: &[u8], strings: &[Vec<u8>]) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.size()];
        let start = self.index(source);
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u];
            self.neighbours(&strings[u], |t| {
                let v = self.index(t);
                if dist[v] == u32::MAX {
                    dist[v] = d + 1;
                    queue.push_back(v);
                }
            });
        }
        dist
    }
}

/// Median of the tracked f0 contour, panicking on unvoiced input.
pub fn median_f0(audio: &AudioBuffer) -> f64 {
    voxbalance::dsp::estimate_default(audio)
        .and_then(|c| c.median_f0())
        .expect("voiced")
}

pub fn binomial_ok(hits: usize, n: usize, p: f64) -> bool {
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    (hits as f64 - n as f64 * p).abs() <= 3.0 * sigma.max(1e-9)
}
