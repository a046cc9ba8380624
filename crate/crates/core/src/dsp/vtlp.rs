//! Vocal tract length perturbation on linear-frequency magnitude spectra.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub const MIN_WARP: f64 = 0.9;
pub const MAX_WARP: f64 = 1.1;
pub const DEFAULT_BOUNDARY_HZ: f64 = 4800.0;
const WARP_STD_DEV: f64 = 0.1;

pub fn clamp_warp_factor(factor: f64) -> f64 {
    factor.clamp(MIN_WARP, MAX_WARP)
}

/// Draws a per-utterance warp factor from N(1, 0.1) clamped to [0.9, 1.1].
pub fn sample_warp_factor<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let normal = Normal::new(1.0, WARP_STD_DEV).expect("valid normal");
    clamp_warp_factor(normal.sample(rng))
}

/// Piecewise-linear frequency map: `f -> factor * f` up to `boundary_hz`, then
/// a straight line to `(nyquist, nyquist)`.
pub fn warp_frequency(f: f64, factor: f64, boundary_hz: f64, nyquist: f64) -> f64 {
    if f <= boundary_hz {
        factor * f
    } else {
        let b = factor * boundary_hz;
        b + (nyquist - b) * (f - boundary_hz) / (nyquist - boundary_hz)
    }
}

fn unwarp_frequency(g: f64, factor: f64, boundary_hz: f64, nyquist: f64) -> f64 {
    let b = factor * boundary_hz;
    if g <= b {
        g / factor
    } else {
        boundary_hz + (g - b) * (nyquist - boundary_hz) / (nyquist - b)
    }
}

/// Warps one magnitude frame whose bins are spaced linearly from 0 Hz to
/// Nyquist inclusive.
///
/// Energy at source frequency `f` moves to `warp_frequency(f)`; output bins are
/// linearly interpolated from the source frame at the inverse-mapped
/// frequency.
pub fn vtlp_warp(
    frame: &[f64],
    warp_factor: f64,
    boundary_hz: f64,
    sample_rate: f64,
) -> Result<Vec<f64>> {
    let nyquist = sample_rate / 2.0;
    if !(MIN_WARP..=MAX_WARP).contains(&warp_factor) {
        return Err(Error::InvalidArgument(format!(
            "warp factor {warp_factor} outside [{MIN_WARP}, {MAX_WARP}]"
        )));
    }
    if !(boundary_hz > 0.0 && boundary_hz < nyquist && warp_factor * boundary_hz < nyquist) {
        return Err(Error::InvalidArgument(format!(
            "boundary {boundary_hz} Hz must lie below Nyquist {nyquist} Hz after warping"
        )));
    }
    let n = frame.len();
    if n < 2 {
        return Ok(frame.to_vec());
    }
    let bin_hz = nyquist / (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            let src = unwarp_frequency(k as f64 * bin_hz, warp_factor, boundary_hz, nyquist) / bin_hz;
            let src = src.clamp(0.0, (n - 1) as f64);
            let i = src.floor() as usize;
            if i >= n - 1 {
                frame[n - 1]
            } else {
                let w = src - i as f64;
                frame[i] * (1.0 - w) + frame[i + 1] * w
            }
        })
        .collect())
}
