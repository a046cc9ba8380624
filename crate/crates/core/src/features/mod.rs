//! Log-mel front-end and SpecAugment masking.

mod mel;
mod specaug;

pub use mel::{log_mel_spectrogram, log_mel_spectrogram_warped, MelConfig, LOG_FLOOR};
pub use specaug::{spec_augment, spec_augment_with_masks, Mask, SpecAugmentConfig};

use std::io::{self, Write};

use crate::error::{Error, Result};

/// Row-major `frames × channels` matrix of log-power mel energies.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    frames: usize,
    channels: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(frames: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != frames * channels {
            return Err(Error::InvalidArgument(format!(
                "{} values do not fill {frames} x {channels}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self {
            frames,
            channels,
            values,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, frame: usize, channel: usize) -> f64 {
        self.values[frame * self.channels + channel]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.channels..(frame + 1) * self.channels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.channels.max(1))
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// One frame per line, channels tab-separated. Values use the shortest
    /// representation that round-trips.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for row in self.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    out.write_all(b"\t")?;
                }
                write!(out, "{v}")?;
                first = false;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}
