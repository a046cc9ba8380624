//! RIFF/WAV ingestion (PCM-16 and float-32) and float-32 output.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::audio::AudioBuffer;
use crate::dsp::sinc_resample;
use crate::error::{Error, Result};
use crate::pipeline::manifest::ManifestEntry;

/// Reads a whole file, averaging channels to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    read_wav_slice(path, 0.0, None)
}

/// Reads `[offset, offset + duration)` seconds of a file, averaging channels
/// to mono. `None` reads to the end.
pub fn read_wav_slice(
    path: impl AsRef<Path>,
    offset: f64,
    duration: Option<f64>,
) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let mut reader = WavReader::open(path).map_err(|e| Error::wav(path, e))?;
    let spec = reader.spec();
    check_format(path, spec)?;

    let sr = spec.sample_rate as f64;
    let frames = reader.duration() as usize;
    let start = (offset * sr).round() as usize;
    let count = match duration {
        Some(d) => (d * sr).round() as usize,
        None => frames.saturating_sub(start),
    };
    if start + count > frames || offset < 0.0 {
        return Err(Error::SliceOutOfRange {
            path: path.to_path_buf(),
            offset,
            end: offset + duration.unwrap_or(0.0),
            extent: frames as f64 / sr,
        });
    }
    reader
        .seek(start as u32)
        .map_err(|e| Error::io(path, e))?;

    let channels = spec.channels as usize;
    let total = count * channels;
    let interleaved: Vec<f32> = match spec.sample_format {
        SampleFormat::Int => reader
            .samples::<i16>()
            .take(total)
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<std::result::Result<_, _>>(),
        SampleFormat::Float => reader
            .samples::<f32>()
            .take(total)
            .collect::<std::result::Result<_, _>>(),
    }
    .map_err(|e| Error::wav(path, e))?;

    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f32>() / channels as f32)
            .collect()
    };
    AudioBuffer::new(mono, spec.sample_rate)
}

fn check_format(path: &Path, spec: WavSpec) -> Result<()> {
    let supported = matches!(
        (spec.sample_format, spec.bits_per_sample),
        (SampleFormat::Int, 16) | (SampleFormat::Float, 32)
    );
    if !supported || spec.channels == 0 {
        return Err(Error::UnsupportedAudio {
            path: path.to_path_buf(),
            message: format!(
                "{:?} {}-bit with {} channel(s); expected PCM-16 or float-32",
                spec.sample_format, spec.bits_per_sample, spec.channels
            ),
        });
    }
    Ok(())
}

/// Writes a mono float-32 WAV.
pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| Error::wav(path, e))?;
    for &s in audio.samples() {
        writer.write_sample(s).map_err(|e| Error::wav(path, e))?;
    }
    writer.finalize().map_err(|e| Error::wav(path, e))
}

/// Writes a mono PCM-16 WAV, clamping to the representable range.
pub fn write_wav_pcm16(path: impl AsRef<Path>, audio: &AudioBuffer) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| Error::wav(path, e))?;
    for &s in audio.samples() {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|e| Error::wav(path, e))?;
    }
    writer.finalize().map_err(|e| Error::wav(path, e))
}

/// Loads the slice referenced by `entry` at `working_rate`.
pub fn load_audio(entry: &ManifestEntry, working_rate: u32) -> Result<AudioBuffer> {
    let audio = read_wav_slice(&entry.audio_path, entry.offset, Some(entry.duration))?;
    sinc_resample(&audio, working_rate)
}
