//! Gender-rebalancing speech augmentation and fairness evaluation.
//!
//! The crate is organised around the stages of an ASR training and evaluation
//! loop:
//!
//! * [`dsp`]: pitch tracking, pitch marks, TD-PSOLA resynthesis, f0 and formant
//!   shifting, band-limited resampling and the VTLP warp used as a baseline.
//! * [`policy`]: the *Opposite* and *Random* augmentation policies, target-median
//!   sampling and gender inference.
//! * [`pipeline`]: TSV manifests, WAV ingestion and deterministic per-epoch
//!   augmentation streams.
//! * [`features`]: log-mel filterbanks and SpecAugment masking.
//! * [`eval`]: WER alignment, WERR, paired bootstrap and f0-binned reports.
//!
//! All signal operations are pure functions over [`AudioBuffer`] values and
//! every random decision is driven by an explicitly seeded stream.

pub mod audio;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod policy;
pub mod synth;

pub use audio::AudioBuffer;
pub use error::{Error, Result};
pub use policy::GenderLabel;
