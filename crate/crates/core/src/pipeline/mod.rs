//! Dataset ingestion and on-the-fly epoch augmentation.
//!
//! Augmented audio lives only in memory: streams read through an
//! [`AudioSource`] and never write files.

pub mod manifest;
pub mod seed;
pub mod stream;
pub mod wav;

pub use manifest::{load_manifest, ManifestEntry};
pub use seed::mix_seed;
pub use stream::{
    augment_entry, augment_epoch_parallel, augment_epoch_stream, plan_decision, resolve_genders,
    AudioSource, AugmentedSample, EpochParams, EpochStats, EpochStream, SampleError, WavSource,
};
pub use wav::{load_audio, read_wav, read_wav_slice, write_wav};
