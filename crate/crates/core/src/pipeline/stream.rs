//! Deterministic on-the-fly epoch streams.

use std::fmt;
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::pipeline::manifest::ManifestEntry;
use crate::pipeline::seed::mix_seed;
use crate::pipeline::wav::load_audio;
use crate::policy::{self, AugmentationDecision, GenderLabel, PolicyConfig, SkipReason};

pub const DEFAULT_WORKING_RATE: u32 = 16_000;

/// Read-only access to segment audio. The stream never writes.
pub trait AudioSource: Sync {
    fn load(&self, entry: &ManifestEntry) -> Result<AudioBuffer>;
}

/// Loads slices from WAV files and resamples them to a working rate.
#[derive(Debug, Clone, Copy)]
pub struct WavSource {
    pub working_rate: u32,
}

impl Default for WavSource {
    fn default() -> Self {
        Self {
            working_rate: DEFAULT_WORKING_RATE,
        }
    }
}

impl AudioSource for WavSource {
    fn load(&self, entry: &ManifestEntry) -> Result<AudioBuffer> {
        load_audio(entry, self.working_rate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample {
    pub entry: ManifestEntry,
    pub audio: AudioBuffer,
    /// The decision drawn for this sample. When `skipped` is set the audio is
    /// the unmodified input and `effective_gender` is the source gender.
    pub decision: AugmentationDecision,
    pub skipped: Option<SkipReason>,
    pub effective_gender: GenderLabel,
    pub epoch: u64,
    pub seed_used: u64,
}

#[derive(Debug)]
pub struct SampleError {
    pub id: String,
    pub error: Error,
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.error)
    }
}

impl std::error::Error for SampleError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochParams {
    pub epoch: u64,
    pub base_seed: u64,
}

/// Resolves `Unknown` genders by f0 inference. Entries whose audio cannot be
/// loaded or has no voiced frames stay `Unknown`.
pub fn resolve_genders<S: AudioSource + ?Sized>(
    entries: Vec<ManifestEntry>,
    source: &S,
) -> Vec<ManifestEntry> {
    entries
        .into_iter()
        .map(|mut e| {
            if e.needs_inference() {
                if let Ok(audio) = source.load(&e) {
                    let g = policy::infer_gender(&audio);
                    if g != GenderLabel::Unknown {
                        e.gender = g;
                        e.gender_inferred = true;
                    }
                }
            }
            e
        })
        .collect()
}

/// The decision an entry receives in a given epoch, without touching audio.
pub fn plan_decision(
    entry: &ManifestEntry,
    config: &PolicyConfig,
    params: EpochParams,
) -> Result<(AugmentationDecision, u64)> {
    let seed = mix_seed(params.base_seed, params.epoch, &entry.id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decision = policy::decide(entry.gender, config, &mut rng)?;
    Ok((decision, seed))
}

/// Produces one augmented sample. Pure in `(entry, config, params)` and the
/// audio returned by `source`.
pub fn augment_entry<S: AudioSource + ?Sized>(
    entry: &ManifestEntry,
    config: &PolicyConfig,
    params: EpochParams,
    source: &S,
) -> std::result::Result<AugmentedSample, SampleError> {
    let fail = |error| SampleError {
        id: entry.id.clone(),
        error,
    };
    let audio = source.load(entry).map_err(fail)?;
    let seed = mix_seed(params.base_seed, params.epoch, &entry.id);

    if entry.gender == GenderLabel::Unknown {
        // Inference found nothing voiced; there is nothing to shift.
        return Ok(AugmentedSample {
            entry: entry.clone(),
            audio,
            decision: AugmentationDecision::None,
            skipped: Some(SkipReason::Unvoiced),
            effective_gender: GenderLabel::Unknown,
            epoch: params.epoch,
            seed_used: seed,
        });
    }

    let (decision, seed) = plan_decision(entry, config, params).map_err(fail)?;
    let applied = policy::apply_decision(&audio, &decision, config).map_err(fail)?;
    let effective_gender = if applied.skipped.is_some() {
        entry.gender
    } else {
        decision.effective_gender(entry.gender)
    };
    Ok(AugmentedSample {
        entry: entry.clone(),
        audio: applied.audio,
        decision,
        skipped: applied.skipped,
        effective_gender,
        epoch: params.epoch,
        seed_used: seed,
    })
}

/// Lazily augments `entries` in manifest order.
///
/// Errors are yielded per sample and the stream carries on, unless
/// `fail_fast` is set, in which case it ends after the first error.
pub struct EpochStream<'a, S: AudioSource + ?Sized> {
    entries: std::slice::Iter<'a, ManifestEntry>,
    config: &'a PolicyConfig,
    params: EpochParams,
    source: &'a S,
    fail_fast: bool,
    failed: bool,
}

impl<'a, S: AudioSource + ?Sized> EpochStream<'a, S> {
    pub fn fail_fast(mut self, yes: bool) -> Self {
        self.fail_fast = yes;
        self
    }
}

impl<S: AudioSource + ?Sized> Iterator for EpochStream<'_, S> {
    type Item = std::result::Result<AugmentedSample, SampleError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed && self.fail_fast {
            return None;
        }
        let entry = self.entries.next()?;
        let item = augment_entry(entry, self.config, self.params, self.source);
        self.failed |= item.is_err();
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (0, Some(self.entries.len()))
    }
}

pub fn augment_epoch_stream<'a, S: AudioSource + ?Sized>(
    entries: &'a [ManifestEntry],
    config: &'a PolicyConfig,
    params: EpochParams,
    source: &'a S,
) -> EpochStream<'a, S> {
    EpochStream {
        entries: entries.iter(),
        config,
        params,
        source,
        fail_fast: false,
        failed: false,
    }
}

/// Augments an epoch on `jobs` threads, each owning a strided shard of the
/// entries. Results come back in manifest order and are identical to the
/// serial stream for any `jobs`.
pub fn augment_epoch_parallel<S: AudioSource + ?Sized>(
    entries: &[ManifestEntry],
    config: &PolicyConfig,
    params: EpochParams,
    source: &S,
    jobs: usize,
) -> Vec<std::result::Result<AugmentedSample, SampleError>> {
    let jobs = jobs.clamp(1, entries.len().max(1));
    if jobs == 1 {
        return augment_epoch_stream(entries, config, params, source).collect();
    }
    let shards: Vec<Vec<_>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|shard| {
                scope.spawn(move || {
                    entries
                        .iter()
                        .skip(shard)
                        .step_by(jobs)
                        .map(|e| augment_entry(e, config, params, source))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut iters: Vec<_> = shards.into_iter().map(Vec::into_iter).collect();
    (0..entries.len())
        .map(|i| iters[i % jobs].next().expect("shard length"))
        .collect()
}

/// Per-epoch decision counts.
///
/// `none + cross + within + skipped` equals the number of successfully loaded
/// samples; `errors` counts the rest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EpochStats {
    pub none: usize,
    pub cross: usize,
    pub within: usize,
    pub skipped: usize,
    pub errors: usize,
    pub effective_female: usize,
    pub effective_male: usize,
    pub effective_unknown: usize,
}

impl EpochStats {
    pub fn record(&mut self, item: &std::result::Result<AugmentedSample, SampleError>) {
        let Ok(sample) = item else {
            self.errors += 1;
            return;
        };
        if sample.skipped.is_some() {
            self.skipped += 1;
        } else {
            match sample.decision {
                AugmentationDecision::None => self.none += 1,
                AugmentationDecision::CrossGender { .. } => self.cross += 1,
                AugmentationDecision::WithinGender { .. } => self.within += 1,
            }
        }
        match sample.effective_gender {
            GenderLabel::Female => self.effective_female += 1,
            GenderLabel::Male => self.effective_male += 1,
            GenderLabel::Unknown => self.effective_unknown += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.none + self.cross + self.within + self.skipped + self.errors
    }

    /// Effective `(female, male)` fractions over samples with a known gender.
    pub fn effective_fractions(&self) -> (f64, f64) {
        let n = (self.effective_female + self.effective_male) as f64;
        if n == 0.0 {
            return (0.0, 0.0);
        }
        (
            self.effective_female as f64 / n,
            self.effective_male as f64 / n,
        )
    }
}

impl<'a> FromIterator<&'a std::result::Result<AugmentedSample, SampleError>> for EpochStats {
    fn from_iter<I: IntoIterator<Item = &'a std::result::Result<AugmentedSample, SampleError>>>(
        iter: I,
    ) -> Self {
        let mut stats = EpochStats::default();
        iter.into_iter().for_each(|i| stats.record(i));
        stats
    }
}

impl fmt::Display for EpochStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (ef, em) = self.effective_fractions();
        writeln!(f, "samples\t{}", self.total())?;
        writeln!(f, "none\t{}", self.none)?;
        writeln!(f, "cross_gender\t{}", self.cross)?;
        writeln!(f, "within_gender\t{}", self.within)?;
        writeln!(f, "skipped_unvoiced\t{}", self.skipped)?;
        writeln!(f, "errors\t{}", self.errors)?;
        writeln!(f, "effective_female\t{}\t{ef:.4}", self.effective_female)?;
        writeln!(f, "effective_male\t{}\t{em:.4}", self.effective_male)?;
        write!(f, "effective_unknown\t{}", self.effective_unknown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use std::path::PathBuf;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Synthetic in-memory source: the id prefix selects the voice.
    struct Synthetic {
        loads: AtomicUsize,
    }

    impl AudioSource for Synthetic {
        fn load(&self, entry: &ManifestEntry) -> Result<AudioBuffer> {
            self.loads.fetch_add(1, Ordering::Relaxed);
            match entry.id.split('-').next() {
                Some("f") => Ok(synth::test_vowel(230.0, 0.12, 16_000)),
                Some("m") => Ok(synth::test_vowel(120.0, 0.12, 16_000)),
                Some("s") => Ok(AudioBuffer::silence(2000, 16_000)),
                _ => Err(Error::InvalidArgument(format!("no audio for {}", entry.id))),
            }
        }
    }

    fn source() -> Synthetic {
        Synthetic {
            loads: AtomicUsize::new(0),
        }
    }

    fn entry(id: &str, gender: GenderLabel) -> ManifestEntry {
        ManifestEntry {
            id: id.into(),
            audio_path: PathBuf::from("unused.wav"),
            offset: 0.0,
            duration: 0.12,
            speaker_id: "spk".into(),
            gender,
            transcript: "x".into(),
            gender_inferred: false,
        }
    }

    fn manifest(n: usize) -> Vec<ManifestEntry> {
        (0..n)
            .map(|i| {
                if i % 10 < 3 {
                    entry(&format!("f-{i}"), GenderLabel::Female)
                } else {
                    entry(&format!("m-{i}"), GenderLabel::Male)
                }
            })
            .collect()
    }

    const P: EpochParams = EpochParams {
        epoch: 1,
        base_seed: 42,
    };

    #[test]
    fn deterministic() {
        let m = manifest(40);
        let cfg = PolicyConfig::default();
        let src = source();
        let a: Vec<_> = augment_epoch_stream(&m, &cfg, P, &src).map(Result::unwrap).collect();
        let b: Vec<_> = augment_epoch_stream(&m, &cfg, P, &src).map(Result::unwrap).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn epochs_differ() {
        let m = manifest(100);
        let cfg = PolicyConfig::default();
        let d = |epoch| -> Vec<_> {
            m.iter()
                .map(|e| plan_decision(e, &cfg, EpochParams { epoch, base_seed: 9 }).unwrap().0)
                .collect()
        };
        assert_ne!(d(1), d(2));
    }

    #[test]
    fn permutation_keeps_per_sample_decisions() {
        let m = manifest(50);
        let mut rev = m.clone();
        rev.reverse();
        let cfg = PolicyConfig::opposite(0.3, 0.7).unwrap();
        for e in &m {
            let idx = rev.iter().position(|r| r.id == e.id).unwrap();
            assert_eq!(plan_decision(e, &cfg, P).unwrap(), plan_decision(&rev[idx], &cfg, P).unwrap());
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let m = manifest(23);
        let cfg = PolicyConfig::random(0.8).unwrap();
        let src = source();
        let serial: Vec<_> = augment_epoch_stream(&m, &cfg, P, &src).map(Result::unwrap).collect();
        for jobs in [2, 3, 8] {
            let par: Vec<_> = augment_epoch_parallel(&m, &cfg, P, &src, jobs)
                .into_iter()
                .map(Result::unwrap)
                .collect();
            assert_eq!(serial, par, "jobs = {jobs}");
        }
    }

    #[test]
    fn accounting_with_skips_and_errors() {
        let mut m = manifest(20);
        m.push(entry("s-silent", GenderLabel::Male));
        m.push(entry("x-missing", GenderLabel::Female));
        let cfg = PolicyConfig::random(1.0).unwrap();
        let src = source();
        let items: Vec<_> = augment_epoch_stream(&m, &cfg, P, &src).collect();
        let stats: EpochStats = items.iter().collect();
        assert_eq!(stats.total(), m.len());
        assert_eq!(stats.none + stats.cross + stats.within + stats.skipped, m.len() - 1);
        assert_eq!(stats.skipped, 1);
        assert_eq!(stats.errors, 1);
        let err = items.iter().find_map(|i| i.as_ref().err()).unwrap();
        assert_eq!(err.id, "x-missing");
    }

    #[test]
    fn fail_fast_stops() {
        let mut m = vec![entry("x-bad", GenderLabel::Male)];
        m.extend(manifest(5));
        let cfg = PolicyConfig::default();
        let src = source();
        assert_eq!(augment_epoch_stream(&m, &cfg, P, &src).count(), 6);
        assert_eq!(augment_epoch_stream(&m, &cfg, P, &src).fail_fast(true).count(), 1);
    }

    #[test]
    fn effective_gender_follows_cross_decisions() {
        let m = manifest(30);
        let cfg = PolicyConfig::opposite(1.0, 1.0).unwrap();
        let src = source();
        for s in augment_epoch_stream(&m, &cfg, P, &src).map(Result::unwrap) {
            assert_eq!(s.effective_gender, s.entry.gender.opposite().unwrap());
            assert_eq!(s.audio.len(), 1920);
        }
    }

    #[test]
    fn unknown_genders_resolved_once() {
        let m = vec![
            entry("f-a", GenderLabel::Unknown),
            entry("m-b", GenderLabel::Unknown),
            entry("s-c", GenderLabel::Unknown),
            entry("m-d", GenderLabel::Female),
        ];
        let src = source();
        let r = resolve_genders(m, &src);
        assert_eq!(src.loads.load(Ordering::Relaxed), 3);
        assert_eq!(r[0].gender, GenderLabel::Female);
        assert!(r[0].gender_inferred);
        assert_eq!(r[1].gender, GenderLabel::Male);
        assert_eq!(r[2].gender, GenderLabel::Unknown);
        assert_eq!(r[3].gender, GenderLabel::Female);
        assert!(!r[3].gender_inferred);

        let cfg = PolicyConfig::default();
        let s = augment_entry(&r[2], &cfg, P, &src).unwrap();
        assert_eq!(s.skipped, Some(SkipReason::Unvoiced));
    }
}
