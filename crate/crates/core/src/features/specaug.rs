use std::ops::Range;

use rand::Rng;

use super::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecAugmentConfig {
    pub max_freq_mask: usize,
    pub max_time_mask: usize,
    pub n_freq_masks: usize,
    pub n_time_masks: usize,
}

impl Default for SpecAugmentConfig {
    fn default() -> Self {
        Self {
            max_freq_mask: 27,
            max_time_mask: 100,
            n_freq_masks: 1,
            n_time_masks: 1,
        }
    }
}

/// A masked interval: channels for `Frequency`, frames for `Time`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mask {
    Frequency(Range<usize>),
    Time(Range<usize>),
}

pub fn spec_augment<R: Rng + ?Sized>(
    features: &FeatureMatrix,
    rng: &mut R,
    config: &SpecAugmentConfig,
) -> FeatureMatrix {
    spec_augment_with_masks(features, rng, config).0
}

/// Applies the masks and reports where they fell.
///
/// Widths are uniform on `[0, max]` (inclusive, capped at the axis length),
/// starts uniform over the positions that keep the mask inside the matrix.
/// Frequency masks are drawn before time masks. Masked cells take the mean of
/// the unmasked input.
pub fn spec_augment_with_masks<R: Rng + ?Sized>(
    features: &FeatureMatrix,
    rng: &mut R,
    config: &SpecAugmentConfig,
) -> (FeatureMatrix, Vec<Mask>) {
    let (frames, channels) = (features.frames(), features.channels());
    let fill = features.mean();
    let mut out = features.clone();
    let mut masks = Vec::with_capacity(config.n_freq_masks + config.n_time_masks);

    let span = |rng: &mut R, max: usize, len: usize| {
        let width = rng.random_range(0..=max.min(len));
        let start = rng.random_range(0..=len - width);
        start..start + width
    };
    for _ in 0..config.n_freq_masks {
        masks.push(Mask::Frequency(span(rng, config.max_freq_mask, channels)));
    }
    for _ in 0..config.n_time_masks {
        masks.push(Mask::Time(span(rng, config.max_time_mask, frames)));
    }

    let values = out.values_mut();
    for mask in &masks {
        match mask {
            Mask::Frequency(r) => {
                for t in 0..frames {
                    values[t * channels + r.start..t * channels + r.end].fill(fill);
                }
            }
            Mask::Time(r) => values[r.start * channels..r.end * channels].fill(fill),
        }
    }
    (out, masks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matrix(frames: usize, channels: usize) -> FeatureMatrix {
        let v = (0..frames * channels).map(|i| (i as f64 * 0.37).sin() * 5.0).collect();
        FeatureMatrix::new(frames, channels, v).unwrap()
    }

    fn covered(masks: &[Mask], t: usize, c: usize) -> bool {
        masks.iter().any(|m| match m {
            Mask::Frequency(r) => r.contains(&c),
            Mask::Time(r) => r.contains(&t),
        })
    }

    #[test]
    fn masks_respect_widths_and_leave_rest_untouched() {
        let m = matrix(150, 80);
        let fill = m.mean();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (out, masks) = spec_augment_with_masks(&m, &mut rng, &SpecAugmentConfig::default());
            assert_eq!(masks.len(), 2);
            for mask in &masks {
                match mask {
                    Mask::Frequency(r) => assert!(r.len() <= 27 && r.end <= 80),
                    Mask::Time(r) => assert!(r.len() <= 100 && r.end <= 150),
                }
            }
            for t in 0..150 {
                for c in 0..80 {
                    let (a, b) = (m.get(t, c), out.get(t, c));
                    if covered(&masks, t, c) {
                        assert_eq!(b.to_bits(), fill.to_bits());
                    } else {
                        assert_eq!(a.to_bits(), b.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn time_mask_capped_by_frame_count() {
        let m = matrix(10, 80);
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, masks) = spec_augment_with_masks(&m, &mut rng, &SpecAugmentConfig::default());
            let Mask::Time(r) = &masks[1] else { panic!() };
            assert!(r.end <= 10);
        }
    }

    #[test]
    fn zero_widths_are_identity() {
        let m = matrix(20, 80);
        let cfg = SpecAugmentConfig {
            max_freq_mask: 0,
            max_time_mask: 0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(spec_augment(&m, &mut rng, &cfg), m);
    }

    #[test]
    fn seeded_masks_repeat() {
        let m = matrix(120, 80);
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            spec_augment_with_masks(&m, &mut rng, &SpecAugmentConfig::default())
        };
        assert_eq!(run(), run());
    }
}
