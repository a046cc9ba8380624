//! *Opposite* and *Random* augmentation policies.
//!
//! A policy looks at the (resolved) gender of a segment and decides whether to
//! leave it alone, move it toward the other gender (f0 and formants), or
//! perturb it within its own gender (f0 only). Target medians are drawn from
//! per-gender normal priors clamped at three standard deviations.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::audio::AudioBuffer;
use crate::dsp::{self, shift};
use crate::error::{Error, Result};

/// Median f0 at or above which a voice is inferred to be female.
pub const INFERENCE_THRESHOLD_HZ: f64 = 175.0;

pub const FEMALE_PRIOR: GenderF0Prior = GenderF0Prior {
    mean: 250.0,
    std_dev: 17.0,
};
pub const MALE_PRIOR: GenderF0Prior = GenderF0Prior {
    mean: 140.0,
    std_dev: 20.0,
};

pub const BETA_TO_FEMALE: f64 = 1.2;
pub const BETA_TO_MALE: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenderLabel {
    Female,
    Male,
    Unknown,
}

impl GenderLabel {
    pub fn opposite(self) -> Option<Self> {
        match self {
            GenderLabel::Female => Some(GenderLabel::Male),
            GenderLabel::Male => Some(GenderLabel::Female),
            GenderLabel::Unknown => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            GenderLabel::Female => "F",
            GenderLabel::Male => "M",
            GenderLabel::Unknown => "U",
        }
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for GenderLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "F" | "f" | "female" | "FEMALE" => Ok(GenderLabel::Female),
            "M" | "m" | "male" | "MALE" => Ok(GenderLabel::Male),
            "U" | "u" | "unknown" | "UNKNOWN" => Ok(GenderLabel::Unknown),
            other => Err(Error::InvalidArgument(format!(
                "gender must be one of F, M, U; got '{other}'"
            ))),
        }
    }
}

/// Normal prior over target median f0 for one gender.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenderF0Prior {
    pub mean: f64,
    pub std_dev: f64,
}

impl GenderF0Prior {
    pub fn new(mean: f64, std_dev: f64) -> Result<Self> {
        if !(std_dev > 0.0 && mean > 3.0 * std_dev && mean.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "prior needs std_dev > 0 and mean > 3 * std_dev, got N({mean}, {std_dev})"
            )));
        }
        Ok(Self { mean, std_dev })
    }

    /// `[mean - 3 sd, mean + 3 sd]`
    pub fn clamp_range(&self) -> (f64, f64) {
        (
            self.mean - 3.0 * self.std_dev,
            self.mean + 3.0 * self.std_dev,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    Opposite { p_f_to_m: f64, p_m_to_f: f64 },
    Random { p_r: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub female_prior: GenderF0Prior,
    pub male_prior: GenderF0Prior,
    pub beta_to_female: f64,
    pub beta_to_male: f64,
    /// When false, cross-gender decisions shift f0 only (the
    /// "- Formant Shifting" ablation).
    pub formant_shifting: bool,
    /// When false, *Random* always targets the source gender (the
    /// "- Gender Switching" ablation).
    pub gender_switching: bool,
}

impl PolicyConfig {
    pub fn opposite(p_f_to_m: f64, p_m_to_f: f64) -> Result<Self> {
        Self::with_kind(PolicyKind::Opposite { p_f_to_m, p_m_to_f })
    }

    pub fn random(p_r: f64) -> Result<Self> {
        Self::with_kind(PolicyKind::Random { p_r })
    }

    pub fn with_kind(kind: PolicyKind) -> Result<Self> {
        let config = Self {
            kind,
            female_prior: FEMALE_PRIOR,
            male_prior: MALE_PRIOR,
            beta_to_female: BETA_TO_FEMALE,
            beta_to_male: BETA_TO_MALE,
            formant_shifting: true,
            gender_switching: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let probs: &[f64] = match &self.kind {
            PolicyKind::Opposite { p_f_to_m, p_m_to_f } => &[*p_f_to_m, *p_m_to_f],
            PolicyKind::Random { p_r } => &[*p_r],
        };
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        for beta in [self.beta_to_female, self.beta_to_male] {
            if !(shift::MIN_BETA..=shift::MAX_BETA).contains(&beta) {
                return Err(Error::BetaOutOfRange(beta));
            }
        }
        GenderF0Prior::new(self.female_prior.mean, self.female_prior.std_dev)?;
        GenderF0Prior::new(self.male_prior.mean, self.male_prior.std_dev)?;
        Ok(())
    }

    pub fn prior_for(&self, gender: GenderLabel) -> Option<&GenderF0Prior> {
        match gender {
            GenderLabel::Female => Some(&self.female_prior),
            GenderLabel::Male => Some(&self.male_prior),
            GenderLabel::Unknown => None,
        }
    }

    pub fn beta_for(&self, target: GenderLabel) -> Option<f64> {
        match target {
            GenderLabel::Female => Some(self.beta_to_female),
            GenderLabel::Male => Some(self.beta_to_male),
            GenderLabel::Unknown => None,
        }
    }
}

impl Default for PolicyConfig {
    /// *Random* with `p_r = 0.5`.
    fn default() -> Self {
        Self::random(0.5).expect("valid default")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AugmentationDecision {
    None,
    CrossGender {
        target: GenderLabel,
        target_median: f64,
    },
    WithinGender {
        target_median: f64,
    },
}

impl AugmentationDecision {
    /// Gender label the sample carries after the decision is applied.
    pub fn effective_gender(&self, source: GenderLabel) -> GenderLabel {
        match self {
            AugmentationDecision::CrossGender { target, .. } => *target,
            _ => source,
        }
    }

    pub fn target_median(&self) -> Option<f64> {
        match self {
            AugmentationDecision::None => None,
            AugmentationDecision::CrossGender { target_median, .. }
            | AugmentationDecision::WithinGender { target_median } => Some(*target_median),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, AugmentationDecision::None)
    }
}

impl fmt::Display for AugmentationDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugmentationDecision::None => f.write_str("none"),
            AugmentationDecision::CrossGender {
                target,
                target_median,
            } => write!(f, "cross-gender target={target} median={target_median:.2}Hz"),
            AugmentationDecision::WithinGender { target_median } => {
                write!(f, "within-gender median={target_median:.2}Hz")
            }
        }
    }
}

/// Draws a target median from `prior`, clamped to its 3-sigma range.
pub fn sample_target_median<R: Rng + ?Sized>(prior: &GenderF0Prior, rng: &mut R) -> f64 {
    let (lo, hi) = prior.clamp_range();
    let normal = Normal::new(prior.mean, prior.std_dev).expect("validated prior");
    normal.sample(rng).clamp(lo, hi)
}

/// Draws the augmentation decision for one segment.
pub fn decide<R: Rng + ?Sized>(
    source: GenderLabel,
    config: &PolicyConfig,
    rng: &mut R,
) -> Result<AugmentationDecision> {
    let other = source
        .opposite()
        .ok_or_else(|| Error::GenderUnresolved("source segment".into()))?;
    let target = match config.kind {
        PolicyKind::Opposite { p_f_to_m, p_m_to_f } => {
            let p = match source {
                GenderLabel::Female => p_f_to_m,
                _ => p_m_to_f,
            };
            if !rng.random_bool(p) {
                return Ok(AugmentationDecision::None);
            }
            other
        }
        PolicyKind::Random { p_r } => {
            if !rng.random_bool(p_r) {
                return Ok(AugmentationDecision::None);
            }
            let pick_female: bool = rng.random();
            if !config.gender_switching {
                source
            } else if pick_female {
                GenderLabel::Female
            } else {
                GenderLabel::Male
            }
        }
    };
    let prior = config.prior_for(target).expect("resolved target");
    let target_median = sample_target_median(prior, rng);
    Ok(if target == source {
        AugmentationDecision::WithinGender { target_median }
    } else {
        AugmentationDecision::CrossGender {
            target,
            target_median,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    Unvoiced,
    TooShort,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::Unvoiced => "unvoiced",
            SkipReason::TooShort => "too-short",
        })
    }
}

/// Output of [`apply_decision`]. Skipped samples carry the unmodified input.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub audio: AudioBuffer,
    pub skipped: Option<SkipReason>,
}

/// Renders `decision` on `audio`.
///
/// `None` is a bit-exact pass-through. Segments that cannot be analysed
/// (no voiced frames, or too short for the pitch tracker) are passed through
/// unchanged with a skip reason instead of failing.
pub fn apply_decision(
    audio: &AudioBuffer,
    decision: &AugmentationDecision,
    config: &PolicyConfig,
) -> Result<Applied> {
    let result = match *decision {
        AugmentationDecision::None => {
            return Ok(Applied {
                audio: audio.clone(),
                skipped: None,
            })
        }
        AugmentationDecision::WithinGender { target_median } => {
            shift::shift_f0(audio, target_median).map(AudioBuffer::clamped)
        }
        AugmentationDecision::CrossGender {
            target,
            target_median,
        } => {
            let beta = config
                .beta_for(target)
                .ok_or_else(|| Error::GenderUnresolved("cross-gender target".into()))?;
            shift::shift_f0(audio, target_median).and_then(|shifted| {
                if config.formant_shifting {
                    shift::shift_formants(&shifted, beta)
                } else {
                    Ok(shifted.clamped())
                }
            })
        }
    };
    match result {
        Ok(audio) => Ok(Applied {
            audio,
            skipped: None,
        }),
        Err(Error::UnvoicedInput) => Ok(Applied {
            audio: audio.clone(),
            skipped: Some(SkipReason::Unvoiced),
        }),
        Err(Error::InsufficientFrames { .. }) => Ok(Applied {
            audio: audio.clone(),
            skipped: Some(SkipReason::TooShort),
        }),
        Err(e) => Err(e),
    }
}

/// Infers a gender label from the median f0; `Unknown` when nothing is voiced.
pub fn infer_gender(audio: &AudioBuffer) -> GenderLabel {
    let median = dsp::estimate_default(audio).and_then(|c| c.median_f0());
    match median {
        Ok(m) if m >= INFERENCE_THRESHOLD_HZ => GenderLabel::Female,
        Ok(_) => GenderLabel::Male,
        Err(_) => GenderLabel::Unknown,
    }
}

/// Expected post-augmentation `(female, male)` fractions for a base
/// distribution.
pub fn expected_gender_distribution(config: &PolicyConfig, base: (f64, f64)) -> Result<(f64, f64)> {
    let (f, m) = base;
    if !(f >= 0.0 && m >= 0.0 && ((f + m) - 1.0).abs() < 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "base fractions must be non-negative and sum to 1, got ({f}, {m})"
        )));
    }
    let female = match config.kind {
        PolicyKind::Random { p_r } if config.gender_switching => {
            f * (1.0 - p_r / 2.0) + m * (p_r / 2.0)
        }
        PolicyKind::Random { .. } => f,
        PolicyKind::Opposite { p_f_to_m, p_m_to_f } => f * (1.0 - p_f_to_m) + m * p_m_to_f,
    };
    Ok((female, 1.0 - female))
}
