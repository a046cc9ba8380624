//! Signal processing: pitch tracking, PSOLA, f0/formant shifting, resampling
//! and VTLP.
//!
//! Every function here is pure: identical inputs give bit-identical outputs,
//! and no state is shared between calls.

pub mod marks;
pub mod pitch;
pub mod psola;
pub mod resample;
pub mod shift;
pub mod vtlp;

pub use marks::{detect_pitch_marks, PitchMarks};
pub use pitch::{estimate_default, estimate_pitch_contour, median_f0, PitchContour};
pub use psola::{psola_resynthesize, PitchScale};
pub use resample::sinc_resample;
pub use shift::{shift_f0, shift_formants};
pub use vtlp::vtlp_warp;
