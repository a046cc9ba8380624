//! Word error rate scoring and gender-fairness reports.

mod bins;
mod bootstrap;
pub mod io;
mod score;
mod wer;

pub use bins::{binned_werr_report, BinReport, BinnedReport, LOW_CONFIDENCE_WORDS};
pub use bootstrap::{bootstrap_significance, BootstrapResult};
pub use score::{corpus_wer, werr, SegmentScore};
pub use wer::{normalize_text, score_text, wer_align, WerBreakdown};
