//! Career success-trajectory mining over bibliographic corpora.
//!
//! The pipeline runs [`corpus`] (records and indices) into [`series`]
//! (per-author success ratio, smoothed and normalized), then [`trajectory`]
//! (peaks and the six classes). [`stats`] characterizes the classes,
//! [`learn`] predicts future success with a stratified two-stage model, and
//! [`synth`] generates labelled corpora for testing.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod learn;
pub mod series;
pub mod stats;
pub mod synth;
pub mod trajectory;

pub use corpus::{load_corpus, CitationMode, Corpus, IngestOptions, IngestReport, PaperRecord, VenueKind};
pub use error::{Error, Result};
pub use series::{build_series, AuthorTimeline, SeriesConfig, SuccessSeries};
pub use trajectory::{classify, classify_corpus, detect_peaks, ClassifyConfig, TrajectoryClass};
