//! Peak detection on normalized success series and the six-way trajectory
//! taxonomy.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CitationMode, Corpus};
use crate::error::{Error, Result};
use crate::series::{build_series, AuthorTimeline, SeriesConfig, SuccessSeries};

/// Trajectory categories. The declaration order is the tie-break order used
/// wherever classes compete (ER first, OT last).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrajectoryClass {
    /// Early riser: one peak in logical years 2..=5, then decay.
    ER,
    /// Late riser: one peak from logical year 6 on, then decay.
    LR,
    /// Frequent riser: two or more peaks.
    FR,
    /// Steady riser: monotone growth.
    SR,
    /// Steady dropper: peak in the first logical year, then monotone decline.
    SD,
    /// Everything else, including low-activity authors.
    OT,
}

impl TrajectoryClass {
    pub const ALL: [TrajectoryClass; 6] = [
        TrajectoryClass::ER,
        TrajectoryClass::LR,
        TrajectoryClass::FR,
        TrajectoryClass::SR,
        TrajectoryClass::SD,
        TrajectoryClass::OT,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryClass::ER => "ER",
            TrajectoryClass::LR => "LR",
            TrajectoryClass::FR => "FR",
            TrajectoryClass::SR => "SR",
            TrajectoryClass::SD => "SD",
            TrajectoryClass::OT => "OT",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TrajectoryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TrajectoryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrajectoryClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::arg(format!("unknown trajectory class `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    OtLowActivity,
    SrMonotone,
    SdFirstYear,
    FrMultiPeak,
    ErSingleEarly,
    LrSingleLate,
    OtResidual,
    OtTooShort,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::OtLowActivity => "ot_low_activity",
            Reason::SrMonotone => "sr_monotone",
            Reason::SdFirstYear => "sd_first_year",
            Reason::FrMultiPeak => "fr_multi_peak",
            Reason::ErSingleEarly => "er_single_early",
            Reason::LrSingleLate => "lr_single_late",
            Reason::OtResidual => "ot_residual",
            Reason::OtTooShort => "ot_too_short",
        }
    }

    pub fn class(self) -> TrajectoryClass {
        match self {
            Reason::OtLowActivity | Reason::OtResidual | Reason::OtTooShort => TrajectoryClass::OT,
            Reason::SrMonotone => TrajectoryClass::SR,
            Reason::SdFirstYear => TrajectoryClass::SD,
            Reason::FrMultiPeak => TrajectoryClass::FR,
            Reason::ErSingleEarly => TrajectoryClass::ER,
            Reason::LrSingleLate => TrajectoryClass::LR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// 1-based logical year; leftmost index of the plateau.
    pub logical_year: usize,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakParams {
    /// Minimum height as a fraction of the tallest candidate.
    pub height_fraction: f64,
    /// Peaks this many logical years apart or closer are merged.
    pub min_separation: usize,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            height_fraction: 0.75,
            min_separation: 2,
        }
    }
}

/// Which clock the ER/LR boundary is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakClock {
    /// Logical years (career year minus the buffer).
    #[default]
    Logical,
    /// Career years counted from the first paper.
    Career,
}

impl std::str::FromStr for PeakClock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logical" => Ok(PeakClock::Logical),
            "career" => Ok(PeakClock::Career),
            other => Err(Error::arg(format!("unknown peak clock `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub series: SeriesConfig,
    pub peaks: PeakParams,
    /// Slack allowed when testing monotonicity of the normalized series.
    pub epsilon: f64,
    /// ER/LR require the final normalized value to be at most `1 - delta`.
    pub delta: f64,
    /// Last year (on `clock`) that still counts as an early peak.
    pub early_until: usize,
    pub clock: PeakClock,
    pub min_span: usize,
    pub citation_mode: CitationMode,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            series: SeriesConfig::default(),
            peaks: PeakParams::default(),
            epsilon: 0.01,
            delta: 0.05,
            early_until: 5,
            clock: PeakClock::Logical,
            min_span: 10,
            citation_mode: CitationMode::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedAuthor {
    pub author_id: String,
    pub class: TrajectoryClass,
    pub peaks: Vec<Peak>,
    pub reason: Reason,
}

/// Normalized values closer than this are treated as equal, so ties that
/// hold exactly in rational arithmetic survive floating-point rounding.
pub const TIE: f64 = 1e-9;

/// Filtered, merged peaks of a series with values in `[0, 1]`.
///
/// Candidates are plateaus strictly above both neighbours (one neighbour at
/// the ends). Zero-height plateaus are never peaks. Candidates shorter than
/// `height_fraction` of the tallest are dropped, then a left-to-right sweep
/// merges any peak within `min_separation` years of the last kept one,
/// keeping the taller (the earlier on ties). Values within [`TIE`] of each
/// other compare as equal throughout.
pub fn detect_peaks(values: &[f64], params: &PeakParams) -> Result<Vec<Peak>> {
    if values.is_empty() {
        return Err(Error::arg("peak detection on an empty series"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::arg(format!(
            "series value {v} is not a finite non-negative number"
        )));
    }

    let n = values.len();
    let mut candidates = Vec::new();
    let mut i = 0;
    while i < n {
        let v = values[i];
        let mut j = i;
        while j + 1 < n && (values[j + 1] - v).abs() <= TIE {
            j += 1;
        }
        let left = i == 0 || values[i - 1] < v - TIE;
        let right = j == n - 1 || values[j + 1] < v - TIE;
        if left && right && v > TIE {
            candidates.push(Peak {
                logical_year: i + 1,
                height: v,
            });
        }
        i = j + 1;
    }

    let tallest = candidates.iter().map(|p| p.height).fold(0.0, f64::max);
    let cutoff = params.height_fraction * tallest;
    let mut kept: Vec<Peak> = Vec::with_capacity(candidates.len());
    for peak in candidates.into_iter().filter(|p| p.height >= cutoff - TIE) {
        match kept.last_mut() {
            Some(last) if peak.logical_year - last.logical_year <= params.min_separation => {
                if peak.height > last.height + TIE {
                    *last = peak;
                }
            }
            _ => kept.push(peak),
        }
    }
    Ok(kept)
}

fn monotone_nondecreasing(values: &[f64], eps: f64) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - eps - TIE)
}

fn monotone_nonincreasing(values: &[f64], eps: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + eps + TIE)
}

/// Assign a trajectory class to one eligible author.
///
/// `timeline` must run to the corpus end year, so its length is the
/// observation span.
pub fn classify(
    timeline: &AuthorTimeline,
    series: &SuccessSeries,
    config: &ClassifyConfig,
) -> Result<ClassifiedAuthor> {
    let span = timeline.len();
    if span < config.min_span {
        return Err(Error::Ineligible {
            author: timeline.author_id.clone(),
            span,
            min_span: config.min_span,
        });
    }
    let done = |reason: Reason, peaks: Vec<Peak>| ClassifiedAuthor {
        author_id: timeline.author_id.clone(),
        class: reason.class(),
        peaks,
        reason,
    };

    let span_f = span as f64;
    let papers_rate = timeline.total_papers() as f64 / span_f;
    let citation_rate = timeline.total_citations() as f64 / span_f;
    if papers_rate < 1.0 && citation_rate < 1.0 {
        return Ok(done(Reason::OtLowActivity, Vec::new()));
    }

    let norm = &series.normalized;
    let n = norm.len();
    if n < 3 {
        return Ok(done(Reason::OtTooShort, Vec::new()));
    }
    // no citations at all: nothing to rise or fall
    if norm.iter().all(|&v| v == 0.0) {
        return Ok(done(Reason::OtResidual, Vec::new()));
    }

    let eps = config.epsilon;
    let peaks = detect_peaks(norm, &config.peaks)?;
    if monotone_nondecreasing(norm, eps) {
        return Ok(done(Reason::SrMonotone, peaks));
    }
    if peaks.first().is_some_and(|p| p.logical_year == 1) && monotone_nonincreasing(norm, eps) {
        return Ok(done(Reason::SdFirstYear, peaks));
    }
    if peaks.len() >= 2 {
        return Ok(done(Reason::FrMultiPeak, peaks));
    }
    if let [peak] = peaks.as_slice() {
        let decays = norm[n - 1] <= 1.0 - config.delta + TIE;
        if peak.logical_year < n && decays {
            let pos = match config.clock {
                PeakClock::Logical => peak.logical_year,
                PeakClock::Career => peak.logical_year + config.series.buffer,
            };
            if (2..=config.early_until).contains(&pos) {
                return Ok(done(Reason::ErSingleEarly, peaks));
            }
            if pos > config.early_until {
                return Ok(done(Reason::LrSingleLate, peaks));
            }
        }
    }
    Ok(done(Reason::OtResidual, peaks))
}

/// Timeline, series and class of one author, checking eligibility first.
pub fn classify_author(corpus: &Corpus, author_id: &str, config: &ClassifyConfig) -> Result<ClassifiedAuthor> {
    let timeline = corpus.author_timeline(author_id, config.citation_mode)?;
    if timeline.len() < config.min_span {
        return Err(Error::Ineligible {
            author: author_id.to_string(),
            span: timeline.len(),
            min_span: config.min_span,
        });
    }
    let series = build_series(&timeline, &config.series)?;
    classify(&timeline, &series, config)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRun {
    pub authors: BTreeMap<String, ClassifiedAuthor>,
    /// Authors not classified: ineligible or failing.
    pub skipped: usize,
    /// Failures other than ineligibility, as `(author, message)`.
    pub errors: Vec<(String, String)>,
}

impl ClassificationRun {
    pub fn class_of(&self, author_id: &str) -> Option<TrajectoryClass> {
        self.authors.get(author_id).map(|c| c.class)
    }
}

pub fn classify_corpus(corpus: &Corpus, config: &ClassifyConfig) -> ClassificationRun {
    let authors: Vec<&str> = corpus.authors().collect();
    let results: Vec<(&str, Result<ClassifiedAuthor>)> = authors
        .par_iter()
        .map(|&a| (a, classify_author(corpus, a, config)))
        .collect();
    let mut run = ClassificationRun::default();
    for (author, result) in results {
        match result {
            Ok(c) => {
                run.authors.insert(author.to_string(), c);
            }
            Err(Error::Ineligible { .. }) => run.skipped += 1,
            Err(e) => {
                run.skipped += 1;
                run.errors.push((author.to_string(), e.to_string()));
            }
        }
    }
    run
}

pub const CLASS_CSV_HEADER: &str = "author_id,class,reason,n_peaks,peak_years";

pub fn write_classes_csv<W: Write>(mut out: W, run: &ClassificationRun) -> Result<()> {
    writeln!(out, "{CLASS_CSV_HEADER}")?;
    for c in run.authors.values() {
        let years: Vec<String> = c.peaks.iter().map(|p| p.logical_year.to_string()).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            c.author_id,
            c.class,
            c.reason.as_str(),
            c.peaks.len(),
            years.join(";")
        )?;
    }
    Ok(())
}
