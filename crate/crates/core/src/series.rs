//! Per-author success series: cumulative citations over cumulative papers,
//! reported after a buffer window, smoothed and max-normalized.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Yearly counts over career years `1..=L` (index 0 is career year 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorTimeline {
    pub author_id: String,
    pub start_year: i32,
    pub papers_per_year: Vec<u32>,
    pub new_citations_per_year: Vec<u64>,
}

impl AuthorTimeline {
    pub fn len(&self) -> usize {
        self.papers_per_year.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers_per_year.is_empty()
    }

    pub fn total_papers(&self) -> u64 {
        self.papers_per_year.iter().map(|&p| u64::from(p)).sum()
    }

    pub fn total_citations(&self) -> u64 {
        self.new_citations_per_year.iter().sum()
    }

    pub fn cumulative(&self) -> CumulativeCounts {
        let mut cum_papers = Vec::with_capacity(self.len());
        let mut cum_citations = Vec::with_capacity(self.len());
        let (mut p, mut c) = (0u64, 0u64);
        for (&dp, &dc) in self.papers_per_year.iter().zip(&self.new_citations_per_year) {
            p += u64::from(dp);
            c += dc;
            cum_papers.push(p);
            cum_citations.push(c);
        }
        CumulativeCounts {
            cum_papers,
            cum_citations,
        }
    }

    /// Same timeline with every yearly citation count multiplied by `k`.
    pub fn scale_citations(&self, k: u64) -> AuthorTimeline {
        AuthorTimeline {
            new_citations_per_year: self.new_citations_per_year.iter().map(|c| c * k).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CumulativeCounts {
    pub cum_papers: Vec<u64>,
    pub cum_citations: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaMode {
    /// Window centred on each point, truncated at the ends.
    #[default]
    Centered,
    /// Window ending at each point, truncated at the start.
    Trailing,
}

impl std::str::FromStr for MaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(MaMode::Centered),
            "trailing" => Ok(MaMode::Trailing),
            other => Err(Error::arg(format!("unknown moving-average mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Career years hidden before logical year 1.
    pub buffer: usize,
    pub ma_window: usize,
    pub ma_mode: MaMode,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            buffer: 3,
            ma_window: 5,
            ma_mode: MaMode::Centered,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessSeries {
    pub author_id: String,
    pub raw: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl SuccessSeries {
    /// Number of logical years.
    pub fn n(&self) -> usize {
        self.raw.len()
    }
}

/// Success ratio for each logical year, i.e. career years `buffer+1..=L`.
///
/// Buffer-year papers and citations are part of the cumulative counts.
pub fn raw_success(timeline: &AuthorTimeline, buffer: usize) -> Result<Vec<f64>> {
    let len = timeline.len();
    if len <= buffer || timeline.new_citations_per_year.len() != len {
        return Err(Error::TooShort {
            len,
            needed: buffer + 1,
        });
    }
    let cum = timeline.cumulative();
    if cum.cum_papers[0] == 0 {
        return Err(Error::arg(format!(
            "timeline of `{}` has no paper in its first career year",
            timeline.author_id
        )));
    }
    Ok(cum.cum_citations[buffer..]
        .iter()
        .zip(&cum.cum_papers[buffer..])
        .map(|(&c, &p)| c as f64 / p as f64)
        .collect())
}

pub fn moving_average(values: &[f64], window: usize, mode: MaMode) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) {
        return Err(Error::arg(format!(
            "moving-average window must be odd and positive, got {window}"
        )));
    }
    if values.is_empty() {
        return Err(Error::arg("moving average of an empty series"));
    }
    let n = values.len();
    let half = window / 2;
    let out = (0..n)
        .map(|i| {
            let (lo, hi) = match mode {
                MaMode::Centered => (i.saturating_sub(half), (i + half).min(n - 1)),
                MaMode::Trailing => ((i + 1).saturating_sub(window), i),
            };
            let slice = &values[lo..=hi];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect();
    Ok(out)
}

/// Divide by the maximum. An all-zero input maps to all zeros.
pub fn normalize_max(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::arg(format!(
            "normalize_max expects non-negative values, got {v}"
        )));
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|v| v / max).collect())
}

/// Raw ratio, then smoothing, then normalization.
pub fn build_series(timeline: &AuthorTimeline, config: &SeriesConfig) -> Result<SuccessSeries> {
    let raw = raw_success(timeline, config.buffer)?;
    let smoothed = moving_average(&raw, config.ma_window, config.ma_mode)?;
    let normalized = normalize_max(&smoothed)?;
    Ok(SuccessSeries {
        author_id: timeline.author_id.clone(),
        raw,
        smoothed,
        normalized,
    })
}

pub const SERIES_CSV_HEADER: &str = "author_id,logical_year,raw,smoothed,normalized";

/// One row per (author, logical year), six decimals.
pub fn write_series_csv<'a, W: Write>(mut out: W, series: impl IntoIterator<Item = &'a SuccessSeries>) -> Result<()> {
    writeln!(out, "{SERIES_CSV_HEADER}")?;
    for s in series {
        for j in 0..s.n() {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6}",
                s.author_id,
                j + 1,
                s.raw[j],
                s.smoothed[j],
                s.normalized[j]
            )?;
        }
    }
    Ok(())
}
