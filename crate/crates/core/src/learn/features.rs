//! Early-career feature vectors.
//!
//! For a window of the first `t` career years the schema is:
//!
//! | entries | meaning |
//! |---|---|
//! | `t` | papers in career years `1..=t` |
//! | `t` | new citations in career years `1..=t` |
//! | 1 | cumulative papers at `t` |
//! | 1 | cumulative citations at `t` |
//! | 1 | h-index at `t` |
//! | 1 | distinct coauthors in the window |
//! | 1 | largest coauthor h-index at `t` |
//! | 1 | journal fraction of window papers |
//! | 1 | self-citation fraction of window citations |
//! | 1 | mean authors per window paper |
//! | 1 | window years without a paper |
//!
//! Everything is measured on data dated no later than the window's last
//! calendar year, so nothing after the window leaks in.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{CitationMode, Corpus, VenueKind};
use crate::error::{Error, Result};
use crate::stats::{author_h_index, h_index};

pub const T_MIN: usize = 3;
pub const T_MAX: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub t: usize,
    pub values: Vec<f64>,
}

pub fn feature_dim(t: usize) -> usize {
    2 * t + 9
}

pub fn feature_names(t: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=t).map(|y| format!("papers_y{y}")).collect();
    names.extend((1..=t).map(|y| format!("citations_y{y}")));
    names.extend(
        [
            "cum_papers",
            "cum_citations",
            "h_index",
            "coauthors",
            "max_coauthor_h_index",
            "journal_fraction",
            "self_citation_fraction",
            "mean_authors_per_paper",
            "zero_paper_years",
        ]
        .map(String::from),
    );
    names
}

pub fn extract_features(corpus: &Corpus, author_id: &str, t: usize, min_span: usize) -> Result<FeatureVector> {
    if !(T_MIN..=T_MAX).contains(&t) {
        return Err(Error::arg(format!("early window t = {t} outside {T_MIN}..={T_MAX}")));
    }
    let papers = corpus
        .author_papers(author_id)
        .ok_or_else(|| Error::UnknownAuthor(author_id.to_string()))?;
    let span = corpus.observation_span(author_id).unwrap_or(0);
    if span < min_span {
        return Err(Error::Ineligible {
            author: author_id.to_string(),
            span,
            min_span,
        });
    }
    let all = corpus.papers();
    let start = all[papers[0]].year;
    let last = start + t as i32 - 1;

    let mut papers_per_year = vec![0.0; t];
    let mut citations_per_year = vec![0.0; t];
    let (mut journal, mut window_papers, mut authorships) = (0usize, 0usize, 0usize);
    let (mut self_cites, mut cites) = (0usize, 0usize);
    let mut coauthors = BTreeSet::new();
    for &p in papers {
        let paper = &all[p];
        if paper.year > last {
            break;
        }
        papers_per_year[(paper.year - start) as usize] += 1.0;
        window_papers += 1;
        authorships += paper.author_ids.len();
        if paper.venue_kind == VenueKind::Journal {
            journal += 1;
        }
        coauthors.extend(paper.author_ids.iter().map(String::as_str).filter(|&a| a != author_id));
        for e in corpus.citations_of(p).iter().take_while(|e| e.year <= last) {
            citations_per_year[(e.year - start).max(0) as usize] += 1.0;
            cites += 1;
            if e.is_self {
                self_cites += 1;
            }
        }
    }

    let h = h_index(&corpus.paper_citation_counts(author_id, last, CitationMode::All));
    let max_coauthor_h = coauthors
        .iter()
        .map(|co| author_h_index(corpus, co, last, CitationMode::All))
        .max()
        .unwrap_or(0);

    let mut values = Vec::with_capacity(feature_dim(t));
    values.extend_from_slice(&papers_per_year);
    values.extend_from_slice(&citations_per_year);
    values.push(window_papers as f64);
    values.push(cites as f64);
    values.push(h as f64);
    values.push(coauthors.len() as f64);
    values.push(max_coauthor_h as f64);
    values.push(journal as f64 / window_papers as f64);
    values.push(if cites == 0 {
        0.0
    } else {
        self_cites as f64 / cites as f64
    });
    values.push(authorships as f64 / window_papers as f64);
    values.push(papers_per_year.iter().filter(|&&p| p == 0.0).count() as f64);
    Ok(FeatureVector { t, values })
}
