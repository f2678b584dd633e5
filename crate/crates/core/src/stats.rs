//! Characterization of trajectory classes: shares, impact, venues,
//! publication pace, self-citation sensitivity and what drives the decay of
//! early risers, late risers and steady droppers.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{CitationMode, Corpus, VenueKind};
use crate::error::Result;
use crate::trajectory::{classify_corpus, ClassificationRun, ClassifiedAuthor, ClassifyConfig, TrajectoryClass};

/// Largest `h` such that at least `h` entries are `>= h`.
pub fn h_index(citation_counts: &[usize]) -> usize {
    let n = citation_counts.len();
    // bucket[k] = number of papers with exactly k citations, capped at n
    let mut bucket = vec![0usize; n + 1];
    for &c in citation_counts {
        bucket[c.min(n)] += 1;
    }
    let mut at_least = 0;
    for h in (0..=n).rev() {
        at_least += bucket[h];
        if at_least >= h {
            return h;
        }
    }
    0
}

/// h-index from all citations received up to and including `cutoff`.
pub fn author_h_index(corpus: &Corpus, author_id: &str, cutoff: i32, mode: CitationMode) -> usize {
    h_index(&corpus.paper_citation_counts(author_id, cutoff, mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsConfig {
    pub classify: ClassifyConfig,
    /// Decay counts as publication-driven when the post-peak publication
    /// rate is at least this multiple of the rate up to the peak.
    pub decay_multiplier: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            classify: ClassifyConfig::default(),
            decay_multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub class: TrajectoryClass,
    pub count: usize,
    pub share: f64,
    pub mean_h_index: Option<f64>,
    pub journal_fraction: Option<f64>,
    pub conference_fraction: Option<f64>,
    pub mean_papers_per_year: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// One profile per class, in class order.
///
/// Venue fractions pool the paper lists of the class members. Impact is the
/// end-of-corpus h-index.
pub fn class_profiles(corpus: &Corpus, run: &ClassificationRun, mode: CitationMode) -> Vec<ClassProfile> {
    let total = run.authors.len();
    let end = corpus.end_year().unwrap_or(i32::MAX);
    TrajectoryClass::ALL
        .iter()
        .map(|&class| {
            let members: Vec<&str> = run
                .authors
                .values()
                .filter(|c| c.class == class)
                .map(|c| c.author_id.as_str())
                .collect();
            let count = members.len();
            let (mut h_sum, mut rate_sum) = (0usize, 0.0);
            let (mut journal, mut conference, mut papers) = (0usize, 0usize, 0usize);
            for &a in &members {
                h_sum += author_h_index(corpus, a, end, mode);
                let ps = corpus.author_papers(a).unwrap_or(&[]);
                papers += ps.len();
                for &p in ps {
                    match corpus.papers()[p].venue_kind {
                        VenueKind::Journal => journal += 1,
                        VenueKind::Conference => conference += 1,
                        VenueKind::Other => {}
                    }
                }
                let span = corpus.observation_span(a).unwrap_or(1).max(1);
                rate_sum += ps.len() as f64 / span as f64;
            }
            ClassProfile {
                class,
                count,
                share: ratio(count, total).unwrap_or(0.0),
                mean_h_index: ratio(h_sum, count),
                journal_fraction: ratio(journal, papers),
                conference_fraction: ratio(conference, papers),
                mean_papers_per_year: (count > 0).then(|| rate_sum / count as f64),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationEntry {
    pub class: TrajectoryClass,
    pub count: usize,
    pub migrated_to_ot: usize,
    pub migration_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MigrationReport {
    /// Non-OT classes with at least one member, in class order.
    pub entries: Vec<MigrationEntry>,
}

impl MigrationReport {
    pub fn entry(&self, class: TrajectoryClass) -> Option<&MigrationEntry> {
        self.entries.iter().find(|e| e.class == class)
    }
}

/// Compare the all-citations classification with one that ignores
/// self-citations; report per class how many authors fall into OT.
pub fn self_citation_migration(corpus: &Corpus, config: &ClassifyConfig) -> MigrationReport {
    let all = classify_corpus(
        corpus,
        &ClassifyConfig {
            citation_mode: CitationMode::All,
            ..*config
        },
    );
    let excl = classify_corpus(
        corpus,
        &ClassifyConfig {
            citation_mode: CitationMode::ExcludeSelf,
            ..*config
        },
    );
    migration_between(&all, &excl)
}

pub fn migration_between(all: &ClassificationRun, exclude_self: &ClassificationRun) -> MigrationReport {
    let mut counts = [(0usize, 0usize); 6];
    for (author, c) in &all.authors {
        if c.class == TrajectoryClass::OT {
            continue;
        }
        let slot = &mut counts[c.class.index()];
        slot.0 += 1;
        if exclude_self.class_of(author) == Some(TrajectoryClass::OT) {
            slot.1 += 1;
        }
    }
    let entries = TrajectoryClass::ALL
        .iter()
        .filter(|&&c| c != TrajectoryClass::OT && counts[c.index()].0 > 0)
        .map(|&class| {
            let (count, migrated) = counts[class.index()];
            MigrationEntry {
                class,
                count,
                migrated_to_ot: migrated,
                migration_fraction: ratio(migrated, count),
            }
        })
        .collect();
    MigrationReport { entries }
}

pub const DECAY_CLASSES: [TrajectoryClass; 3] = [TrajectoryClass::ER, TrajectoryClass::LR, TrajectoryClass::SD];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationDecay {
    pub class: TrajectoryClass,
    pub decaying: usize,
    pub publication_driven: usize,
    pub publication_driven_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollaboratorRetention {
    pub class: TrajectoryClass,
    pub decaying: usize,
    /// Decaying authors without any coauthor up to their peak.
    pub no_coauthor: usize,
    pub collaborator_lost: usize,
    pub collaborator_lost_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEntry {
    pub class: TrajectoryClass,
    pub decaying: usize,
    pub publication_driven_fraction: Option<f64>,
    pub collaborator_lost_fraction: Option<f64>,
    pub no_coauthor: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub entries: Vec<DecayEntry>,
}

/// Logical peak year that starts the decay. SD authors peak in year 1.
fn decay_peak(c: &ClassifiedAuthor) -> Option<usize> {
    match c.class {
        TrajectoryClass::SD => Some(1),
        TrajectoryClass::ER | TrajectoryClass::LR => c.peaks.first().map(|p| p.logical_year),
        _ => None,
    }
}

fn decaying_members(
    run: &ClassificationRun,
    class: TrajectoryClass,
) -> impl Iterator<Item = (&ClassifiedAuthor, usize)> {
    run.authors
        .values()
        .filter(move |c| c.class == class)
        .filter_map(|c| decay_peak(c).map(|p| (c, p)))
}

/// Whether the publication pace after the peak held up relative to the pace
/// up to the peak, per decaying class.
pub fn decay_attribution(
    corpus: &Corpus,
    run: &ClassificationRun,
    config: &StatsConfig,
) -> Result<Vec<PublicationDecay>> {
    let buffer = config.classify.series.buffer;
    let mut out = Vec::with_capacity(DECAY_CLASSES.len());
    for class in DECAY_CLASSES {
        let (mut decaying, mut driven) = (0usize, 0usize);
        for (c, peak) in decaying_members(run, class) {
            let timeline = corpus.author_timeline(&c.author_id, config.classify.citation_mode)?;
            let logical = &timeline.papers_per_year[buffer.min(timeline.len())..];
            if peak >= logical.len() {
                continue;
            }
            decaying += 1;
            let mean = |s: &[u32]| s.iter().map(|&p| f64::from(p)).sum::<f64>() / s.len() as f64;
            let before = mean(&logical[..peak]);
            let after = mean(&logical[peak..]);
            if after >= config.decay_multiplier * before {
                driven += 1;
            }
        }
        out.push(PublicationDecay {
            class,
            decaying,
            publication_driven: driven,
            publication_driven_fraction: ratio(driven, decaying),
        });
    }
    Ok(out)
}

/// Whether each decaying author still publishes with their most prominent
/// pre-peak collaborator after the peak.
pub fn collaborator_retention(
    corpus: &Corpus,
    run: &ClassificationRun,
    config: &StatsConfig,
) -> Result<Vec<CollaboratorRetention>> {
    let buffer = config.classify.series.buffer as i32;
    let mode = config.classify.citation_mode;
    let end = corpus.end_year().unwrap_or(i32::MAX);
    let mut h_cache: HashMap<&str, usize> = HashMap::new();
    let mut out = Vec::with_capacity(DECAY_CLASSES.len());
    for class in DECAY_CLASSES {
        let mut entry = CollaboratorRetention {
            class,
            decaying: 0,
            no_coauthor: 0,
            collaborator_lost: 0,
            collaborator_lost_fraction: None,
        };
        for (c, peak) in decaying_members(run, class) {
            entry.decaying += 1;
            let author = c.author_id.as_str();
            let Some(start) = corpus.first_year(author) else {
                continue;
            };
            let peak_year = start + buffer + peak as i32 - 1;
            let papers = corpus.author_papers(author).unwrap_or(&[]);

            let mut best: Option<(&str, usize)> = None;
            for &p in papers {
                let paper = &corpus.papers()[p];
                if paper.year > peak_year {
                    break;
                }
                for co in paper.author_ids.iter().map(String::as_str).filter(|&a| a != author) {
                    let h = *h_cache
                        .entry(co)
                        .or_insert_with(|| author_h_index(corpus, co, end, mode));
                    best = match best {
                        Some((b, bh)) if bh > h || (bh == h && b <= co) => Some((b, bh)),
                        _ => Some((co, h)),
                    };
                }
            }
            let Some((top, _)) = best else {
                entry.no_coauthor += 1;
                continue;
            };
            let retained = papers.iter().any(|&p| {
                let paper = &corpus.papers()[p];
                paper.year > peak_year && paper.author_ids.iter().any(|a| a == top)
            });
            if !retained {
                entry.collaborator_lost += 1;
            }
        }
        entry.collaborator_lost_fraction = ratio(entry.collaborator_lost, entry.decaying - entry.no_coauthor);
        out.push(entry);
    }
    Ok(out)
}

pub fn decay_report(corpus: &Corpus, run: &ClassificationRun, config: &StatsConfig) -> Result<DecayReport> {
    let pubs = decay_attribution(corpus, run, config)?;
    let collab = collaborator_retention(corpus, run, config)?;
    let entries = pubs
        .into_iter()
        .zip(collab)
        .map(|(p, c)| DecayEntry {
            class: p.class,
            decaying: p.decaying,
            publication_driven_fraction: p.publication_driven_fraction,
            collaborator_lost_fraction: c.collaborator_lost_fraction,
            no_coauthor: c.no_coauthor,
        })
        .collect();
    Ok(DecayReport { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub profiles: Vec<ClassProfile>,
    pub migration: MigrationReport,
    pub decay: DecayReport,
}

/// Every characterization at once, from a single all-mode classification
/// plus the exclude-self rerun needed for migration.
pub fn compute_stats(corpus: &Corpus, config: &StatsConfig) -> Result<StatsReport> {
    let run = classify_corpus(corpus, &config.classify);
    let mode = config.classify.citation_mode;
    let profiles = class_profiles(corpus, &run, mode);
    let migration = self_citation_migration(corpus, &config.classify);
    let decay = decay_report(corpus, &run, config)?;
    Ok(StatsReport {
        profiles,
        migration,
        decay,
    })
}

pub const PROFILE_CSV_HEADER: &str =
    "class,count,share,mean_h_index,journal_fraction,conference_fraction,mean_papers_per_year";

pub fn write_profiles_csv<W: Write>(mut out: W, profiles: &[ClassProfile]) -> Result<()> {
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    writeln!(out, "{PROFILE_CSV_HEADER}")?;
    for p in profiles {
        writeln!(
            out,
            "{},{},{:.6},{},{},{},{}",
            p.class,
            p.count,
            p.share,
            cell(p.mean_h_index),
            cell(p.journal_fraction),
            cell(p.conference_fraction),
            cell(p.mean_papers_per_year)
        )?;
    }
    Ok(())
}
