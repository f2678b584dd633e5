//! Bibliographic records, author and citation indices.
//!
//! A corpus is read from JSON lines, one paper per line:
//!
//! ```text
//! {"id":"p1","year":2001,"venue_kind":"journal","authors":["a"],"references":["p0"]}
//! ```
//!
//! `venue_kind` defaults to `other` and `references` to an empty list.
//! Unknown fields are ignored. Once loaded a [`Corpus`] is immutable.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::AuthorTimeline;

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VenueKind {
    Journal,
    Conference,
    #[default]
    Other,
}

/// Which received citations count towards an author's totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CitationMode {
    #[default]
    All,
    ExcludeSelf,
}

impl std::str::FromStr for CitationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(CitationMode::All),
            "exclude_self" => Ok(CitationMode::ExcludeSelf),
            other => Err(Error::arg(format!("unknown citation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: String,
    pub year: i32,
    #[serde(default)]
    pub venue_kind: VenueKind,
    #[serde(rename = "authors")]
    pub author_ids: Vec<String>,
    #[serde(rename = "references", default)]
    pub reference_ids: Vec<String>,
}

impl PaperRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.author_ids.is_empty() {
            return Err(format!("paper `{}` has no authors", self.id));
        }
        let mut seen = HashSet::with_capacity(self.author_ids.len());
        for a in &self.author_ids {
            if !seen.insert(a.as_str()) {
                return Err(format!("paper `{}` lists author `{a}` twice", self.id));
            }
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(format!(
                "paper `{}` has year {} outside {MIN_YEAR}..={MAX_YEAR}",
                self.id, self.year
            ));
        }
        Ok(())
    }
}

/// True iff the two papers share at least one author.
pub fn is_self_citation(citing: &PaperRecord, cited: &PaperRecord) -> bool {
    citing
        .author_ids
        .iter()
        .any(|a| cited.author_ids.iter().any(|b| a == b))
}

/// A retained reference, stored under the cited paper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CitationEdge {
    /// Index of the citing paper in [`Corpus::papers`].
    pub citing: usize,
    /// Publication year of the citing paper.
    pub year: i32,
    pub is_self: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Treat a repeated paper id as a fatal error instead of skipping it.
    pub fail_on_duplicate: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records_read: usize,
    pub papers: usize,
    pub authors: usize,
    pub duplicate_ids: usize,
    pub duplicate_references: usize,
    pub dangling: usize,
    pub self_loops: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    papers: Vec<PaperRecord>,
    by_id: HashMap<String, usize>,
    author_index: BTreeMap<String, Vec<usize>>,
    citation_index: Vec<Vec<CitationEdge>>,
    end_year: Option<i32>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    year: i64,
    #[serde(default)]
    venue_kind: VenueKind,
    authors: Vec<String>,
    #[serde(default)]
    references: Vec<String>,
}

/// Parse JSON-lines input and build a corpus. Blank lines are skipped.
pub fn load_corpus<R: BufRead>(reader: R, options: IngestOptions) -> Result<(Corpus, IngestReport)> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let year = i32::try_from(raw.year).map_err(|_| Error::Malformed {
            line: line_no,
            message: format!("year {} out of range", raw.year),
        })?;
        let record = PaperRecord {
            id: raw.id,
            year,
            venue_kind: raw.venue_kind,
            author_ids: raw.authors,
            reference_ids: raw.references,
        };
        record
            .validate()
            .map_err(|message| Error::Malformed { line: line_no, message })?;
        records.push(record);
    }
    Corpus::from_records(records, options)
}

impl Corpus {
    /// Build a corpus from already-parsed records.
    ///
    /// Repeated references inside one record are collapsed, references to
    /// unknown ids and to the paper itself are dropped. All of these are
    /// counted in the returned report.
    pub fn from_records(records: Vec<PaperRecord>, options: IngestOptions) -> Result<(Corpus, IngestReport)> {
        let mut report = IngestReport {
            records_read: records.len(),
            ..Default::default()
        };
        let mut corpus = Corpus::default();
        for (i, mut rec) in records.into_iter().enumerate() {
            rec.validate()
                .map_err(|message| Error::Malformed { line: i + 1, message })?;
            if corpus.by_id.contains_key(&rec.id) {
                if options.fail_on_duplicate {
                    return Err(Error::DuplicateId(rec.id));
                }
                report.duplicate_ids += 1;
                continue;
            }
            let mut seen = HashSet::with_capacity(rec.reference_ids.len());
            let before = rec.reference_ids.len();
            rec.reference_ids.retain(|r| seen.insert(r.clone()));
            report.duplicate_references += before - rec.reference_ids.len();
            corpus.by_id.insert(rec.id.clone(), corpus.papers.len());
            corpus.papers.push(rec);
        }

        let mut citation_index = vec![Vec::new(); corpus.papers.len()];
        for (citing_idx, paper) in corpus.papers.iter_mut().enumerate() {
            let citing_id = paper.id.clone();
            let mut kept = Vec::with_capacity(paper.reference_ids.len());
            for r in paper.reference_ids.drain(..) {
                if r == citing_id {
                    report.self_loops += 1;
                } else if let Some(&cited_idx) = corpus.by_id.get(&r) {
                    citation_index[cited_idx].push(citing_idx);
                    kept.push(r);
                } else {
                    report.dangling += 1;
                }
            }
            paper.reference_ids = kept;
        }

        corpus.citation_index = citation_index
            .into_iter()
            .enumerate()
            .map(|(cited_idx, citers)| {
                let cited = &corpus.papers[cited_idx];
                let mut edges: Vec<CitationEdge> = citers
                    .into_iter()
                    .map(|c| {
                        let citing = &corpus.papers[c];
                        CitationEdge {
                            citing: c,
                            year: citing.year,
                            is_self: is_self_citation(citing, cited),
                        }
                    })
                    .collect();
                edges.sort_by(|a, b| {
                    a.year
                        .cmp(&b.year)
                        .then_with(|| corpus.papers[a.citing].id.cmp(&corpus.papers[b.citing].id))
                });
                edges
            })
            .collect();

        for (idx, paper) in corpus.papers.iter().enumerate() {
            for a in &paper.author_ids {
                corpus.author_index.entry(a.clone()).or_default().push(idx);
            }
        }
        let papers = &corpus.papers;
        for list in corpus.author_index.values_mut() {
            list.sort_by(|&a, &b| {
                papers[a]
                    .year
                    .cmp(&papers[b].year)
                    .then_with(|| papers[a].id.cmp(&papers[b].id))
            });
        }
        corpus.end_year = corpus.papers.iter().map(|p| p.year).max();

        report.papers = corpus.papers.len();
        report.authors = corpus.author_index.len();
        report.edges = corpus.citation_index.iter().map(Vec::len).sum();
        Ok((corpus, report))
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn paper(&self, id: &str) -> Option<&PaperRecord> {
        self.by_id.get(id).map(|&i| &self.papers[i])
    }

    pub fn paper_index(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn end_year(&self) -> Option<i32> {
        self.end_year
    }

    /// All author ids in ascending order.
    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.author_index.keys().map(String::as_str)
    }

    pub fn has_author(&self, author_id: &str) -> bool {
        self.author_index.contains_key(author_id)
    }

    /// Paper indices of an author, ordered by year then id.
    pub fn author_papers(&self, author_id: &str) -> Option<&[usize]> {
        self.author_index.get(author_id).map(Vec::as_slice)
    }

    /// Incoming edges of a paper, ordered by citing year then citing id.
    pub fn citations_of(&self, paper_idx: usize) -> &[CitationEdge] {
        &self.citation_index[paper_idx]
    }

    /// Citing papers of `id` as `(citing id, citing year)` pairs.
    pub fn citing_papers(&self, id: &str) -> Vec<(&str, i32)> {
        self.by_id
            .get(id)
            .map(|&i| {
                self.citation_index[i]
                    .iter()
                    .map(|e| (self.papers[e.citing].id.as_str(), e.year))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn edge_count(&self) -> usize {
        self.citation_index.iter().map(Vec::len).sum()
    }

    /// Calendar year of the author's first paper.
    pub fn first_year(&self, author_id: &str) -> Option<i32> {
        self.author_index
            .get(author_id)
            .and_then(|ps| ps.first())
            .map(|&i| self.papers[i].year)
    }

    /// Years from the author's first paper to the corpus end year, inclusive.
    pub fn observation_span(&self, author_id: &str) -> Option<usize> {
        let first = self.first_year(author_id)?;
        let end = self.end_year?;
        Some((end - first + 1) as usize)
    }

    /// Number of citations a paper has received from papers dated `<= cutoff`.
    pub(crate) fn citations_until(&self, paper_idx: usize, cutoff: i32, mode: CitationMode) -> usize {
        let edges = &self.citation_index[paper_idx];
        let upto = edges.partition_point(|e| e.year <= cutoff);
        match mode {
            CitationMode::All => upto,
            CitationMode::ExcludeSelf => edges[..upto].iter().filter(|e| !e.is_self).count(),
        }
    }

    /// Per-paper citation counts for an author's papers published `<= cutoff`,
    /// counting only citing papers dated `<= cutoff`.
    pub fn paper_citation_counts(&self, author_id: &str, cutoff: i32, mode: CitationMode) -> Vec<usize> {
        self.author_papers(author_id)
            .unwrap_or(&[])
            .iter()
            .filter(|&&p| self.papers[p].year <= cutoff)
            .map(|&p| self.citations_until(p, cutoff, mode))
            .collect()
    }

    /// Write the corpus back out as JSON lines, in load order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for p in &self.papers {
            serde_json::to_writer(&mut out, p)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Yearly publication and newly-received citation counts over career
    /// years `1..=L`, where `L` runs from the first paper to the corpus end.
    ///
    /// A citation is attributed to its citing paper's year; years before the
    /// author's first paper are clamped into career year 1.
    pub fn author_timeline(&self, author_id: &str, mode: CitationMode) -> Result<AuthorTimeline> {
        let papers = self
            .author_index
            .get(author_id)
            .ok_or_else(|| Error::UnknownAuthor(author_id.to_string()))?;
        let start = self.papers[papers[0]].year;
        let end = self.end_year.unwrap_or(start);
        let len = (end - start + 1) as usize;
        let mut papers_per_year = vec![0u32; len];
        let mut new_citations_per_year = vec![0u64; len];
        for &p in papers {
            papers_per_year[(self.papers[p].year - start) as usize] += 1;
            for e in &self.citation_index[p] {
                if mode == CitationMode::ExcludeSelf && e.is_self {
                    continue;
                }
                let slot = (e.year - start).max(0) as usize;
                new_citations_per_year[slot] += 1;
            }
        }
        Ok(AuthorTimeline {
            author_id: author_id.to_string(),
            start_year: start,
            papers_per_year,
            new_citations_per_year,
        })
    }

    /// Authors observed for at least `min_span` years, sorted by id.
    pub fn eligible_authors(&self, min_span: usize) -> Vec<String> {
        let Some(end) = self.end_year else {
            return Vec::new();
        };
        self.author_index
            .iter()
            .filter(|(_, ps)| {
                let first = self.papers[ps[0]].year;
                (end - first + 1) as usize >= min_span
            })
            .map(|(a, _)| a.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, year: i32, authors: &[&str], refs: &[&str]) -> PaperRecord {
        PaperRecord {
            id: id.into(),
            year,
            venue_kind: VenueKind::Other,
            author_ids: authors.iter().map(|s| s.to_string()).collect(),
            reference_ids: refs.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn build(records: Vec<PaperRecord>) -> (Corpus, IngestReport) {
        Corpus::from_records(records, IngestOptions::default()).unwrap()
    }

    #[test]
    fn single_edge() {
        let (c, r) = build(vec![rec("A", 2000, &["x"], &[]), rec("B", 2003, &["y"], &["A"])]);
        assert_eq!(c.citing_papers("A"), vec![("B", 2003)]);
        assert_eq!(r.edges, 1);
    }

    #[test]
    fn dangling_reference_dropped() {
        let (c, r) = build(vec![rec("A", 2000, &["x"], &["X"])]);
        assert_eq!(r.dangling, 1);
        assert_eq!(c.edge_count(), 0);
        assert!(c.paper("A").unwrap().reference_ids.is_empty());
    }

    #[test]
    fn chain_with_self_loop() {
        let (c, r) = build(vec![
            rec("A", 2000, &["x"], &[]),
            rec("B", 2001, &["y"], &["A"]),
            rec("C", 2002, &["z"], &["B", "C"]),
        ]);
        assert_eq!(r.edges, 2);
        assert_eq!(r.self_loops, 1);
        assert_eq!(c.citing_papers("A"), vec![("B", 2001)]);
        assert_eq!(c.citing_papers("B"), vec![("C", 2002)]);
        assert!(c.citing_papers("C").is_empty());
    }

    #[test]
    fn duplicate_ids_are_counted_not_fatal() {
        let (c, r) = build(vec![rec("A", 2000, &["x"], &[]), rec("A", 2001, &["y"], &[])]);
        assert_eq!(r.duplicate_ids, 1);
        assert_eq!(c.papers().len(), 1);
        assert_eq!(c.paper("A").unwrap().year, 2000);

        let err = Corpus::from_records(
            vec![rec("A", 2000, &["x"], &[]), rec("A", 2001, &["y"], &[])],
            IngestOptions {
                fail_on_duplicate: true,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn repeated_reference_counts_once() {
        let (c, r) = build(vec![rec("A", 2000, &["x"], &[]), rec("B", 2001, &["y"], &["A", "A"])]);
        assert_eq!(r.duplicate_references, 1);
        assert_eq!(c.citations_of(c.paper_index("A").unwrap()).len(), 1);
    }

    #[test]
    fn citation_index_sorted_by_year_then_id() {
        let (c, _) = build(vec![
            rec("A", 2000, &["x"], &[]),
            rec("D", 2002, &["y"], &["A"]),
            rec("C", 2002, &["y"], &["A"]),
            rec("B", 2001, &["y"], &["A"]),
        ]);
        assert_eq!(c.citing_papers("A"), vec![("B", 2001), ("C", 2002), ("D", 2002)]);
    }

    #[test]
    fn self_citation_predicate() {
        let p = |a: &[&str]| rec("p", 2000, a, &[]);
        assert!(is_self_citation(&p(&["a", "b"]), &p(&["b", "c"])));
        assert!(!is_self_citation(&p(&["a"]), &p(&["b", "c"])));
        assert!(is_self_citation(&p(&["a"]), &p(&["a"])));
    }

    #[test]
    fn timeline_counts() {
        let (c, _) = build(vec![
            rec("P1", 2000, &["a"], &[]),
            rec("P2", 2001, &["a"], &[]),
            rec("Q", 2001, &["b"], &["P1"]),
        ]);
        let t = c.author_timeline("a", CitationMode::All).unwrap();
        assert_eq!(t.papers_per_year, vec![1, 1]);
        assert_eq!(t.new_citations_per_year, vec![0, 1]);
    }

    #[test]
    fn timeline_without_citations_and_exclude_self() {
        let (c, _) = build(vec![rec("P1", 2000, &["a"], &[]), rec("P2", 2001, &["a"], &["P1"])]);
        let all = c.author_timeline("a", CitationMode::All).unwrap();
        assert_eq!(all.new_citations_per_year, vec![0, 1]);
        let excl = c.author_timeline("a", CitationMode::ExcludeSelf).unwrap();
        assert_eq!(excl.new_citations_per_year, vec![0, 0]);

        let (c, _) = build(vec![rec("P1", 2000, &["a"], &[]), rec("P2", 2003, &["a"], &[])]);
        let t = c.author_timeline("a", CitationMode::All).unwrap();
        assert!(t.new_citations_per_year.iter().all(|&x| x == 0));
        assert_eq!(t.papers_per_year, vec![1, 0, 0, 1]);
    }

    #[test]
    fn early_citations_clamp_to_first_career_year() {
        // b's 1998 paper cites a's paper? impossible in time, but dirty data happens
        let (c, _) = build(vec![
            rec("P1", 2000, &["a"], &[]),
            rec("Q", 1998, &["b"], &["P1"]),
            rec("R", 2002, &["b"], &[]),
        ]);
        let t = c.author_timeline("a", CitationMode::All).unwrap();
        assert_eq!(t.new_citations_per_year, vec![1, 0, 0]);
    }

    #[test]
    fn unknown_author() {
        let (c, _) = build(vec![rec("P1", 2000, &["a"], &[])]);
        assert!(matches!(
            c.author_timeline("zz", CitationMode::All),
            Err(Error::UnknownAuthor(_))
        ));
    }

    #[test]
    fn eligibility_span() {
        let (c, _) = build(vec![
            rec("P1", 2000, &["a"], &[]),
            rec("P2", 2005, &["b"], &[]),
            rec("P3", 2009, &["b"], &[]),
        ]);
        assert_eq!(c.eligible_authors(10), vec!["a".to_string()]);
        assert_eq!(c.observation_span("b"), Some(5));
        assert!(Corpus::default().eligible_authors(10).is_empty());
    }

    #[test]
    fn parse_defaults_and_errors() {
        let input = r#"{"id":"A","year":2000,"authors":["x"],"extra":1}

{"id":"B","year":2001,"venue_kind":"journal","authors":["y"],"references":["A"]}
"#;
        let (c, r) = load_corpus(input.as_bytes(), IngestOptions::default()).unwrap();
        assert_eq!(r.records_read, 2);
        assert_eq!(c.paper("A").unwrap().venue_kind, VenueKind::Other);
        assert_eq!(c.paper("B").unwrap().venue_kind, VenueKind::Journal);

        let bad = "{\"id\":\"A\",\"year\":2000,\"authors\":[\"x\"]}\n{\"id\":\"B\",\"year\":\"x\"}\n";
        match load_corpus(bad.as_bytes(), IngestOptions::default()) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed, got {other:?}"),
        }
        let no_authors = "{\"id\":\"A\",\"year\":2000,\"authors\":[]}\n";
        assert!(matches!(
            load_corpus(no_authors.as_bytes(), IngestOptions::default()),
            Err(Error::Malformed { line: 1, .. })
        ));
        let dup_author = "{\"id\":\"A\",\"year\":2000,\"authors\":[\"x\",\"x\"]}\n";
        assert!(load_corpus(dup_author.as_bytes(), IngestOptions::default()).is_err());
        let bad_year = "{\"id\":\"A\",\"year\":1800,\"authors\":[\"x\"]}\n";
        assert!(load_corpus(bad_year.as_bytes(), IngestOptions::default()).is_err());
        let bad_venue = "{\"id\":\"A\",\"year\":2000,\"venue_kind\":\"book\",\"authors\":[\"x\"]}\n";
        assert!(load_corpus(bad_venue.as_bytes(), IngestOptions::default()).is_err());
    }
}
