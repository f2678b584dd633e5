mod common;

use proptest::prelude::*;
use trajmine::corpus::{load_corpus, CitationMode, Corpus, IngestOptions, PaperRecord, VenueKind};
use trajmine::learn::{argmax_class, mse, pearson, Scaler};
use trajmine::series::{moving_average, normalize_max, raw_success, AuthorTimeline, MaMode, SeriesConfig};
use trajmine::stats::h_index;
use trajmine::trajectory::{classify, detect_peaks, ClassifyConfig, PeakParams, TrajectoryClass, TIE};

use common::{reference_centered_ma, reference_h_index, reference_peaks};

fn grid_series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u8..6, 1..45).prop_map(|raw| {
        let max = f64::from(*raw.iter().max().unwrap());
        raw.iter()
            .map(|&v| if max == 0.0 { 0.0 } else { f64::from(v) / max })
            .collect()
    })
}

fn timeline() -> impl Strategy<Value = AuthorTimeline> {
    (4usize..25).prop_flat_map(|len| {
        (
            prop::collection::vec(0u32..5, len),
            prop::collection::vec(0u64..40, len),
        )
            .prop_map(|(mut papers, cites)| {
                papers[0] = papers[0].max(1);
                AuthorTimeline {
                    author_id: "a".into(),
                    start_year: 2000,
                    papers_per_year: papers,
                    new_citations_per_year: cites,
                }
            })
    })
}

/// Small random corpora: each paper has 1-3 authors from a pool of five and
/// cites a few earlier papers (sometimes an unknown id).
fn corpus_records() -> impl Strategy<Value = Vec<PaperRecord>> {
    prop::collection::vec(
        (
            0i32..12,
            prop::collection::btree_set(0usize..5, 1..4),
            prop::collection::vec(0usize..40, 0..4),
            0u8..3,
        ),
        1..40,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (dy, authors, refs, venue))| PaperRecord {
                id: format!("p{i:03}"),
                year: 2000 + dy,
                venue_kind: [VenueKind::Journal, VenueKind::Conference, VenueKind::Other][venue as usize],
                author_ids: authors.into_iter().map(|a| format!("u{a}")).collect(),
                reference_ids: refs
                    .into_iter()
                    .filter(|&r| r != i)
                    .map(|r| format!("p{r:03}"))
                    .collect(),
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn peaks_match_brute_force(values in grid_series()) {
        let params = PeakParams::default();
        let got: Vec<(usize, f64)> = detect_peaks(&values, &params)
            .unwrap()
            .into_iter()
            .map(|p| (p.logical_year, p.height))
            .collect();
        prop_assert_eq!(got, reference_peaks(&values, 0.75, 2, TIE));
    }

    #[test]
    fn peaks_are_separated_and_tall(values in grid_series()) {
        let peaks = detect_peaks(&values, &PeakParams::default()).unwrap();
        let top = values.iter().copied().fold(0.0, f64::max);
        for w in peaks.windows(2) {
            prop_assert!(w[1].logical_year - w[0].logical_year > 2);
        }
        for p in &peaks {
            prop_assert!(p.height >= 0.75 * top - TIE);
        }
    }

    #[test]
    fn h_index_matches_sort_and_scan(counts in prop::collection::vec(0usize..60, 0..80)) {
        let h = h_index(&counts);
        prop_assert_eq!(h, reference_h_index(&counts));
        prop_assert!(h <= counts.len());
    }

    #[test]
    fn moving_average_matches_prefix_sums(values in prop::collection::vec(0.0f64..100.0, 1..40), half in 0usize..4) {
        let w = 2 * half + 1;
        let got = moving_average(&values, w, MaMode::Centered).unwrap();
        let want = reference_centered_ma(&values, w);
        for (g, r) in got.iter().zip(&want) {
            prop_assert!((g - r).abs() <= 1e-9 * r.abs().max(1.0));
        }
        // window one is the identity
        prop_assert_eq!(moving_average(&values, 1, MaMode::Centered).unwrap(), values);
    }

    #[test]
    fn normalized_values_lie_in_unit_interval(values in prop::collection::vec(0.0f64..1e6, 1..40)) {
        let n = normalize_max(&values).unwrap();
        prop_assert!(n.iter().all(|v| (0.0..=1.0).contains(v)));
        let any_positive = values.iter().any(|&v| v > 0.0);
        prop_assert_eq!(n.contains(&1.0), any_positive);
    }

    #[test]
    fn raw_success_is_cumulative_ratio(t in timeline()) {
        let raw = raw_success(&t, 3).unwrap();
        prop_assert_eq!(raw.len(), t.len() - 3);
        for (k, r) in raw.iter().enumerate() {
            let y = k + 3;
            let p: u64 = t.papers_per_year[..=y].iter().map(|&v| u64::from(v)).sum();
            let c: u64 = t.new_citations_per_year[..=y].iter().sum();
            prop_assert_eq!(*r, c as f64 / p as f64);
        }
    }

    #[test]
    fn class_and_peaks_survive_citation_scaling(t in timeline(), k in 2u64..20) {
        let config = ClassifyConfig { min_span: 4, ..Default::default() };
        let base = trajmine::build_series(&t, &config.series).unwrap();
        let scaled_t = t.scale_citations(k);
        let scaled = trajmine::build_series(&scaled_t, &config.series).unwrap();
        let a = classify(&t, &base, &config).unwrap();
        let b = classify(&scaled_t, &scaled, &config).unwrap();
        // the activity gate looks at absolute counts, so only compare authors
        // that pass it both times
        prop_assume!(a.reason != trajmine::trajectory::Reason::OtLowActivity);
        prop_assume!(b.reason != trajmine::trajectory::Reason::OtLowActivity);
        let years = |c: &trajmine::trajectory::ClassifiedAuthor| c.peaks.iter().map(|p| p.logical_year).collect::<Vec<_>>();
        prop_assert_eq!(a.class, b.class);
        prop_assert_eq!(years(&a), years(&b));
    }

    #[test]
    fn corpus_round_trips_through_jsonl(records in corpus_records()) {
        let (corpus, _) = Corpus::from_records(records, IngestOptions::default()).unwrap();
        let mut buf = Vec::new();
        corpus.write_jsonl(&mut buf).unwrap();
        let (again, report) = load_corpus(buf.as_slice(), IngestOptions::default()).unwrap();
        prop_assert_eq!(again.papers(), corpus.papers());
        prop_assert_eq!(report.dangling, 0);
        prop_assert_eq!(again.edge_count(), corpus.edge_count());
        for a in corpus.authors() {
            prop_assert_eq!(
                again.author_timeline(a, CitationMode::All).unwrap(),
                corpus.author_timeline(a, CitationMode::All).unwrap()
            );
        }
    }

    #[test]
    fn excluding_self_citations_never_adds(records in corpus_records()) {
        let (corpus, _) = Corpus::from_records(records, IngestOptions::default()).unwrap();
        for a in corpus.authors() {
            let all = corpus.author_timeline(a, CitationMode::All).unwrap().cumulative();
            let ex = corpus.author_timeline(a, CitationMode::ExcludeSelf).unwrap().cumulative();
            prop_assert_eq!(&all.cum_papers, &ex.cum_papers);
            for (x, y) in ex.cum_citations.iter().zip(&all.cum_citations) {
                prop_assert!(x <= y);
            }
        }
    }

    #[test]
    fn argmax_ignores_monotone_transforms(margins in prop::collection::vec(-5.0f64..5.0, 6), scale in 0.1f64..10.0, shift in -3.0f64..3.0) {
        let labelled: Vec<(TrajectoryClass, f64)> = TrajectoryClass::ALL.iter().copied().zip(margins.iter().copied()).collect();
        let moved: Vec<(TrajectoryClass, f64)> = labelled.iter().map(|&(c, m)| (c, (scale * m + shift).exp())).collect();
        prop_assert_eq!(argmax_class(&labelled), argmax_class(&moved));
    }

    #[test]
    fn standardization_ignores_shifts(rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 2..20), shift in prop::collection::vec(-100.0f64..100.0, 3)) {
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&shift).map(|(v, s)| v + s).collect()).collect();
        let a = Scaler::fit(&rows.iter().map(Vec::as_slice).collect::<Vec<_>>());
        let b = Scaler::fit(&shifted.iter().map(Vec::as_slice).collect::<Vec<_>>());
        for (r, s) in rows.iter().zip(&shifted) {
            for (x, y) in a.transform(r).iter().zip(b.transform(s)) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn metric_ranges(pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..50)) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert!(mse(&p, &t).unwrap() >= 0.0);
        if let Some(r) = pearson(&p, &t).unwrap() {
            prop_assert!((-1.0..=1.0).contains(&r));
        }
    }
}

#[test]
fn series_hand_examples() {
    let t = AuthorTimeline {
        author_id: "a".into(),
        start_year: 2000,
        papers_per_year: vec![1, 1, 1, 1],
        new_citations_per_year: vec![0, 2, 4, 6],
    };
    assert_eq!(raw_success(&t, 3).unwrap(), vec![3.0]);
    assert_eq!(normalize_max(&[2.0, 4.0, 8.0]).unwrap(), vec![0.25, 0.5, 1.0]);
    assert_eq!(normalize_max(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    let s = trajmine::build_series(
        &AuthorTimeline {
            new_citations_per_year: vec![0; 4],
            ..t
        },
        &SeriesConfig::default(),
    )
    .unwrap();
    assert_eq!(s.normalized, vec![0.0]);
}
