//! Synthetic corpora with known trajectory labels.
//!
//! Every author starts in the same calendar year and is observed for
//! `career_length` years. A success template `R(c)` per class fixes the
//! cumulative citation curve `C(c) = round(R(c) * P(c))`; the publication
//! schedule `P` is raised wherever a falling `R` would otherwise force `C`
//! to shrink. Citations are realized as references from papers of other
//! authors published in the same year, and self-citations as references
//! from the author's own papers of that year. Only single-author papers
//! are cited, so each author's citation curve is exactly the planned one.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, IngestOptions, IngestReport, PaperRecord, VenueKind, MAX_YEAR, MIN_YEAR};
use crate::error::{Error, Result};
use crate::trajectory::TrajectoryClass;

/// Share of paper slots (after an author's first paper) offered for joint work.
const JOINT_PROB: f64 = 0.3;
/// Range of the template scale, in citations per paper.
const SCALE_RANGE: (f64, f64) = (5.0, 12.0);
/// Career years before the series starts.
const BUFFER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_authors: usize,
    pub class_mix: BTreeMap<TrajectoryClass, f64>,
    pub career_length: usize,
    pub noise_sigma: f64,
    pub self_citation_rate: f64,
    /// Collaborators drawn per author.
    pub coauthor_pool: usize,
    pub seed: u64,
    pub start_year: i32,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_authors: 600,
            class_mix: TrajectoryClass::ALL.iter().map(|&c| (c, 1.0)).collect(),
            career_length: 15,
            noise_sigma: 0.0,
            self_citation_rate: 0.1,
            coauthor_pool: 3,
            seed: 0,
            start_year: 2000,
        }
    }
}

/// Shortest career that keeps the class template recoverable.
pub fn min_career_length(class: TrajectoryClass) -> usize {
    match class {
        TrajectoryClass::FR => 15,
        TrajectoryClass::LR => 13,
        _ => 10,
    }
}

impl SynthSpec {
    pub fn only(class: TrajectoryClass) -> BTreeMap<TrajectoryClass, f64> {
        BTreeMap::from([(class, 1.0)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_authors == 0 {
            return Err(Error::arg("synthetic corpus needs at least one author"));
        }
        if self.class_mix.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::arg("class weights must be finite and non-negative"));
        }
        if self.class_mix.values().all(|&w| w == 0.0) {
            return Err(Error::arg("class weights are all zero"));
        }
        if self.career_length < 10 {
            return Err(Error::arg(format!(
                "career length {} is below 10 years",
                self.career_length
            )));
        }
        for (&class, &w) in &self.class_mix {
            if w > 0.0 && self.career_length < min_career_length(class) {
                return Err(Error::arg(format!(
                    "class {class} needs a career length of at least {} years, got {}",
                    min_career_length(class),
                    self.career_length
                )));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::arg(format!(
                "noise sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.self_citation_rate) {
            return Err(Error::arg(format!(
                "self-citation rate must lie in [0, 1], got {}",
                self.self_citation_rate
            )));
        }
        let last = self.start_year as i64 + self.career_length as i64 - 1;
        if self.start_year < MIN_YEAR || last > MAX_YEAR as i64 {
            return Err(Error::arg(format!(
                "years {}..={last} fall outside {MIN_YEAR}..={MAX_YEAR}",
                self.start_year
            )));
        }
        Ok(())
    }
}

/// `target = slope * x + intercept`, where `x` is the cumulative citation
/// count at the end of career year 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetMap {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub maps: BTreeMap<TrajectoryClass, TargetMap>,
    /// Career year whose success value follows the map.
    pub horizon: usize,
    /// Range of `x`, drawn uniformly and shared by all classes.
    pub x_min: u64,
    pub x_max: u64,
}

impl TargetSpec {
    pub fn new(maps: BTreeMap<TrajectoryClass, TargetMap>) -> TargetSpec {
        TargetSpec {
            maps,
            horizon: 10,
            x_min: 8,
            x_max: 24,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    pub corpus: Corpus,
    pub report: IngestReport,
    /// Intended class of every author in the corpus.
    pub labels: BTreeMap<String, TrajectoryClass>,
    /// Success at the target horizon, for stratified corpora.
    pub targets: Option<BTreeMap<String, f64>>,
}

pub const LABELS_CSV_HEADER: &str = "author_id,class";
pub const TARGETS_CSV_HEADER: &str = "author_id,target";

impl LabeledCorpus {
    pub fn write_labels_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{LABELS_CSV_HEADER}")?;
        for (a, c) in &self.labels {
            writeln!(out, "{a},{c}")?;
        }
        Ok(())
    }

    pub fn write_targets_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{TARGETS_CSV_HEADER}")?;
        for (a, t) in self.targets.iter().flatten() {
            writeln!(out, "{a},{t:.6}")?;
        }
        Ok(())
    }
}

/// Template over logical years `1..=n`, peak value 1.
pub fn template(class: TrajectoryClass, n: usize) -> Vec<f64> {
    use TrajectoryClass::*;
    let decay = |k: f64| 0.45 + 0.55 * (-k / 2.5).exp();
    let bump = |x: f64| (-x * x / (2.0 * 1.2 * 1.2)).exp();
    let span = (n - 1).max(1) as f64;
    (1..=n)
        .map(|l| {
            let lf = l as f64;
            match class {
                SR => 0.25 + 0.75 * (lf - 1.0) / span,
                SD => 1.0 - 0.55 * (lf - 1.0) / span,
                ER => match l {
                    1 => 0.2,
                    2 => 0.6,
                    _ => decay(lf - 3.0),
                },
                LR => {
                    if l <= 7 {
                        0.3 + 0.7 * (lf - 1.0) / 6.0
                    } else {
                        decay(lf - 7.0)
                    }
                }
                FR => {
                    let second = (n.saturating_sub(3)).max(9) as f64;
                    0.45 + 0.55 * bump(lf - 3.0).max(0.95 * bump(lf - second))
                }
                OT => 0.0,
            }
        })
        .collect()
}

struct Plan {
    class: TrajectoryClass,
    papers: Vec<u32>,
    /// Of `papers`, slots offered for joint work.
    joint: Vec<u32>,
    cites: Vec<u64>,
    journal_prob: f64,
    target: Option<f64>,
}

/// Share of the career-year-3 citation total reached by the end of each
/// buffer year.
fn early_timing(class: TrajectoryClass) -> [f64; BUFFER] {
    use TrajectoryClass::*;
    match class {
        ER | SD => [0.5, 0.8, 1.0],
        FR => [0.3, 0.65, 1.0],
        SR | LR | OT => [0.1, 0.4, 1.0],
    }
}

fn journal_prob(class: TrajectoryClass) -> f64 {
    use TrajectoryClass::*;
    match class {
        SR => 0.8,
        FR => 0.7,
        LR => 0.5,
        ER => 0.2,
        SD => 0.25,
        OT => 0.5,
    }
}

fn plan_author(
    class: TrajectoryClass,
    spec: &SynthSpec,
    target: Option<(&TargetSpec, TargetMap)>,
    rng: &mut ChaCha8Rng,
) -> Plan {
    let len = spec.career_length;
    let mut papers = vec![0u32; len];
    let mut cites = vec![0u64; len];
    let mut realized = None;

    if class == TrajectoryClass::OT {
        // fewer papers and fewer citations than observed years
        papers[0] = 1;
        for _ in 1..rng.random_range(2..=len / 2) {
            papers[rng.random_range(0..len)] += 1;
        }
        for _ in 0..rng.random_range(0..len / 2) {
            cites[rng.random_range(0..len)] += 1;
        }
    } else {
        let shape = template(class, len - BUFFER);
        let (scale, x) = match target {
            Some((ts, map)) => {
                let x = rng.random_range(ts.x_min..=ts.x_max);
                let y = map.slope * x as f64 + map.intercept;
                (y / shape[ts.horizon - BUFFER - 1], Some(x))
            }
            None => (rng.random_range(SCALE_RANGE.0..SCALE_RANGE.1), None),
        };
        let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
        let base = rng.random_range(1..=3u32);
        let mut p_cum = 0u64;
        for p in papers.iter_mut().take(BUFFER) {
            *p = base + rng.random_range(0..=1u32);
            p_cum += *p as u64;
        }
        // buffer citations: class-specific timing of the first C(3) citations
        let c3 = match x {
            Some(x) => x,
            None => (scale * shape[0] * 0.75 * noise.sample(rng).exp() * p_cum as f64).round() as u64,
        };
        let mut c_cum = 0u64;
        for (c, share) in early_timing(class).into_iter().enumerate() {
            let c_new = ((c3 as f64 * share).round() as u64).max(c_cum);
            cites[c] = c_new - c_cum;
            c_cum = c_new;
        }
        for c in BUFFER..len {
            let r = scale * shape[c - BUFFER] * noise.sample(rng).exp();
            let mut p = base + rng.random_range(0..=1u32);
            let needed = (c_cum as f64 / r).ceil() as u64;
            if needed > p_cum + p as u64 {
                p = (needed - p_cum) as u32;
            }
            p_cum += p as u64;
            let c_new = ((r * p_cum as f64).round() as u64).max(c_cum);
            papers[c] = p;
            cites[c] = c_new - c_cum;
            c_cum = c_new;
            if let Some((ts, _)) = target {
                if c + 1 == ts.horizon {
                    realized = Some(c_cum as f64 / p_cum as f64);
                }
            }
        }
    }

    let joint = papers
        .iter()
        .enumerate()
        .map(|(c, &p)| {
            let slots = if c == 0 { p - 1 } else { p };
            Binomial::new(slots as u64, JOINT_PROB).expect("valid").sample(rng) as u32
        })
        .collect();
    Plan {
        class,
        papers,
        joint,
        cites,
        journal_prob: journal_prob(class),
        target: realized,
    }
}

/// Exact per-class counts by largest remainder, in class order.
fn quotas(n: usize, mix: &BTreeMap<TrajectoryClass, f64>) -> Vec<(TrajectoryClass, usize)> {
    let total: f64 = mix.values().sum();
    let mut out: Vec<(TrajectoryClass, usize, f64)> = mix
        .iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(&c, &w)| {
            let exact = n as f64 * w / total;
            (c, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let assigned: usize = out.iter().map(|o| o.1).sum();
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| out[b].2.total_cmp(&out[a].2).then(a.cmp(&b)));
    for &i in order.iter().take(n - assigned) {
        out[i].1 += 1;
    }
    out.into_iter().map(|(c, k, _)| (c, k)).collect()
}

struct Paper {
    year: usize,
    authors: Vec<usize>,
    venue: VenueKind,
    refs: Vec<usize>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn generate(spec: &SynthSpec) -> Result<LabeledCorpus> {
    build(spec, None)
}

/// Like [`generate`], with the success at `targets.horizon` of every author
/// following the map of its class.
pub fn generate_stratified_targets(spec: &SynthSpec, targets: &TargetSpec) -> Result<LabeledCorpus> {
    for (&class, &w) in &spec.class_mix {
        if w > 0.0 && !targets.maps.contains_key(&class) {
            return Err(Error::arg(format!("no target map for class {class}")));
        }
    }
    if spec.class_mix.get(&TrajectoryClass::OT).is_some_and(|&w| w > 0.0) {
        return Err(Error::arg(
            "OT authors cannot carry a target: their counts are pinned below one per year",
        ));
    }
    if targets.horizon <= BUFFER || targets.horizon > spec.career_length {
        return Err(Error::arg(format!(
            "target horizon {} must lie in {}..={}",
            targets.horizon,
            BUFFER + 1,
            spec.career_length
        )));
    }
    if targets.x_min > targets.x_max {
        return Err(Error::arg("empty feature range for targets"));
    }
    for (class, m) in &targets.maps {
        for x in [targets.x_min, targets.x_max] {
            if !(m.slope * x as f64 + m.intercept > 0.0) {
                return Err(Error::arg(format!("target map of {class} is not positive at x = {x}")));
            }
        }
    }
    build(spec, Some(targets))
}

fn build(spec: &SynthSpec, targets: Option<&TargetSpec>) -> Result<LabeledCorpus> {
    spec.validate()?;
    let n = spec.n_authors;
    let len = spec.career_length;
    let mut rng = rng_for(spec.seed, 0);

    let mut classes: Vec<TrajectoryClass> = quotas(n, &spec.class_mix)
        .into_iter()
        .flat_map(|(c, k)| std::iter::repeat_n(c, k))
        .collect();
    classes.shuffle(&mut rng);

    let plans: Vec<Plan> = classes
        .par_iter()
        .enumerate()
        .map(|(i, &class)| {
            let mut arng = rng_for(spec.seed, i as u64 + 1);
            let target = targets.map(|ts| (ts, ts.maps[&class]));
            plan_author(class, spec, target, &mut arng)
        })
        .collect();

    // symmetric collaborator sets
    let mut collab = vec![BTreeSet::new(); n];
    for a in 0..n {
        let k = spec.coauthor_pool.min(n - 1);
        for j in index::sample(&mut rng, n - 1, k) {
            let b = if j >= a { j + 1 } else { j };
            collab[a].insert(b);
            collab[b].insert(a);
        }
    }
    let collab: Vec<Vec<usize>> = collab.into_iter().map(|s| s.into_iter().collect()).collect();

    // papers, year by year
    let mut papers: Vec<Paper> = Vec::new();
    let mut by_year: Vec<Vec<usize>> = vec![Vec::new(); len];
    let mut solo: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut own: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); len]; n];
    for c in 0..len {
        let mut open: Vec<u32> = plans.iter().map(|p| p.joint[c]).collect();
        let mut pairs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for a in 0..n {
            let k = collab[a].len();
            let mut turn = c;
            while open[a] > 0 {
                let partner = (0..k)
                    .map(|s| collab[a][(turn + s) % k])
                    .find(|&b| b != a && open[b] > 0);
                let Some(b) = partner else { break };
                open[a] -= 1;
                open[b] -= 1;
                pairs[a].push(b);
                turn += 1;
            }
        }
        let mut joint_count = vec![0u32; n];
        for a in 0..n {
            for &b in &pairs[a] {
                joint_count[a] += 1;
                joint_count[b] += 1;
            }
        }
        for a in 0..n {
            let plan = &plans[a];
            let mut push = |authors: Vec<usize>, rng: &mut ChaCha8Rng| {
                let venue = if rng.random_bool(plan.journal_prob) {
                    VenueKind::Journal
                } else if rng.random_bool(0.9) {
                    VenueKind::Conference
                } else {
                    VenueKind::Other
                };
                let idx = papers.len();
                for &x in &authors {
                    own[x][c].push(idx);
                }
                if authors.len() == 1 {
                    solo[a].push(idx);
                }
                by_year[c].push(idx);
                papers.push(Paper {
                    year: c,
                    authors,
                    venue,
                    refs: Vec::new(),
                });
            };
            for _ in 0..plan.papers[c] - joint_count[a] {
                push(vec![a], &mut rng);
            }
            for &b in &pairs[a] {
                push(vec![a, b], &mut rng);
            }
        }
    }

    // citations, year by year
    let mut cursor = vec![0usize; n];
    let mut helpers: Vec<(usize, usize)> = Vec::new();
    let binom = |k: u64, rng: &mut ChaCha8Rng| {
        if spec.self_citation_rate > 0.0 && k > 0 {
            Binomial::new(k, spec.self_citation_rate)
                .expect("validated rate")
                .sample(rng)
        } else {
            0
        }
    };
    for c in 0..len {
        let mut demands = Vec::new();
        let mut padding = 0usize;
        for a in 0..n {
            let k = plans[a].cites[c];
            if k == 0 {
                continue;
            }
            let m = solo[a].partition_point(|&p| papers[p].year <= c);
            let own_y = &own[a][c];
            let own_solo = own_y.iter().filter(|&&p| papers[p].authors.len() == 1).count();
            let self_cap = (own_y.len() * m - own_solo) as u64;
            let avail = by_year[c].len() - own_y.len();
            let mut ks = binom(k, &mut rng).min(self_cap);
            // small corpora: overflow goes to own papers before padding
            let ext_cap = (avail * m) as u64;
            if k - ks > ext_cap {
                ks = (k - ext_cap).min(self_cap).max(ks);
            }
            let kext = (k - ks) as usize;
            let citing_needed = kext.div_ceil(m);
            padding = padding.max(citing_needed.saturating_sub(avail));
            demands.push((a, m, ks as usize, kext));
        }
        for j in 0..padding {
            let idx = papers.len();
            helpers.push((c, j));
            by_year[c].push(idx);
            papers.push(Paper {
                year: c,
                authors: vec![n + helpers.len() - 1],
                venue: VenueKind::Other,
                refs: Vec::new(),
            });
        }
        for (a, m, ks, kext) in demands {
            let own_y = own[a][c].clone();
            let mut taken = 0;
            let mut i = 0;
            while taken < ks {
                let (citing, cited) = (own_y[i / m], solo[a][(cursor[a] + i) % m]);
                i += 1;
                if citing != cited {
                    papers[citing].refs.push(cited);
                    taken += 1;
                }
            }
            cursor[a] += i;
            let ext: Vec<usize> = by_year[c].iter().copied().filter(|p| !own_y.contains(p)).collect();
            let off = rng.random_range(0..ext.len().max(1));
            for i in 0..kext {
                let citing = ext[(off + i / m) % ext.len()];
                papers[citing].refs.push(solo[a][(cursor[a] + i) % m]);
            }
            cursor[a] += kext;
        }
    }

    // stable ids: papers sorted by year, then creation order
    let mut order: Vec<usize> = (0..papers.len()).collect();
    order.sort_by_key(|&i| (papers[i].year, i));
    let mut id_of = vec![0usize; papers.len()];
    for (rank, &i) in order.iter().enumerate() {
        id_of[i] = rank;
    }
    let width = n.to_string().len().max(4);
    let author_id = |x: usize| {
        if x < n {
            format!("a{x:0width$}")
        } else {
            let (c, j) = helpers[x - n];
            format!("h{}-{j:03}", spec.start_year + c as i32)
        }
    };
    let pid = |i: usize| format!("p{:07}", id_of[i]);
    let records: Vec<PaperRecord> = order
        .iter()
        .map(|&i| {
            let p = &papers[i];
            let mut refs: Vec<String> = p.refs.iter().map(|&r| pid(r)).collect();
            refs.sort();
            PaperRecord {
                id: pid(i),
                year: spec.start_year + p.year as i32,
                venue_kind: p.venue,
                author_ids: p.authors.iter().map(|&x| author_id(x)).collect(),
                reference_ids: refs,
            }
        })
        .collect();

    let mut labels: BTreeMap<String, TrajectoryClass> =
        plans.iter().enumerate().map(|(a, p)| (author_id(a), p.class)).collect();
    for h in 0..helpers.len() {
        labels.insert(author_id(n + h), TrajectoryClass::OT);
    }
    let targets = targets.map(|_| {
        plans
            .iter()
            .enumerate()
            .filter_map(|(a, p)| p.target.map(|t| (author_id(a), t)))
            .collect()
    });
    let (corpus, report) = Corpus::from_records(records, IngestOptions::default())?;
    Ok(LabeledCorpus {
        corpus,
        report,
        labels,
        targets,
    })
}
