//! K-fold cross-validation of the two-stage model against the single
//! regressor baseline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{extract_features, T_MAX, T_MIN};
use super::metrics::{mse, pearson};
use super::model::{fit_two_stage_rows, horizon_target, ModelConfig, TrainingRow, TrainingSet};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::trajectory::{classify_author, TrajectoryClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub t_min: usize,
    pub t_max: usize,
    pub folds: usize,
    pub seed: u64,
    pub model: ModelConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            t_min: T_MIN,
            t_max: T_MAX,
            folds: 10,
            seed: 0,
            model: ModelConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldDetail {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub baseline_mse: f64,
    pub stratified_mse: f64,
    /// Share of held-out authors whose predicted stratum equals the
    /// full-career class.
    pub stage1_accuracy: f64,
    pub strata_with_regressor: Vec<TrajectoryClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEval {
    pub t: usize,
    pub baseline_mse: f64,
    pub stratified_mse: f64,
    pub baseline_pearson: Option<f64>,
    pub stratified_pearson: Option<f64>,
    pub mse_improvement_pct: Option<f64>,
    pub pearson_improvement_pct: Option<f64>,
    pub stage1_accuracy: f64,
    pub folds: Vec<FoldDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub baseline_mse: f64,
    pub stratified_mse: f64,
    pub baseline_pearson: Option<f64>,
    pub stratified_pearson: Option<f64>,
    pub mse_improvement_pct: Option<f64>,
    pub pearson_improvement_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub folds: usize,
    pub authors: usize,
    /// Training-stratum sizes over all evaluated authors.
    pub strata: Vec<(TrajectoryClass, usize)>,
    pub per_t: Vec<WindowEval>,
    /// Means over `per_t`.
    pub overall: EvalSummary,
}

fn improvement_mse(baseline: f64, stratified: f64) -> Option<f64> {
    (baseline != 0.0).then(|| 100.0 * (baseline - stratified) / baseline)
}

fn improvement_pearson(baseline: Option<f64>, stratified: Option<f64>) -> Option<f64> {
    match (baseline, stratified) {
        (Some(b), Some(s)) if b != 0.0 => Some(100.0 * (s - b) / b.abs()),
        _ => None,
    }
}

/// Mean of the defined values, `None` unless every value is defined.
fn mean_all(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty())
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Fold of every author, in input order.
pub fn assign_folds(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

struct FoldOutput {
    detail: FoldDetail,
    /// `(row index, baseline, stratified, stage-1 stratum)`
    predictions: Vec<(usize, f64, f64, TrajectoryClass)>,
}

fn run_fold(set: &TrainingSet, fold_of: &[usize], fold: usize, config: &ModelConfig) -> Result<FoldOutput> {
    type Indexed<'a> = Vec<(usize, &'a TrainingRow)>;
    let (test, train): (Indexed, Indexed) = set.rows.iter().enumerate().partition(|(i, _)| fold_of[*i] == fold);
    let train_set = TrainingSet {
        t: set.t,
        rows: train.iter().map(|(_, r)| (*r).clone()).collect(),
    };
    let model = fit_two_stage_rows(&train_set, config)?;
    let mut predictions = Vec::with_capacity(test.len());
    for &(i, r) in &test {
        let p = model.predict(&r.features)?;
        predictions.push((i, model.predict_baseline(&r.features)?, p.value, p.stratum));
    }
    let targets: Vec<f64> = test.iter().map(|(_, r)| r.target).collect();
    let base: Vec<f64> = predictions.iter().map(|p| p.1).collect();
    let strat: Vec<f64> = predictions.iter().map(|p| p.2).collect();
    let hits = test
        .iter()
        .zip(&predictions)
        .filter(|((_, r), p)| r.stratum == p.3)
        .count();
    Ok(FoldOutput {
        detail: FoldDetail {
            fold,
            n_train: train.len(),
            n_test: test.len(),
            baseline_mse: mse(&base, &targets)?,
            stratified_mse: mse(&strat, &targets)?,
            stage1_accuracy: hits as f64 / test.len() as f64,
            strata_with_regressor: model.per_stratum.keys().copied().collect(),
        },
        predictions,
    })
}

impl EvalConfig {
    /// Checks the window range, fold count and horizon.
    pub fn validate(&self) -> Result<()> {
        validate(self)
    }
}

fn validate(config: &EvalConfig) -> Result<()> {
    if config.t_min < T_MIN || config.t_max > T_MAX || config.t_min > config.t_max {
        return Err(Error::arg(format!(
            "t range {}..={} must lie within {T_MIN}..={T_MAX}",
            config.t_min, config.t_max
        )));
    }
    if config.folds < 2 {
        return Err(Error::arg(format!("need at least 2 folds, got {}", config.folds)));
    }
    if config.t_max > config.model.horizon {
        return Err(Error::arg(format!(
            "early window t = {} exceeds horizon {}",
            config.t_max, config.model.horizon
        )));
    }
    Ok(())
}

/// Cross-validates over every author observed for at least the horizon.
pub fn evaluate(corpus: &Corpus, config: &EvalConfig) -> Result<EvalReport> {
    validate(config)?;
    let model = &config.model;
    let authors = corpus.eligible_authors(model.required_span());
    if authors.len() < config.folds {
        return Err(Error::TooFewAuthors {
            have: authors.len(),
            need: config.folds,
        });
    }

    // stratum and target do not depend on t
    let labelled: Vec<(TrajectoryClass, f64)> = authors
        .par_iter()
        .map(|a| {
            Ok((
                classify_author(corpus, a, &model.classify)?.class,
                horizon_target(corpus, a, model)?,
            ))
        })
        .collect::<Result<_>>()?;
    let ts: Vec<usize> = (config.t_min..=config.t_max).collect();
    let sets: Vec<TrainingSet> = ts
        .par_iter()
        .map(|&t| {
            let rows = authors
                .iter()
                .zip(&labelled)
                .map(|(a, &(stratum, target))| {
                    Ok(TrainingRow {
                        author_id: a.clone(),
                        features: extract_features(corpus, a, t, model.required_span())?,
                        stratum,
                        target,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrainingSet { t, rows })
        })
        .collect::<Result<_>>()?;

    cross_validate(&sets, config)
}

/// Cross-validates prebuilt training sets, one per early window. Every set
/// must list the same authors in the same order.
pub fn cross_validate(sets: &[TrainingSet], config: &EvalConfig) -> Result<EvalReport> {
    if config.folds < 2 {
        return Err(Error::arg(format!("need at least 2 folds, got {}", config.folds)));
    }
    let Some(first) = sets.first() else {
        return Err(Error::arg("no training sets to evaluate"));
    };
    let n_authors = first.rows.len();
    if n_authors < config.folds {
        return Err(Error::TooFewAuthors {
            have: n_authors,
            need: config.folds,
        });
    }
    let same_authors = |s: &TrainingSet| {
        s.rows.len() == n_authors && s.rows.iter().zip(&first.rows).all(|(a, b)| a.author_id == b.author_id)
    };
    if !sets.iter().all(same_authors) {
        return Err(Error::arg("training sets disagree on their authors"));
    }
    let model = &config.model;

    let fold_of = assign_folds(n_authors, config.folds, config.seed);
    let jobs: Vec<(usize, usize)> = (0..sets.len())
        .flat_map(|s| (0..config.folds).map(move |f| (s, f)))
        .collect();
    let outputs: Vec<FoldOutput> = jobs
        .par_iter()
        .map(|&(s, f)| run_fold(&sets[s], &fold_of, f, model))
        .collect::<Result<_>>()?;

    let mut per_t = Vec::with_capacity(sets.len());
    for (s, set) in sets.iter().enumerate() {
        let n = set.rows.len();
        let mut base = vec![0.0; n];
        let mut strat = vec![0.0; n];
        let mut hits = 0;
        let mut folds = Vec::with_capacity(config.folds);
        for out in &outputs[s * config.folds..(s + 1) * config.folds] {
            for &(i, b, p, stratum) in &out.predictions {
                base[i] = b;
                strat[i] = p;
                hits += usize::from(stratum == set.rows[i].stratum);
            }
            folds.push(out.detail.clone());
        }
        let targets: Vec<f64> = set.rows.iter().map(|r| r.target).collect();
        let (baseline_mse, stratified_mse) = (mse(&base, &targets)?, mse(&strat, &targets)?);
        let (baseline_pearson, stratified_pearson) = (pearson(&base, &targets)?, pearson(&strat, &targets)?);
        per_t.push(WindowEval {
            t: set.t,
            baseline_mse,
            stratified_mse,
            baseline_pearson,
            stratified_pearson,
            mse_improvement_pct: improvement_mse(baseline_mse, stratified_mse),
            pearson_improvement_pct: improvement_pearson(baseline_pearson, stratified_pearson),
            stage1_accuracy: hits as f64 / n as f64,
            folds,
        });
    }

    let k = per_t.len() as f64;
    let overall = EvalSummary {
        baseline_mse: per_t.iter().map(|w| w.baseline_mse).sum::<f64>() / k,
        stratified_mse: per_t.iter().map(|w| w.stratified_mse).sum::<f64>() / k,
        baseline_pearson: mean_all(per_t.iter().map(|w| w.baseline_pearson)),
        stratified_pearson: mean_all(per_t.iter().map(|w| w.stratified_pearson)),
        mse_improvement_pct: mean_all(per_t.iter().map(|w| w.mse_improvement_pct)),
        pearson_improvement_pct: mean_all(per_t.iter().map(|w| w.pearson_improvement_pct)),
    };
    let strata = TrajectoryClass::ALL
        .iter()
        .map(|&c| (c, first.rows.iter().filter(|r| r.stratum == c).count()))
        .filter(|&(_, n)| n > 0)
        .collect();
    Ok(EvalReport {
        seed: config.seed,
        folds: config.folds,
        authors: n_authors,
        strata,
        per_t,
        overall,
    })
}
