//! The stratified two-stage predictor.
//!
//! Stage 1 maps early-career features to a trajectory class; stage 2 applies
//! the regressor trained only on that class. Training labels come from the
//! full-career classification, test-time strata only from stage 1.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{fit_classifier, ClassifierModel};
use super::features::{extract_features, feature_dim, feature_names, FeatureVector};
use super::regress::{fit_regressor, RegressorKind, RegressorModel, SvmConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::trajectory::{classify_author, ClassifyConfig, TrajectoryClass};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// What the regressors predict at the horizon career year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Cumulative citations over cumulative papers.
    #[default]
    Success,
    CumCitations,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Success => "success",
            TargetKind::CumCitations => "cum_citations",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success" => Ok(TargetKind::Success),
            "cum_citations" => Ok(TargetKind::CumCitations),
            other => Err(Error::arg(format!(
                "unknown target `{other}` (expected success|cum_citations)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub svm: SvmConfig,
    pub regressor: RegressorKind,
    /// Smaller strata route to the global regressor.
    pub min_stratum_size: usize,
    /// Career year whose value is predicted.
    pub horizon: usize,
    pub target: TargetKind,
    /// Produces the training strata; its `min_span` also gates eligibility.
    pub classify: ClassifyConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            svm: SvmConfig::default(),
            regressor: RegressorKind::Svr,
            min_stratum_size: 20,
            horizon: 10,
            target: TargetKind::Success,
            classify: ClassifyConfig::default(),
        }
    }
}

impl ModelConfig {
    /// Minimum observation span for an author to yield a training row.
    pub fn required_span(&self) -> usize {
        self.classify.min_span.max(self.horizon)
    }
}

/// The value to predict for `author_id` at career year `horizon`.
pub fn horizon_target(corpus: &Corpus, author_id: &str, config: &ModelConfig) -> Result<f64> {
    let timeline = corpus.author_timeline(author_id, config.classify.citation_mode)?;
    let h = config.horizon;
    if h == 0 || timeline.len() < h {
        return Err(Error::TooShort {
            len: timeline.len(),
            needed: h.max(1),
        });
    }
    let cum = timeline.cumulative();
    let c = cum.cum_citations[h - 1] as f64;
    Ok(match config.target {
        TargetKind::Success => c / cum.cum_papers[h - 1] as f64,
        TargetKind::CumCitations => c,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub author_id: String,
    pub features: FeatureVector,
    pub stratum: TrajectoryClass,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub t: usize,
    pub rows: Vec<TrainingRow>,
}

/// Rows for `authors` in the given order.
pub fn build_training_set(corpus: &Corpus, authors: &[String], t: usize, config: &ModelConfig) -> Result<TrainingSet> {
    let span = config.required_span();
    let rows = authors
        .par_iter()
        .map(|a| {
            Ok(TrainingRow {
                author_id: a.clone(),
                features: extract_features(corpus, a, t, span)?,
                stratum: classify_author(corpus, a, &config.classify)?.class,
                target: horizon_target(corpus, a, config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainingSet { t, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Stratum chosen by stage 1.
    pub stratum: TrajectoryClass,
    /// True when the stratum had no regressor and the global one answered.
    pub fallback: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedModel {
    pub t: usize,
    pub classifier: ClassifierModel,
    pub per_stratum: BTreeMap<TrajectoryClass, RegressorModel>,
    /// Trained on every row; doubles as the single-regressor baseline.
    pub global_fallback: RegressorModel,
    pub min_stratum_size: usize,
    pub warnings: Vec<String>,
}

impl StratifiedModel {
    fn check(&self, features: &FeatureVector) -> Result<()> {
        if features.t != self.t || features.values.len() != feature_dim(self.t) {
            return Err(Error::arg(format!(
                "features for t = {} (dimension {}) do not match model for t = {} (dimension {})",
                features.t,
                features.values.len(),
                self.t,
                feature_dim(self.t)
            )));
        }
        Ok(())
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<Prediction> {
        self.check(features)?;
        let stratum = self.classifier.predict_class(&features.values)?;
        let (model, fallback) = match self.per_stratum.get(&stratum) {
            Some(m) => (m, false),
            None => (&self.global_fallback, true),
        };
        Ok(Prediction {
            stratum,
            fallback,
            value: model.predict(&features.values)?,
        })
    }

    pub fn predict_baseline(&self, features: &FeatureVector) -> Result<f64> {
        self.check(features)?;
        self.global_fallback.predict(&features.values)
    }
}

pub fn predict_two_stage(model: &StratifiedModel, features: &FeatureVector) -> Result<f64> {
    Ok(model.predict(features)?.value)
}

pub fn fit_two_stage_rows(set: &TrainingSet, config: &ModelConfig) -> Result<StratifiedModel> {
    if set.rows.len() < 2 {
        return Err(Error::TooFewAuthors {
            have: set.rows.len(),
            need: 2,
        });
    }
    if let Some(r) = set.rows.iter().find(|r| r.features.t != set.t) {
        return Err(Error::arg(format!(
            "row for `{}` has t = {}, set has t = {}",
            r.author_id, r.features.t, set.t
        )));
    }
    let xs: Vec<&[f64]> = set.rows.iter().map(|r| r.features.values.as_slice()).collect();
    let ys: Vec<f64> = set.rows.iter().map(|r| r.target).collect();
    let strata: Vec<TrajectoryClass> = set.rows.iter().map(|r| r.stratum).collect();

    let classifier = fit_classifier(&xs, &strata, &config.svm)?;
    let global_fallback = fit_regressor(&xs, &ys, config.regressor, &config.svm)?;

    let mut per_stratum = BTreeMap::new();
    for class in TrajectoryClass::ALL {
        let idx: Vec<usize> = (0..strata.len()).filter(|&i| strata[i] == class).collect();
        if idx.is_empty() || idx.len() < config.min_stratum_size.max(2) {
            continue;
        }
        let sx: Vec<&[f64]> = idx.iter().map(|&i| xs[i]).collect();
        let sy: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
        per_stratum.insert(class, fit_regressor(&sx, &sy, config.regressor, &config.svm)?);
    }

    let mut warnings = Vec::new();
    if per_stratum.is_empty() {
        warnings.push(format!(
            "no stratum reached {} training rows; model reduces to the global regressor",
            config.min_stratum_size
        ));
    }
    Ok(StratifiedModel {
        t: set.t,
        classifier,
        per_stratum,
        global_fallback,
        min_stratum_size: config.min_stratum_size,
        warnings,
    })
}

/// Trains on every author of `corpus` observed for at least the horizon.
pub fn fit_two_stage(corpus: &Corpus, t: usize, config: &ModelConfig) -> Result<StratifiedModel> {
    let authors = corpus.eligible_authors(config.required_span());
    let set = build_training_set(corpus, &authors, t, config)?;
    fit_two_stage_rows(&set, config)
}

/// Serialized form of trained models, one per early window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub config: ModelConfig,
    pub schema_version: u32,
    pub models: Vec<BundledModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundledModel {
    pub feature_names: Vec<String>,
    pub model: StratifiedModel,
}

impl ModelBundle {
    pub fn new(config: ModelConfig, models: Vec<StratifiedModel>) -> ModelBundle {
        ModelBundle {
            config,
            schema_version: MODEL_SCHEMA_VERSION,
            models: models
                .into_iter()
                .map(|model| BundledModel {
                    feature_names: feature_names(model.t),
                    model,
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<ModelBundle> {
        let bundle: ModelBundle = serde_json::from_str(text)?;
        if bundle.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::arg(format!(
                "model schema version {} is not supported (expected {MODEL_SCHEMA_VERSION})",
                bundle.schema_version
            )));
        }
        for b in &bundle.models {
            if b.feature_names != feature_names(b.model.t) {
                return Err(Error::arg(format!("feature schema mismatch for t = {}", b.model.t)));
            }
        }
        Ok(bundle)
    }

    pub fn model(&self, t: usize) -> Option<&StratifiedModel> {
        self.models.iter().map(|b| &b.model).find(|m| m.t == t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TrajectoryClass::*;

    fn row(id: usize, values: Vec<f64>, stratum: TrajectoryClass, target: f64) -> TrainingRow {
        TrainingRow {
            author_id: format!("a{id}"),
            features: FeatureVector { t: 3, values },
            stratum,
            target,
        }
    }

    fn features(x: f64, flag: f64) -> Vec<f64> {
        let mut v = vec![0.0; feature_dim(3)];
        v[0] = x;
        v[1] = flag;
        v
    }

    fn two_strata(n: usize) -> TrainingSet {
        let mut rows = Vec::new();
        for i in 0..n {
            let x = 1.0 + (i % 10) as f64;
            rows.push(row(2 * i, features(x, 0.0), SR, 2.0 * x));
            rows.push(row(2 * i + 1, features(x, 1.0), OT, 0.5 * x));
        }
        TrainingSet { t: 3, rows }
    }

    fn linear() -> ModelConfig {
        ModelConfig {
            regressor: RegressorKind::Ridge { lambda: 1e-6 },
            ..Default::default()
        }
    }

    #[test]
    fn strata_at_threshold_get_regressors() {
        let m = fit_two_stage_rows(&two_strata(20), &linear()).unwrap();
        assert_eq!(m.per_stratum.keys().copied().collect::<Vec<_>>(), vec![SR, OT]);
        assert!(m.warnings.is_empty());
        let small = fit_two_stage_rows(&two_strata(19), &linear()).unwrap();
        assert!(small.per_stratum.is_empty());
        assert_eq!(small.warnings.len(), 1);
    }

    #[test]
    fn stratified_training_error_beats_global() {
        let set = two_strata(30);
        let m = fit_two_stage_rows(&set, &linear()).unwrap();
        let (mut s, mut b) = (0.0, 0.0);
        for r in &set.rows {
            s += (m.predict(&r.features).unwrap().value - r.target).powi(2);
            b += (m.predict_baseline(&r.features).unwrap() - r.target).powi(2);
        }
        assert!(s < 1e-6, "stratified sse {s}");
        assert!(s < b);
    }

    #[test]
    fn stub_composition_and_fallback() {
        let constant = |value| RegressorModel::Constant {
            value,
            dim: feature_dim(3),
        };
        let mut model = StratifiedModel {
            t: 3,
            classifier: ClassifierModel::Constant {
                class: SR,
                dim: feature_dim(3),
            },
            per_stratum: BTreeMap::from([(SR, constant(4.2))]),
            global_fallback: constant(-1.0),
            min_stratum_size: 20,
            warnings: vec![],
        };
        let f = FeatureVector {
            t: 3,
            values: features(1.0, 0.0),
        };
        assert_eq!(predict_two_stage(&model, &f).unwrap(), 4.2);
        assert_eq!(predict_two_stage(&model, &f).unwrap(), 4.2);
        model.classifier = ClassifierModel::Constant {
            class: LR,
            dim: feature_dim(3),
        };
        let p = model.predict(&f).unwrap();
        assert!(p.fallback);
        assert_eq!(p.value, -1.0);

        let wrong = FeatureVector {
            t: 4,
            values: vec![0.0; feature_dim(4)],
        };
        assert!(predict_two_stage(&model, &wrong).is_err());
    }

    #[test]
    fn bundle_round_trip() {
        let m = fit_two_stage_rows(&two_strata(20), &ModelConfig::default()).unwrap();
        let bundle = ModelBundle::new(ModelConfig::default(), vec![m]);
        let text = serde_json::to_string(&bundle).unwrap();
        let back = ModelBundle::from_json(&text).unwrap();
        assert_eq!(back, bundle);
        let f = FeatureVector {
            t: 3,
            values: features(3.0, 1.0),
        };
        assert_eq!(
            back.model(3).unwrap().predict(&f).unwrap(),
            bundle.model(3).unwrap().predict(&f).unwrap()
        );
        let bumped = text.replacen("\"schema_version\":1", "\"schema_version\":99", 1);
        assert!(ModelBundle::from_json(&bumped).is_err());
    }

    #[test]
    fn target_kind_parsing() {
        assert_eq!("success".parse::<TargetKind>().unwrap(), TargetKind::Success);
        assert_eq!("cum_citations".parse::<TargetKind>().unwrap(), TargetKind::CumCitations);
        assert!("both".parse::<TargetKind>().is_err());
    }
}
