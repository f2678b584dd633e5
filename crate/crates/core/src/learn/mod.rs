//! Feature extraction, kernel machines and the stratified two-stage
//! predictor with its cross-validated evaluation.

mod classify;
mod eval;
mod features;
mod kernel;
mod metrics;
mod model;
mod regress;
mod smo;

pub use classify::{argmax_class, fit_classifier, BinaryMachine, ClassifierModel};
pub use eval::{assign_folds, cross_validate, evaluate, EvalConfig, EvalReport, EvalSummary, FoldDetail, WindowEval};
pub use features::{extract_features, feature_dim, feature_names, FeatureVector, T_MAX, T_MIN};
pub use kernel::{Kernel, KernelKind, Scaler};
pub use metrics::{mse, pearson};
pub use model::{
    build_training_set, fit_two_stage, fit_two_stage_rows, horizon_target, predict_two_stage, BundledModel,
    ModelBundle, ModelConfig, Prediction, StratifiedModel, TargetKind, TrainingRow, TrainingSet, MODEL_SCHEMA_VERSION,
};
pub use regress::{fit_regressor, fit_ridge, fit_svr, RegressorKind, RegressorModel, RidgeModel, SvmConfig, SvrModel};
