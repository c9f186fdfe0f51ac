//! Kernel SVM training, F1 scoring, repeated cross-validation and the
//! pulse-parameter searches.

mod cv;
mod svm;
mod training;

pub use cv::{cross_validate, f1_score, stratified_folds, CvConfig, ScoreReport};
pub use svm::{dual_objective, svm_predict, svm_train, svm_train_with, SmoOptions, SvmModel};
pub use training::{
    layer_pulses, score_duration_scan, simulate_histograms, sorted_unique, train_layer_scheme,
    train_pulse_duration, DriveConfig,
    DurationScan, LayerSchemeConfig, LayerSearch,
};
