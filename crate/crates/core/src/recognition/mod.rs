//! Object models, the three classifiers and the touch-sweep evaluation.

mod classify;
mod eval;
mod model;

pub use classify::{
    classify_bow, classify_bow_prepared_with, classify_iclap, classify_iclap_prepared, classify_icp3,
    classify_icp3_prepared, histogram_distance, ClassificationReport, Method, PreparedTest, RankedModel,
};
pub use eval::{
    draw_subset, evaluate_sweep, evaluate_touch_sweep, train_fold, Confusion, EvalConfig, EvalCurve,
    SubsetMode, SweepOutcome, TrainedFold,
};
pub use model::{build_model, ObjectModel};
pub(crate) use eval::derive_seed;
