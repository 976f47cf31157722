//! Gradient-boosted trees for the illiterate/literate classification, with
//! the resampling, validation and feature-ranking procedures around them.

mod binning;
mod cv;
mod gbm;
mod gcv;
mod importance;
mod metrics;
mod model_io;
mod sampling;
mod split;
mod tree;

pub use cv::{cross_validate, stratified_folds, CvSummary};
pub use gbm::{sigmoid, train, train_with, GbmModel, Hyperparameters, TrainData, TrainTrace, LEAF_CLIP};
pub use gcv::{gcv_backward_eliminate, gcv_of, EliminationStep, GcvEliminator, GcvOptions, GcvSelection};
pub use importance::{rank_of, split_gain_importance, FeatureScore};
pub use metrics::{evaluate, wilson_interval, ConfusionMatrix, EvalReport};
pub use model_io::{read_model, write_model, ModelDocument, MODEL_FORMAT, MODEL_FORMAT_VERSION};
pub use sampling::upsample_minority;
pub use split::{split, Split, SplitSpec};
pub use tree::{SplitRule, Tree, TreeNode};
