//! Semi-supervised training: one-pass self-training and tri-training.
//!
//! Neither procedure ever sees withheld ground truth; they receive the
//! labeled set `L` and the unlabeled pool `U` and nothing else.

mod self_training;
mod tri_training;

pub use self_training::{
    self_train, self_train_xy, LabelingConfig, Provenance, RunCounts, SelfTrainOutput, SelfTrainRun,
};
pub use tri_training::{tri_train, tri_train_xy, LearnerSpec, TriTrainModel, TriTrainOptions};
