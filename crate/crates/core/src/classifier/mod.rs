//! Desk-scale graph-convolutional classifier with manual backpropagation.

mod checkpoint;
mod gradcheck;
mod graph;
mod metrics;
mod model;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, MANIFEST};
pub use gradcheck::{gradient_check, GradCheck, DENOMINATOR_FLOOR};
pub use graph::Graph;
pub use metrics::{accuracy_report, ensemble, evaluate, fuse_scores, predictions, scores, Evaluation};
pub use model::{argmax, softmax, softmax_cross_entropy, ArchConfig, GcnModel, ParamSpec};
pub use train::{batch_gradient, loss_and_accuracy, train, Augmentation, EpochRecord, TrainConfig, TrainOptions};
