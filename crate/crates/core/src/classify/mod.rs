//! End-to-end classifier on top of a trainable smooth ECT layer.
//!
//! Each direction's curve is embedded by a shared MLP, the embeddings are
//! pooled symmetrically, and a second MLP produces class logits. Every stage
//! is backpropagated by hand, including into the directions.

mod checkpoint;
mod mlp;
mod model;
mod train;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION,
};
pub use mlp::{MlpParams, MlpTrace};
pub use model::{
    argmax, classifier_ect_config, cross_entropy, ClassifierModel, ModelGrads, ModelLayout, Pool,
};
pub use train::{
    evaluate, forward_batch, loss_and_accuracy, split_indices, synthetic_dataset, train,
    EpochMetrics, Sample, Split, TrainRun,
};
