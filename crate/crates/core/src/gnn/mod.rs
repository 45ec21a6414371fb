//! Graph convolutional network, exact gradients, Adam and the training loop.

mod adam;
mod checkpoint;
mod matrix;
mod model;
mod train;

use thiserror::Error;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CheckpointError};
pub use matrix::Matrix;
pub use model::{
    backward, backward_from_output_grad, forward, hyperparams_default, init_parameters,
    parameter_slices, Aggregation, Architecture, EmbeddingTable, ForwardCache, GcnLayer, GcnModel,
    Gradients, P_MAX, P_MIN,
};
pub use train::{
    train_single_shot, train_single_shot_with, BestCandidate, StopReason, TrainConfig, TrainTrace,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GnnError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("invalid layer dimensions: {0}")]
    InvalidDims(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("forward cache does not match the current parameters")]
    StaleCache,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}
