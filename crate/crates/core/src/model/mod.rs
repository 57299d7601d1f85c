//! Three-dense-layer, three-head classifier trained with summed
//! cross-entropy and Adam. Forward and backward passes are written out by
//! hand in double precision.

mod io;
mod mlp;
mod train;

pub use io::{load_model, model_from_bytes, model_to_bytes, save_model};
pub use mlp::{argmax, loss, softmax, Activation, ForwardCache, HeadLogits, Mlp};
pub use train::{adam_step, evaluate_loss, train, AdamConfig, AdamState, Dataset, EpochStats, TrainConfig, TrainReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("input has {found} columns, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model was built for feature schema {found}, this build uses {expected}")]
    SchemaMismatch { expected: String, found: String },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
