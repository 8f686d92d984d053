//! Datasets, classifiers, and optimizers.

mod data;
pub mod idx;
mod net;
mod optim;

pub use data::{generate_blobs, Dataset, Shard, ShardOwner};
pub use idx::load_idx;
pub use net::{gradient, loss_and_accuracy, DenseLayer, ModelKind, ModelShape, ModelState, DEFAULT_HIDDEN};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
