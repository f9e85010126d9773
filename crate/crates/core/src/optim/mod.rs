//! Cross-entropy loss against target transformations and gradient descent
//! over rule weights.

mod loss;
mod target;
mod train;

pub use loss::{
    batch_loss_gradient, binary_cross_entropy, cross_entropy, loss_gradient, loss_value, LOG_FLOOR,
};
pub use target::{majority_target, TargetSpec};
pub use train::{normal_weights, random_delta_batch, train, Progress, TrainOutcome, TrainState};
