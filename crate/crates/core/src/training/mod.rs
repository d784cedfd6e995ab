//! Loss, optimizer, dropout, the epoch loop, gradient checking, and
//! checkpoints.

mod checkpoint;
mod dropout;
mod gradcheck;
mod loss;
mod optim;
mod trainer;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, FORMAT_VERSION, MAGIC};
pub use dropout::{dropout, dropout_mask, Phase};
pub use gradcheck::{check_gradients, tiny_gradcheck, GradCheckReport, GRADCHECK_STEP, GRADCHECK_TOLERANCE};
pub use loss::{cross_entropy, cross_entropy_node, loss, loss_node, Regularization, LOG_FLOOR};
pub use optim::SgdMomentum;
pub use trainer::{batch_gradients, train, train_model, BatchGradients, BestEpoch, EpochMetrics, TrainOutcome};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub learning_rate: f64,
    /// L2 weight `λ`.
    pub l2: f64,
    pub dropout: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub regularize_biases: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.1,
            l2: 1e-5,
            dropout: 0.5,
            momentum: 0.9,
            batch_size: 25,
            max_epochs: 30,
            seed: 1,
            regularize_biases: true,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config(format!("l2 weight must be non-negative, got {}", self.l2)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must lie in [0, 1), got {}", self.dropout)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn regularization(&self) -> Regularization {
        Regularization {
            l2: self.l2,
            include_biases: self.regularize_biases,
        }
    }
}
