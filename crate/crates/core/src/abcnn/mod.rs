//! The adapted balanced multi-task attribute classifier.
//!
//! A micro network with affine layers and rectified hidden units is trained
//! under a weighted squared-error objective: each attribute/class pair
//! carries an adapted weight derived from the gap between the training label
//! distribution and a target distribution, so a skewed training set behaves
//! like a balanced one. Backpropagation is verified against central finite
//! differences.

mod balance;
mod dataset;
mod metrics;
mod net;
mod train;

pub use balance::{adapted_weights, hinge_loss, loss_gradient, weighted_loss, AdaptedWeights};
pub use dataset::{compute_distribution, ClassDistribution, LabeledDataset};
pub use metrics::{average_accuracy, classify, dataset_loss, per_attribute_accuracy};
pub use net::MicroNetwork;
pub use train::{
    gradient_check, train, train_with_weights, EpochStats, GradCheckReport, TrainConfig,
    TrainOutcome,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AbcnnError {
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("input {index} has dimension {got}, expected {expected}")]
    InputDimension {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("label row {index} has {got} entries, expected {expected}")]
    LabelShape {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("label row {index} contains {value}; labels must be +1 or -1")]
    BadLabel { index: usize, value: i8 },
    #[error("attribute {attr} has a degenerate label distribution (every label is {value:+})")]
    DegenerateColumn { attr: usize, value: i8 },
    #[error("invalid class distribution: {0}")]
    BadDistribution(String),
    #[error("{what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("network needs an input and an output layer")]
    BadArchitecture,
    #[error("layer sizes must be positive")]
    ZeroLayerSize,
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("malformed checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
