//! Adapted class weights and the weighted squared-error objective.

use super::{AbcnnError, ClassDistribution};

/// Per-attribute, per-class loss multipliers `p(i|+1)` and `p(i|-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedWeights {
    w_pos: Vec<f64>,
    w_neg: Vec<f64>,
}

impl AdaptedWeights {
    /// All-ones weights: the unweighted squared-error baseline.
    pub fn unit(attrs: usize) -> Self {
        Self {
            w_pos: vec![1.0; attrs],
            w_neg: vec![1.0; attrs],
        }
    }

    pub fn attr_count(&self) -> usize {
        self.w_pos.len()
    }

    pub fn w_pos(&self) -> &[f64] {
        &self.w_pos
    }

    pub fn w_neg(&self) -> &[f64] {
        &self.w_neg
    }

    /// The multiplier for attribute `i` under realized label `label`.
    pub fn for_label(&self, i: usize, label: i8) -> f64 {
        if label > 0 {
            self.w_pos[i]
        } else {
            self.w_neg[i]
        }
    }
}

/// Derives adapted weights from the training and target distributions:
///
/// ```text
/// w_pos[i] = 1 + (Target_i+ - Train_i+) / (Target_i+ + Train_i+)
/// w_neg[i] = 1 + (Target_i- - Train_i-) / (Target_i- + Train_i-)
/// ```
///
/// A class under-represented in training relative to the target gets a
/// weight above 1, over-represented below 1; equal distributions give
/// exactly 1. All weights land strictly inside (0, 2).
pub fn adapted_weights(
    train: &ClassDistribution,
    target: &ClassDistribution,
) -> Result<AdaptedWeights, AbcnnError> {
    if train.attr_count() != target.attr_count() {
        return Err(AbcnnError::Dimension {
            what: "target attribute count",
            expected: train.attr_count(),
            got: target.attr_count(),
        });
    }
    if !train.is_nondegenerate() {
        return Err(AbcnnError::BadDistribution(
            "training distribution must be strictly inside (0, 1)".into(),
        ));
    }
    if !target.is_nondegenerate() {
        // A one-sided target would zero out a class weight entirely.
        return Err(AbcnnError::BadDistribution(
            "target distribution must be strictly inside (0, 1)".into(),
        ));
    }
    let n = train.attr_count();
    let mut w_pos = Vec::with_capacity(n);
    let mut w_neg = Vec::with_capacity(n);
    for i in 0..n {
        if train.pos()[i] == target.pos()[i] {
            // Exact identity when the distributions agree.
            w_pos.push(1.0);
            w_neg.push(1.0);
            continue;
        }
        let delta_pos = target.pos()[i] - train.pos()[i];
        let delta_neg = target.neg()[i] - train.neg()[i];
        w_pos.push(1.0 + delta_pos / (target.pos()[i] + train.pos()[i]));
        w_neg.push(1.0 + delta_neg / (target.neg()[i] + train.neg()[i]));
    }
    Ok(AdaptedWeights { w_pos, w_neg })
}

fn check_lengths(outputs: &[f64], labels: &[i8]) -> Result<(), AbcnnError> {
    if outputs.len() != labels.len() {
        return Err(AbcnnError::Dimension {
            what: "label count",
            expected: outputs.len(),
            got: labels.len(),
        });
    }
    Ok(())
}

/// Weighted mixed-task squared error for one sample:
/// `sum_i p(i|y_i) * (f_i - y_i)^2`. Zero exactly when outputs equal labels.
pub fn weighted_loss(
    outputs: &[f64],
    labels: &[i8],
    weights: &AdaptedWeights,
) -> Result<f64, AbcnnError> {
    check_lengths(outputs, labels)?;
    if weights.attr_count() != outputs.len() {
        return Err(AbcnnError::Dimension {
            what: "weight count",
            expected: outputs.len(),
            got: weights.attr_count(),
        });
    }
    Ok(outputs
        .iter()
        .zip(labels.iter())
        .enumerate()
        .map(|(i, (&f, &y))| {
            let r = f - f64::from(y);
            weights.for_label(i, y) * r * r
        })
        .sum())
}

/// Per-attribute hinge loss `sum_i max(0, 1 - y_i * f_i)`: the
/// independent-training baseline.
pub fn hinge_loss(outputs: &[f64], labels: &[i8]) -> Result<f64, AbcnnError> {
    check_lengths(outputs, labels)?;
    Ok(outputs
        .iter()
        .zip(labels.iter())
        .map(|(&f, &y)| (1.0 - f64::from(y) * f).max(0.0))
        .sum())
}

/// Gradient of [`weighted_loss`] with respect to the outputs:
/// component `i` is `2 * p(i|y_i) * (f_i - y_i)`.
pub fn loss_gradient(
    outputs: &[f64],
    labels: &[i8],
    weights: &AdaptedWeights,
) -> Result<Vec<f64>, AbcnnError> {
    check_lengths(outputs, labels)?;
    if weights.attr_count() != outputs.len() {
        return Err(AbcnnError::Dimension {
            what: "weight count",
            expected: outputs.len(),
            got: weights.attr_count(),
        });
    }
    Ok(outputs
        .iter()
        .zip(labels.iter())
        .enumerate()
        .map(|(i, (&f, &y))| 2.0 * weights.for_label(i, y) * (f - f64::from(y)))
        .collect())
}
