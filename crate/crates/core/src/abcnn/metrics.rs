//! Classification rule and accuracy metrics.

use super::{weighted_loss, AbcnnError, AdaptedWeights, LabeledDataset, MicroNetwork};

/// Classification rule: +1 where the decision value is strictly positive,
/// -1 otherwise (zero falls to -1).
pub fn classify(outputs: &[f64]) -> Vec<i8> {
    outputs.iter().map(|&f| if f > 0.0 { 1 } else { -1 }).collect()
}

/// Per-attribute accuracy over a test set: attribute `i` scores the
/// fraction of samples whose predicted sign agrees with the label.
pub fn per_attribute_accuracy(
    net: &MicroNetwork,
    testset: &LabeledDataset,
) -> Result<Vec<f64>, AbcnnError> {
    if testset.is_empty() {
        return Err(AbcnnError::EmptyTestSet);
    }
    let attrs = testset.attr_count();
    let mut correct = vec![0usize; attrs];
    for (input, labels) in testset.inputs().iter().zip(testset.labels()) {
        let predicted = classify(&net.forward(input)?);
        for (i, (&c, &y)) in predicted.iter().zip(labels.iter()).enumerate() {
            if i32::from(y) * i32::from(c) > 0 {
                correct[i] += 1;
            }
        }
    }
    let total = testset.len() as f64;
    Ok(correct.into_iter().map(|c| c as f64 / total).collect())
}

/// Mean of the per-attribute accuracies.
pub fn average_accuracy(net: &MicroNetwork, testset: &LabeledDataset) -> Result<f64, AbcnnError> {
    let per_attr = per_attribute_accuracy(net, testset)?;
    Ok(per_attr.iter().sum::<f64>() / per_attr.len() as f64)
}

/// Total weighted loss over a dataset: the sum over samples of the
/// per-sample weighted squared error.
pub fn dataset_loss(
    net: &MicroNetwork,
    data: &LabeledDataset,
    weights: &AdaptedWeights,
) -> Result<f64, AbcnnError> {
    let mut total = 0.0;
    for (input, labels) in data.inputs().iter().zip(data.labels()) {
        total += weighted_loss(&net.forward(input)?, labels, weights)?;
    }
    Ok(total)
}
