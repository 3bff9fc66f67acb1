//! Labeled datasets and per-attribute label distributions.

use super::AbcnnError;

/// A multi-task dataset: `M` feature vectors of shared dimension `D`, each
/// with `N` binary attribute labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: Vec<Vec<f64>>,
    labels: Vec<Vec<i8>>,
}

impl LabeledDataset {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<Vec<i8>>) -> Result<Self, AbcnnError> {
        if inputs.is_empty() || labels.is_empty() {
            return Err(AbcnnError::EmptyDataset);
        }
        if inputs.len() != labels.len() {
            return Err(AbcnnError::Dimension {
                what: "label row count",
                expected: inputs.len(),
                got: labels.len(),
            });
        }
        let dim = inputs[0].len();
        for (index, input) in inputs.iter().enumerate() {
            if input.len() != dim {
                return Err(AbcnnError::InputDimension {
                    index,
                    expected: dim,
                    got: input.len(),
                });
            }
        }
        let attrs = labels[0].len();
        for (index, row) in labels.iter().enumerate() {
            if row.len() != attrs {
                return Err(AbcnnError::LabelShape {
                    index,
                    expected: attrs,
                    got: row.len(),
                });
            }
            if let Some(&value) = row.iter().find(|v| **v != 1 && **v != -1) {
                return Err(AbcnnError::BadLabel { index, value });
            }
        }
        Ok(Self { inputs, labels })
    }

    /// Number of samples `M`.
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Feature dimension `D`.
    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    /// Attribute count `N`.
    pub fn attr_count(&self) -> usize {
        self.labels[0].len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn labels(&self) -> &[Vec<i8>] {
        &self.labels
    }
}

/// Per-attribute positive/negative label fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl ClassDistribution {
    /// Builds a distribution, requiring `pos[i] + neg[i] = 1` within 1e-12
    /// and every fraction in `[0, 1]`.
    pub fn new(pos: Vec<f64>, neg: Vec<f64>) -> Result<Self, AbcnnError> {
        if pos.len() != neg.len() {
            return Err(AbcnnError::Dimension {
                what: "negative fraction count",
                expected: pos.len(),
                got: neg.len(),
            });
        }
        if pos.is_empty() {
            return Err(AbcnnError::BadDistribution("no attributes".into()));
        }
        for (i, (&p, &n)) in pos.iter().zip(neg.iter()).enumerate() {
            if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&n) {
                return Err(AbcnnError::BadDistribution(format!(
                    "attribute {i}: fractions {p} / {n} out of [0, 1]"
                )));
            }
            if (p + n - 1.0).abs() > 1e-12 {
                return Err(AbcnnError::BadDistribution(format!(
                    "attribute {i}: fractions {p} + {n} do not sum to 1"
                )));
            }
        }
        Ok(Self { pos, neg })
    }

    /// The balanced distribution: every attribute 50/50.
    pub fn balanced(attrs: usize) -> Self {
        Self {
            pos: vec![0.5; attrs],
            neg: vec![0.5; attrs],
        }
    }

    pub fn attr_count(&self) -> usize {
        self.pos.len()
    }

    pub fn pos(&self) -> &[f64] {
        &self.pos
    }

    pub fn neg(&self) -> &[f64] {
        &self.neg
    }

    /// True when every attribute has both classes represented.
    pub fn is_nondegenerate(&self) -> bool {
        self.pos.iter().all(|&p| p > 0.0 && p < 1.0)
    }
}

/// Counts per-attribute positive fractions over a dataset. With `strict`
/// set, an attribute whose labels are all one class is rejected, since a
/// degenerate column cannot anchor adapted weights.
pub fn compute_distribution(
    dataset: &LabeledDataset,
    strict: bool,
) -> Result<ClassDistribution, AbcnnError> {
    let m = dataset.len() as f64;
    let attrs = dataset.attr_count();
    let mut pos = vec![0.0f64; attrs];
    for row in dataset.labels() {
        for (i, &label) in row.iter().enumerate() {
            if label > 0 {
                pos[i] += 1.0;
            }
        }
    }
    for p in &mut pos {
        *p /= m;
    }
    if strict {
        for (attr, &p) in pos.iter().enumerate() {
            if p == 0.0 || p == 1.0 {
                return Err(AbcnnError::DegenerateColumn {
                    attr,
                    value: if p == 1.0 { 1 } else { -1 },
                });
            }
        }
    }
    let neg = pos.iter().map(|&p| 1.0 - p).collect();
    ClassDistribution::new(pos, neg)
}
