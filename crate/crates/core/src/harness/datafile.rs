//! Labeled-dataset and training-config files for the train/eval commands.
//!
//! ```text
//! dataset v1
//! dims 4 2
//! sample 0.5 -0.25 1.0 0.0 labels +-
//! ```
//!
//! ```text
//! trainconfig v1
//! batch-size 32
//! initial-lr 0.2
//! lr-decay-factor 0.8
//! decay-every-epochs 8
//! min-lr 1e-6
//! epochs 40
//! seed 17
//! hidden 8 4              # optional hidden layer sizes
//! target balanced         # or: target pos 0.3 0.7
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::HarnessError;
use crate::abcnn::{ClassDistribution, LabeledDataset, TrainConfig};

pub fn load_dataset<P: AsRef<Path>>(path: P) -> Result<LabeledDataset, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_dataset(&text, &path.display().to_string())
}

pub fn parse_dataset(text: &str, path: &str) -> Result<LabeledDataset, HarnessError> {
    let fail = |line: usize, message: String| HarnessError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut dims: Option<(usize, usize)> = None;
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    let mut saw_header = false;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "dataset" => {
                if tokens.get(1) != Some(&"v1") {
                    return Err(fail(line_no, "expected `dataset v1`".into()));
                }
                saw_header = true;
            }
            "dims" => {
                let d: usize = tokens
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| fail(line_no, "invalid input dimension".into()))?;
                let n: usize = tokens
                    .get(2)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| fail(line_no, "invalid attribute count".into()))?;
                dims = Some((d, n));
            }
            "sample" => {
                let Some((d, n)) = dims else {
                    return Err(fail(line_no, "`dims` must precede samples".into()));
                };
                if tokens.len() != 1 + d + 2 {
                    return Err(fail(
                        line_no,
                        format!("sample needs {d} features, `labels`, and a label string"),
                    ));
                }
                let features: Vec<f64> = tokens[1..1 + d]
                    .iter()
                    .map(|t| t.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| fail(line_no, "invalid feature value".into()))?;
                if tokens[1 + d] != "labels" {
                    return Err(fail(line_no, "expected `labels` keyword".into()));
                }
                let label_str = tokens[2 + d];
                if label_str.len() != n {
                    return Err(fail(line_no, format!("label string must have {n} entries")));
                }
                let mut row = Vec::with_capacity(n);
                for ch in label_str.chars() {
                    match ch {
                        '+' => row.push(1i8),
                        '-' => row.push(-1i8),
                        other => {
                            return Err(fail(line_no, format!("invalid label char `{other}`")))
                        }
                    }
                }
                inputs.push(features);
                labels.push(row);
            }
            other => return Err(fail(line_no, format!("unknown directive `{other}`"))),
        }
    }
    if !saw_header {
        return Err(fail(0, "missing `dataset v1` header".into()));
    }
    Ok(LabeledDataset::new(inputs, labels)?)
}

pub fn write_dataset<W: Write>(data: &LabeledDataset, mut w: W) -> Result<(), HarnessError> {
    writeln!(w, "dataset v1")?;
    writeln!(w, "dims {} {}", data.input_dim(), data.attr_count())?;
    for (input, labels) in data.inputs().iter().zip(data.labels()) {
        let features: Vec<String> = input.iter().map(|v| v.to_string()).collect();
        let label_str: String = labels.iter().map(|&l| if l > 0 { '+' } else { '-' }).collect();
        writeln!(w, "sample {} labels {}", features.join(" "), label_str)?;
    }
    Ok(())
}

pub fn save_dataset<P: AsRef<Path>>(data: &LabeledDataset, path: P) -> Result<(), HarnessError> {
    write_dataset(data, fs::File::create(path)?)
}

/// Training setup parsed from a config file: hyperparameters, optional
/// hidden layer sizes, and the target distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainFileConfig {
    pub config: TrainConfig,
    pub hidden: Vec<usize>,
    pub target_pos: Option<Vec<f64>>,
}

impl TrainFileConfig {
    /// Resolves the target distribution for an `attrs`-attribute dataset.
    pub fn target(&self, attrs: usize) -> Result<ClassDistribution, HarnessError> {
        match &self.target_pos {
            None => Ok(ClassDistribution::balanced(attrs)),
            Some(pos) => {
                let neg = pos.iter().map(|p| 1.0 - p).collect();
                Ok(ClassDistribution::new(pos.clone(), neg)?)
            }
        }
    }
}

pub fn load_train_config<P: AsRef<Path>>(path: P) -> Result<TrainFileConfig, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_train_config(&text, &path.display().to_string())
}

pub fn parse_train_config(text: &str, path: &str) -> Result<TrainFileConfig, HarnessError> {
    let fail = |line: usize, message: String| HarnessError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut config = TrainConfig::default();
    let mut hidden = Vec::new();
    let mut target_pos = None;
    let mut saw_header = false;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let value = |i: usize| -> Result<&str, HarnessError> {
            tokens
                .get(i)
                .copied()
                .ok_or_else(|| fail(line_no, format!("`{}` needs a value", tokens[0])))
        };
        match tokens[0] {
            "trainconfig" => {
                if tokens.get(1) != Some(&"v1") {
                    return Err(fail(line_no, "expected `trainconfig v1`".into()));
                }
                saw_header = true;
            }
            "batch-size" => {
                config.batch_size = value(1)?
                    .parse()
                    .map_err(|_| fail(line_no, "invalid batch size".into()))?
            }
            "initial-lr" => {
                config.initial_lr = value(1)?
                    .parse()
                    .map_err(|_| fail(line_no, "invalid learning rate".into()))?
            }
            "lr-decay-factor" => {
                config.lr_decay_factor = value(1)?
                    .parse()
                    .map_err(|_| fail(line_no, "invalid decay factor".into()))?
            }
            "decay-every-epochs" => {
                config.decay_every_epochs = value(1)?
                    .parse()
                    .map_err(|_| fail(line_no, "invalid decay interval".into()))?
            }
            "min-lr" => {
                config.min_lr = value(1)?
                    .parse()
                    .map_err(|_| fail(line_no, "invalid minimum rate".into()))?
            }
            "epochs" => {
                config.epochs = value(1)?
                    .parse()
                    .map_err(|_| fail(line_no, "invalid epoch count".into()))?
            }
            "seed" => {
                config.rng_seed = value(1)?
                    .parse()
                    .map_err(|_| fail(line_no, "invalid seed".into()))?
            }
            "hidden" => {
                hidden = tokens[1..]
                    .iter()
                    .map(|t| t.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| fail(line_no, "invalid hidden sizes".into()))?;
            }
            "target" => match value(1)? {
                "balanced" => target_pos = None,
                "pos" => {
                    let pos: Vec<f64> = tokens[2..]
                        .iter()
                        .map(|t| t.parse())
                        .collect::<Result<_, _>>()
                        .map_err(|_| fail(line_no, "invalid target fractions".into()))?;
                    if pos.is_empty() {
                        return Err(fail(line_no, "target pos needs fractions".into()));
                    }
                    target_pos = Some(pos);
                }
                other => return Err(fail(line_no, format!("unknown target `{other}`"))),
            },
            other => return Err(fail(line_no, format!("unknown directive `{other}`"))),
        }
    }
    if !saw_header {
        return Err(fail(0, "missing `trainconfig v1` header".into()));
    }
    config
        .validate()
        .map_err(|e| fail(0, e.to_string()))?;
    Ok(TrainFileConfig {
        config,
        hidden,
        target_pos,
    })
}
