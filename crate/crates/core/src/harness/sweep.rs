//! Threshold sweep: count matched-pair and mismatched-pair acceptances at
//! each candidate threshold.
//!
//! Batch file format:
//!
//! ```text
//! sweepbatch v1
//! seed 7
//! pair matched <vector> flips 1        # same person, noisy second reading
//! pair mismatched <vector> <vector>    # two different persons
//! ```

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::HarnessError;
use crate::attributes::{AttributeSchema, AttributeVector};

/// One comparison trial.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepTrial {
    /// Two readings of the same person: the base vector against a copy
    /// with `flips` noisy attributes.
    Matched { base: AttributeVector, flips: usize },
    /// Readings of two different persons, with optional noise on the
    /// second.
    Mismatched {
        first: AttributeVector,
        second: AttributeVector,
        flips: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepBatch {
    pub seed: u64,
    pub trials: Vec<SweepTrial>,
}

/// Counts for one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepRow {
    pub threshold: u32,
    /// Matched pairs accepted: same person recognized.
    pub true_positives: usize,
    /// Mismatched pairs accepted: different persons conflated.
    pub false_positives: usize,
    pub matched_trials: usize,
    pub mismatched_trials: usize,
}

/// Materializes every trial's pair once (noise drawn from the batch seed)
/// and counts acceptances per threshold. Both counts are nondecreasing in
/// the threshold since the underlying differences are fixed.
pub fn threshold_sweep(
    batch: &SweepBatch,
    thresholds: &[u32],
) -> Result<Vec<SweepRow>, HarnessError> {
    if batch.trials.is_empty() {
        return Err(HarnessError::EmptySweep);
    }
    if thresholds.is_empty() {
        return Err(HarnessError::NoThresholds);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(batch.seed);
    // (diff, is_matched_pair) per trial, in declaration order.
    let mut diffs = Vec::with_capacity(batch.trials.len());
    for trial in &batch.trials {
        match trial {
            SweepTrial::Matched { base, flips } => {
                let noisy = flip_noise(base, *flips, &mut rng);
                diffs.push((base.attribute_diff(&noisy)?, true));
            }
            SweepTrial::Mismatched {
                first,
                second,
                flips,
            } => {
                let noisy = flip_noise(second, *flips, &mut rng);
                diffs.push((first.attribute_diff(&noisy)?, false));
            }
        }
    }
    let matched_trials = diffs.iter().filter(|(_, m)| *m).count();
    let mismatched_trials = diffs.len() - matched_trials;
    Ok(thresholds
        .iter()
        .map(|&threshold| {
            let true_positives = diffs
                .iter()
                .filter(|(d, m)| *m && *d <= threshold)
                .count();
            let false_positives = diffs
                .iter()
                .filter(|(d, m)| !*m && *d <= threshold)
                .count();
            SweepRow {
                threshold,
                true_positives,
                false_positives,
                matched_trials,
                mismatched_trials,
            }
        })
        .collect())
}

fn flip_noise(
    vector: &AttributeVector,
    flips: usize,
    rng: &mut ChaCha12Rng,
) -> AttributeVector {
    if flips == 0 {
        return vector.clone();
    }
    let indices = rand::seq::index::sample(rng, vector.len(), flips).into_vec();
    vector.with_flipped(&indices)
}

pub fn load_sweep_batch<P: AsRef<Path>>(path: P) -> Result<SweepBatch, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_sweep_batch(&text, &path.display().to_string())
}

pub fn parse_sweep_batch(text: &str, path: &str) -> Result<SweepBatch, HarnessError> {
    let fail = |line: usize, message: String| HarnessError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut seed = 0u64;
    let mut raw: Vec<(usize, Vec<String>)> = Vec::new();
    let mut saw_header = false;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "sweepbatch" => {
                if tokens.get(1) != Some(&"v1") {
                    return Err(fail(line_no, "expected `sweepbatch v1`".into()));
                }
                saw_header = true;
            }
            "seed" => {
                seed = tokens
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| fail(line_no, "invalid seed".into()))?;
            }
            "pair" => {
                if tokens.len() < 3 {
                    return Err(fail(line_no, "pair needs a kind and a vector".into()));
                }
                raw.push((line_no, tokens.iter().map(|t| t.to_string()).collect()));
            }
            other => return Err(fail(line_no, format!("unknown directive `{other}`"))),
        }
    }
    if !saw_header {
        return Err(fail(0, "missing `sweepbatch v1` header".into()));
    }

    // Vector length from the first pair fixes the schema.
    let first_vec = raw
        .iter()
        .filter_map(|(_, tokens)| tokens.get(2))
        .next()
        .ok_or_else(|| fail(0, "batch declares no pairs".into()))?;
    let n = first_vec.chars().count();
    let schema = if n == 16 {
        AttributeSchema::default_schema()
    } else {
        AttributeSchema::synthetic(n)?
    };

    let mut trials = Vec::with_capacity(raw.len());
    for (line_no, tokens) in raw {
        let decode = |s: &str| {
            AttributeVector::decode(s, &schema)
                .map_err(|e| fail(line_no, e.to_string()))
        };
        let kind = tokens
            .get(1)
            .ok_or_else(|| fail(line_no, "pair needs a kind".into()))?;
        match kind.as_str() {
            "matched" => {
                let base = decode(
                    tokens
                        .get(2)
                        .ok_or_else(|| fail(line_no, "matched pair needs a vector".into()))?,
                )?;
                let flips = parse_flips(&tokens, 3, line_no, path)?;
                trials.push(SweepTrial::Matched { base, flips });
            }
            "mismatched" => {
                let first = decode(
                    tokens
                        .get(2)
                        .ok_or_else(|| fail(line_no, "mismatched pair needs two vectors".into()))?,
                )?;
                let second = decode(
                    tokens
                        .get(3)
                        .ok_or_else(|| fail(line_no, "mismatched pair needs two vectors".into()))?,
                )?;
                let flips = parse_flips(&tokens, 4, line_no, path)?;
                trials.push(SweepTrial::Mismatched {
                    first,
                    second,
                    flips,
                });
            }
            other => return Err(fail(line_no, format!("unknown pair kind `{other}`"))),
        }
    }
    Ok(SweepBatch { seed, trials })
}

fn parse_flips(
    tokens: &[String],
    at: usize,
    line_no: usize,
    path: &str,
) -> Result<usize, HarnessError> {
    match tokens.get(at).map(String::as_str) {
        None => Ok(0),
        Some("flips") => tokens
            .get(at + 1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| HarnessError::Parse {
                path: path.to_string(),
                line: line_no,
                message: "invalid flip count".into(),
            }),
        Some(other) => Err(HarnessError::Parse {
            path: path.to_string(),
            line: line_no,
            message: format!("unexpected token `{other}`"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn schema4() -> Arc<AttributeSchema> {
        AttributeSchema::synthetic(4).unwrap()
    }

    fn vec_of(s: &str) -> AttributeVector {
        AttributeVector::decode(s, &schema4()).unwrap()
    }

    #[test]
    fn zero_noise_matched_pairs_all_accept_at_zero() {
        let batch = SweepBatch {
            seed: 1,
            trials: vec![
                SweepTrial::Matched {
                    base: vec_of("++--"),
                    flips: 0,
                },
                SweepTrial::Matched {
                    base: vec_of("+-+-"),
                    flips: 0,
                },
                SweepTrial::Mismatched {
                    first: vec_of("++++"),
                    second: vec_of("----"),
                    flips: 0,
                },
            ],
        };
        let rows = threshold_sweep(&batch, &[0, 1, 2]).unwrap();
        assert_eq!(rows[0].true_positives, 2);
        assert_eq!(rows[0].false_positives, 0);
        assert_eq!(rows[0].matched_trials, 2);
        assert_eq!(rows[0].mismatched_trials, 1);
    }

    #[test]
    fn counts_nondecreasing_in_threshold() {
        let mut trials = Vec::new();
        for i in 0..10 {
            trials.push(SweepTrial::Matched {
                base: vec_of(if i % 2 == 0 { "++--" } else { "-+-+" }),
                flips: i % 3,
            });
            trials.push(SweepTrial::Mismatched {
                first: vec_of("++++"),
                second: vec_of(if i % 2 == 0 { "+---" } else { "--++" }),
                flips: i % 2,
            });
        }
        let batch = SweepBatch { seed: 5, trials };
        let rows = threshold_sweep(&batch, &[0, 1, 2, 3, 4]).unwrap();
        for pair in rows.windows(2) {
            assert!(pair[1].true_positives >= pair[0].true_positives);
            assert!(pair[1].false_positives >= pair[0].false_positives);
        }
        // At the full threshold everything matches.
        let last = rows.last().unwrap();
        assert_eq!(last.true_positives, last.matched_trials);
        assert_eq!(last.false_positives, last.mismatched_trials);
    }

    #[test]
    fn sweep_is_deterministic() {
        let batch = SweepBatch {
            seed: 9,
            trials: vec![
                SweepTrial::Matched {
                    base: vec_of("++--"),
                    flips: 2,
                },
                SweepTrial::Matched {
                    base: vec_of("----"),
                    flips: 1,
                },
            ],
        };
        assert_eq!(
            threshold_sweep(&batch, &[0, 1]).unwrap(),
            threshold_sweep(&batch, &[0, 1]).unwrap()
        );
    }

    #[test]
    fn empty_inputs_rejected() {
        let batch = SweepBatch {
            seed: 0,
            trials: vec![],
        };
        assert!(matches!(
            threshold_sweep(&batch, &[0]),
            Err(HarnessError::EmptySweep)
        ));
        let batch = SweepBatch {
            seed: 0,
            trials: vec![SweepTrial::Matched {
                base: vec_of("++--"),
                flips: 0,
            }],
        };
        assert!(matches!(
            threshold_sweep(&batch, &[]),
            Err(HarnessError::NoThresholds)
        ));
    }

    #[test]
    fn batch_file_parses() {
        let text = "sweepbatch v1\n\
                    seed 7\n\
                    pair matched ++-- flips 1\n\
                    pair mismatched ++++ ---- \n\
                    pair mismatched ++++ --++ flips 1\n";
        let batch = parse_sweep_batch(text, "test").unwrap();
        assert_eq!(batch.seed, 7);
        assert_eq!(batch.trials.len(), 3);
        assert!(matches!(
            batch.trials[0],
            SweepTrial::Matched { flips: 1, .. }
        ));
        assert!(matches!(
            batch.trials[2],
            SweepTrial::Mismatched { flips: 1, .. }
        ));
    }

    #[test]
    fn batch_parse_errors_have_lines() {
        let text = "sweepbatch v1\npair matched\n";
        match parse_sweep_batch(text, "test") {
            Err(HarnessError::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error at line 2, got {other:?}"),
        }
    }
}
