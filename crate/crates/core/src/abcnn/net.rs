//! The micro network: a stack of affine layers with rectified hidden units
//! and a linear output, small enough for exhaustive gradient verification.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::{loss_gradient, AbcnnError, AdaptedWeights};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layer {
    /// Row-major `out x in` weight matrix.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeroed(rows: usize, cols: usize) -> Self {
        Self {
            weights: vec![0.0; rows * cols],
            biases: vec![0.0; rows],
        }
    }
}

/// Activations recorded during a forward pass, for backpropagation and for
/// locating rectifier kinks during finite-difference checks.
pub(crate) struct ForwardTrace {
    /// Pre-activation of every layer, in layer order.
    pub pre: Vec<Vec<f64>>,
    /// Post-activation of every layer (rectified for hidden, identity for
    /// the output layer).
    pub post: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("network has layers")
    }

    /// Smallest hidden pre-activation magnitude, or infinity when the
    /// network has no hidden layers.
    pub fn min_hidden_preactivation(&self) -> f64 {
        let hidden = self.pre.len() - 1;
        self.pre[..hidden]
            .iter()
            .flatten()
            .fold(f64::INFINITY, |acc, &z| acc.min(z.abs()))
    }

    /// Signs of every hidden pre-activation, flattened in layer order.
    pub fn hidden_sign_pattern(&self) -> Vec<bool> {
        let hidden = self.pre.len() - 1;
        self.pre[..hidden]
            .iter()
            .flatten()
            .map(|&z| z > 0.0)
            .collect()
    }
}

/// Per-parameter gradients, in the network's own layer shape.
#[derive(Debug, Clone)]
pub(crate) struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    fn zeroed_like(net: &MicroNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Layer::zeroed(l.biases.len(), l.weights.len() / l.biases.len()))
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            for (a, b) in mine.weights.iter_mut().zip(&theirs.weights) {
                *a += b;
            }
            for (a, b) in mine.biases.iter_mut().zip(&theirs.biases) {
                *a += b;
            }
        }
    }

    pub fn param(&self, index: usize) -> f64 {
        let (layer, in_biases, offset) = locate(self.layers.iter().map(layer_dims), index);
        let l = &self.layers[layer];
        if in_biases {
            l.biases[offset]
        } else {
            l.weights[offset]
        }
    }
}

fn layer_dims(layer: &Layer) -> (usize, usize) {
    (layer.weights.len(), layer.biases.len())
}

/// Maps a flat parameter index to (layer, is-bias, offset). Weights come
/// before biases within each layer.
fn locate(dims: impl Iterator<Item = (usize, usize)>, mut index: usize) -> (usize, bool, usize) {
    for (layer, (nweights, nbiases)) in dims.enumerate() {
        if index < nweights {
            return (layer, false, index);
        }
        index -= nweights;
        if index < nbiases {
            return (layer, true, index);
        }
        index -= nbiases;
    }
    panic!("parameter index out of range");
}

/// A fully-connected network: `layer_sizes = [D, h1, ..., N]`, rectified
/// hidden activations, identity output.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroNetwork {
    layer_sizes: Vec<usize>,
    layers: Vec<Layer>,
}

impl MicroNetwork {
    fn validate_sizes(layer_sizes: &[usize]) -> Result<(), AbcnnError> {
        if layer_sizes.len() < 2 {
            return Err(AbcnnError::BadArchitecture);
        }
        if layer_sizes.contains(&0) {
            return Err(AbcnnError::ZeroLayerSize);
        }
        Ok(())
    }

    /// All-zero parameters: forward output is the zero vector.
    pub fn zeroed(layer_sizes: &[usize]) -> Result<Self, AbcnnError> {
        Self::validate_sizes(layer_sizes)?;
        let layers = layer_sizes
            .windows(2)
            .map(|w| Layer::zeroed(w[1], w[0]))
            .collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            layers,
        })
    }

    /// Seeded initialization: weights uniform in
    /// `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn seeded_init(layer_sizes: &[usize], seed: u64) -> Result<Self, AbcnnError> {
        let mut net = Self::zeroed(layer_sizes)?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for (layer, w) in net.layers.iter_mut().zip(layer_sizes.windows(2)) {
            let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
            for weight in &mut layer.weights {
                *weight = (2.0 * rng.random::<f64>() - 1.0) * limit;
            }
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("validated sizes")
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn get_param(&self, index: usize) -> f64 {
        let (layer, in_biases, offset) = locate(self.layers.iter().map(layer_dims), index);
        let l = &self.layers[layer];
        if in_biases {
            l.biases[offset]
        } else {
            l.weights[offset]
        }
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        let (layer, in_biases, offset) = locate(self.layers.iter().map(layer_dims), index);
        let l = &mut self.layers[layer];
        if in_biases {
            l.biases[offset] = value;
        } else {
            l.weights[offset] = value;
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<(), AbcnnError> {
        if input.len() != self.input_dim() {
            return Err(AbcnnError::Dimension {
                what: "input dimension",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Evaluates the decision functions `f(x)`.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, AbcnnError> {
        Ok(self.forward_trace(input)?.post.pop().expect("has layers"))
    }

    pub(crate) fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace, AbcnnError> {
        self.check_input(input)?;
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut current: Vec<f64> = input.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let fan_in = current.len();
            let mut z = layer.biases.clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &layer.weights[o * fan_in..(o + 1) * fan_in];
                *zo += row
                    .iter()
                    .zip(current.iter())
                    .map(|(w, x)| w * x)
                    .sum::<f64>();
            }
            let activated: Vec<f64> = if li == last {
                z.clone()
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            pre.push(z);
            post.push(activated.clone());
            current = activated;
        }
        Ok(ForwardTrace { pre, post })
    }

    /// Backpropagates the weighted squared-error loss for one sample,
    /// returning per-parameter gradients.
    pub(crate) fn loss_gradients(
        &self,
        input: &[f64],
        labels: &[i8],
        weights: &AdaptedWeights,
    ) -> Result<(ForwardTrace, Gradients), AbcnnError> {
        let trace = self.forward_trace(input)?;
        let mut grads = Gradients::zeroed_like(self);
        // Output layer is linear, so its delta is the loss gradient itself.
        let mut delta = loss_gradient(trace.output(), labels, weights)?;
        for li in (0..self.layers.len()).rev() {
            let below: &[f64] = if li == 0 { input } else { &trace.post[li - 1] };
            let fan_in = below.len();
            {
                let g = &mut grads.layers[li];
                for (o, &d) in delta.iter().enumerate() {
                    g.biases[o] = d;
                    let row = &mut g.weights[o * fan_in..(o + 1) * fan_in];
                    for (w, &x) in row.iter_mut().zip(below.iter()) {
                        *w = d * x;
                    }
                }
            }
            if li > 0 {
                let layer = &self.layers[li];
                let mut next = vec![0.0f64; fan_in];
                for (o, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[o * fan_in..(o + 1) * fan_in];
                    for (nx, &w) in next.iter_mut().zip(row.iter()) {
                        *nx += w * d;
                    }
                }
                // Rectifier gate from the recorded pre-activations.
                for (nx, &z) in next.iter_mut().zip(trace.pre[li - 1].iter()) {
                    if z <= 0.0 {
                        *nx = 0.0;
                    }
                }
                delta = next;
            }
        }
        Ok((trace, grads))
    }

    /// Applies one gradient-descent step: `theta -= rate * grads`.
    pub(crate) fn apply_gradients(&mut self, grads: &Gradients, rate: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
                *w -= rate * gw;
            }
            for (b, gb) in layer.biases.iter_mut().zip(&g.biases) {
                *b -= rate * gb;
            }
        }
    }

    /// Writes the versioned checkpoint: layer sizes, then each layer's
    /// weights (row-major) and biases. Floats use the shortest decimal form
    /// that parses back to the identical value.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<(), AbcnnError> {
        writeln!(w, "netcheckpoint v1")?;
        let sizes: Vec<String> = self.layer_sizes.iter().map(|s| s.to_string()).collect();
        writeln!(w, "layers {}", sizes.join(" "))?;
        for (i, layer) in self.layers.iter().enumerate() {
            let weights: Vec<String> = layer.weights.iter().map(|v| v.to_string()).collect();
            writeln!(w, "weights {} {}", i, weights.join(" "))?;
            let biases: Vec<String> = layer.biases.iter().map(|v| v.to_string()).collect();
            writeln!(w, "biases {} {}", i, biases.join(" "))?;
        }
        writeln!(w, "end")?;
        Ok(())
    }

    pub fn save_checkpoint<P: AsRef<Path>>(&self, path: P) -> Result<(), AbcnnError> {
        let mut file = fs::File::create(path)?;
        self.write_checkpoint(&mut file)
    }

    pub fn read_checkpoint<R: BufRead>(reader: R) -> Result<Self, AbcnnError> {
        let bad = |msg: &str| AbcnnError::BadCheckpoint(msg.to_string());
        let mut lines = reader.lines();
        let mut next_line = || -> Result<String, AbcnnError> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| bad("unexpected end of file"))
        };
        if next_line()?.trim() != "netcheckpoint v1" {
            return Err(bad("missing `netcheckpoint v1` header"));
        }
        let sizes_line = next_line()?;
        let mut parts = sizes_line.split_whitespace();
        if parts.next() != Some("layers") {
            return Err(bad("expected `layers` record"));
        }
        let layer_sizes: Vec<usize> = parts
            .map(|t| t.parse().map_err(|_| bad("invalid layer size")))
            .collect::<Result<_, _>>()?;
        let mut net = Self::zeroed(&layer_sizes)?;
        for i in 0..net.layers.len() {
            let wline = next_line()?;
            parse_param_line(&wline, "weights", i, &mut net.layers[i].weights)?;
            let bline = next_line()?;
            parse_param_line(&bline, "biases", i, &mut net.layers[i].biases)?;
        }
        if next_line()?.trim() != "end" {
            return Err(bad("missing `end` record"));
        }
        Ok(net)
    }

    pub fn load_checkpoint<P: AsRef<Path>>(path: P) -> Result<Self, AbcnnError> {
        Self::read_checkpoint(BufReader::new(fs::File::open(path)?))
    }
}

fn parse_param_line(
    line: &str,
    kind: &str,
    layer: usize,
    dest: &mut [f64],
) -> Result<(), AbcnnError> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(kind) {
        return Err(AbcnnError::BadCheckpoint(format!(
            "expected `{kind}` record for layer {layer}"
        )));
    }
    match parts.next().and_then(|t| t.parse::<usize>().ok()) {
        Some(idx) if idx == layer => {}
        _ => {
            return Err(AbcnnError::BadCheckpoint(format!(
                "{kind} record out of order, expected layer {layer}"
            )))
        }
    }
    let values: Vec<f64> = parts
        .map(|t| {
            t.parse()
                .map_err(|_| AbcnnError::BadCheckpoint(format!("invalid float `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    if values.len() != dest.len() {
        return Err(AbcnnError::BadCheckpoint(format!(
            "layer {layer} {kind}: expected {} values, got {}",
            dest.len(),
            values.len()
        )));
    }
    dest.copy_from_slice(&values);
    Ok(())
}
