//! Fully-connected encoder from flattened images to Ising fields, with
//! backpropagation and Adam.
//!
//! Hidden layers use ReLU and the output layer is linear, so fields may take
//! either sign. Batches are stored column-wise: an `n_features × batch`
//! matrix holds one sample per column.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum::FieldVector;

pub const DEFAULT_HIDDEN_WIDTH: usize = 256;

/// Output-layer initialization gain used for training. Full Glorot scale puts
/// the initial fields at `O(1)`, where the fidelity between two images already
/// oscillates faster than any useful step at the default evolution time.
pub const DEFAULT_OUTPUT_GAIN: f64 = 0.1;

/// Affine map `x ↦ W x + b`, with `W` of shape `outputs × inputs`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { weights: DMatrix::zeros(outputs, inputs), bias: DVector::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    fn same_shape(&self, other: &DenseLayer) -> bool {
        self.weights.shape() == other.weights.shape() && self.bias.len() == other.bias.len()
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.bias.iter())
    }
}

/// Adam first and second moments, one pair of accumulators per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first: Vec<DenseLayer>,
    pub second: Vec<DenseLayer>,
    pub step: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    pub layers: Vec<DenseLayer>,
    pub adam: AdamState,
}

/// Gradients with the same layout as [`EncoderParams::layers`].
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderGrads {
    pub layers: Vec<DenseLayer>,
}

impl EncoderGrads {
    pub fn zeros_like(params: &EncoderParams) -> Self {
        Self { layers: params.layers.iter().map(|l| DenseLayer::zeros(l.inputs(), l.outputs())).collect() }
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(DenseLayer::values)
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            layer.weights *= factor;
            layer.bias *= factor;
        }
    }

    pub fn add_assign(&mut self, other: &EncoderGrads) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
    }
}

/// Per-epoch scaling of the learning rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[repr(u8)]
pub enum LrSchedule {
    Constant = 0,
    /// `½(1 + cos(π e / E))` at epoch `e` of `E`.
    #[default]
    Cosine = 1,
}

impl LrSchedule {
    pub fn factor(self, epoch: usize, epochs: usize) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Cosine if epochs == 0 => 1.0,
            Self::Cosine => 0.5 * (1.0 + (std::f64::consts::PI * epoch as f64 / epochs as f64).cos()),
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Self::Constant),
            1 => Some(Self::Cosine),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for LrSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(Self::Constant),
            "cosine" => Ok(Self::Cosine),
            other => Err(Error::InvalidArgument(format!("learning-rate schedule {other:?}: expected constant or cosine"))),
        }
    }
}

/// Optimizer and schedule settings for training.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Peak learning rate; see [`TrainConfig::lr_schedule`].
    pub learning_rate: f64,
    pub lr_schedule: LrSchedule,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Pairs per Adam step.
    pub batch_size: usize,
    /// Pairs drawn per epoch.
    pub n_pairs: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Widths of the hidden layers, input side first.
    pub hidden: Vec<usize>,
    pub same_class_fraction: f64,
    /// Swap-test shots per pair fidelity during training; 0 uses exact
    /// fidelities.
    pub swap_shots: u64,
    /// Scale of the output-layer initialization relative to Glorot.
    pub output_gain: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            lr_schedule: LrSchedule::Cosine,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 256,
            n_pairs: 50_000,
            epochs: 80,
            seed: 0,
            hidden: vec![DEFAULT_HIDDEN_WIDTH],
            same_class_fraction: 0.3,
            swap_shots: 0,
            output_gain: DEFAULT_OUTPUT_GAIN,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning rate {} must be > 0", self.learning_rate));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("{name} = {b} must lie in (0, 1)"));
            }
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon {} must be > 0", self.epsilon));
        }
        if self.batch_size == 0 || self.n_pairs == 0 {
            return bad("batch size and pair count must be positive".into());
        }
        if self.hidden.len() > 4 || self.hidden.contains(&0) {
            return bad(format!("hidden layers {:?}: at most 4 layers of nonzero width", self.hidden));
        }
        if !(self.output_gain > 0.0) || !self.output_gain.is_finite() {
            return bad(format!("output gain {} must be finite and > 0", self.output_gain));
        }
        if !(0.0..=1.0).contains(&self.same_class_fraction) {
            return bad(format!("same-class fraction {} outside [0, 1]", self.same_class_fraction));
        }
        Ok(())
    }

    /// Adam steps per epoch.
    /// Settings for one epoch, with the scheduled learning rate.
    pub fn for_epoch(&self, epoch: usize) -> TrainConfig {
        TrainConfig { learning_rate: self.learning_rate * self.lr_schedule.factor(epoch, self.epochs), ..self.clone() }
    }

    pub fn steps_per_epoch(&self) -> usize {
        self.n_pairs.div_ceil(self.batch_size)
    }
}

/// Glorot-uniform weights, zero biases, zero moments, default hidden layer.
pub fn init_encoder(n_features: usize, n_qubits: usize, seed: u64) -> EncoderParams {
    init_encoder_with(n_features, &[DEFAULT_HIDDEN_WIDTH], n_qubits, seed)
}

pub fn init_encoder_with(n_features: usize, hidden: &[usize], n_qubits: usize, seed: u64) -> EncoderParams {
    init_encoder_scaled(n_features, hidden, n_qubits, seed, 1.0)
}

/// As [`init_encoder_with`], with the output-layer weights multiplied by
/// `output_gain`.
pub fn init_encoder_scaled(
    n_features: usize,
    hidden: &[usize],
    n_qubits: usize,
    seed: u64,
    output_gain: f64,
) -> EncoderParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths: Vec<usize> = std::iter::once(n_features)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(n_qubits))
        .collect();
    let last = widths.len() - 2;
    let layers: Vec<DenseLayer> = widths
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let mut limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            if k == last {
                limit *= output_gain;
            }
            DenseLayer {
                weights: DMatrix::from_fn(fan_out, fan_in, |_, _| rng.random_range(-limit..=limit)),
                bias: DVector::zeros(fan_out),
            }
        })
        .collect();
    let zeros: Vec<DenseLayer> = layers.iter().map(|l| DenseLayer::zeros(l.inputs(), l.outputs())).collect();
    EncoderParams { layers, adam: AdamState { first: zeros.clone(), second: zeros, step: 0 } }
}

/// Activations retained by a forward pass for the matching backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// `activations[0]` is the input batch; `activations[k]` the output of
    /// hidden layer `k` after ReLU.
    activations: Vec<DMatrix<f64>>,
    /// Adam step of the parameters that produced this cache.
    step: u64,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.activations[0].ncols()
    }
}

impl EncoderParams {
    pub fn n_features(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn n_outputs(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::outputs)
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(DenseLayer::outputs).collect()
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(DenseLayer::values)
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    /// Forward pass over a column batch. Returns outputs (`n_outputs × batch`)
    /// and the cache for [`Self::backward_batch`].
    pub fn forward_batch(&self, inputs: DMatrix<f64>) -> Result<(DMatrix<f64>, ForwardCache)> {
        if inputs.nrows() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), found: inputs.nrows() });
        }
        let last = self.layers.len() - 1;
        let mut activations = vec![inputs];
        let mut output = None;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = &layer.weights * activations.last().expect("input present");
            for mut col in z.column_iter_mut() {
                col += &layer.bias;
            }
            if k == last {
                output = Some(z);
            } else {
                z.apply(|v| *v = v.max(0.0));
                activations.push(z);
            }
        }
        let output = output.expect("at least one layer");
        Ok((output, ForwardCache { activations, step: self.adam.step }))
    }

    /// Gradients of `Σ_columns ⟨grad_out, output⟩` with respect to every
    /// parameter. ReLU uses subgradient 0 at 0.
    pub fn backward_batch(&self, cache: &ForwardCache, grad_out: &DMatrix<f64>) -> Result<EncoderGrads> {
        if cache.step != self.adam.step || cache.activations.len() != self.layers.len() {
            return Err(Error::StaleCache);
        }
        if cache
            .activations
            .iter()
            .zip(&self.layers)
            .any(|(a, l)| a.nrows() != l.inputs() || a.ncols() != cache.batch_size())
        {
            return Err(Error::StaleCache);
        }
        if grad_out.nrows() != self.n_outputs() || grad_out.ncols() != cache.batch_size() {
            return Err(Error::DimensionMismatch {
                expected: self.n_outputs() * cache.batch_size(),
                found: grad_out.len(),
            });
        }
        let mut grads: Vec<DenseLayer> = Vec::with_capacity(self.layers.len());
        let mut delta = grad_out.clone();
        for k in (0..self.layers.len()).rev() {
            let input = &cache.activations[k];
            let weights = &delta * input.transpose();
            let bias = delta.column_sum();
            if k > 0 {
                let mut upstream = self.layers[k].weights.tr_mul(&delta);
                upstream.zip_apply(input, |d, a| {
                    if a <= 0.0 {
                        *d = 0.0
                    }
                });
                delta = upstream;
            }
            grads.push(DenseLayer { weights, bias });
        }
        grads.reverse();
        Ok(EncoderGrads { layers: grads })
    }
}

/// Fields for a single flattened image.
pub fn encoder_forward(params: &EncoderParams, x: &[f64]) -> Result<(FieldVector, ForwardCache)> {
    let (out, cache) = params.forward_batch(DMatrix::from_column_slice(x.len(), 1, x))?;
    Ok((FieldVector::new(out.column(0).iter().copied().collect())?, cache))
}

/// Parameter gradients of `h · grad_h` for the sample cached by [`encoder_forward`].
pub fn encoder_backward(params: &EncoderParams, cache: &ForwardCache, grad_h: &[f64]) -> Result<EncoderGrads> {
    if cache.batch_size() != 1 {
        return Err(Error::StaleCache);
    }
    params.backward_batch(cache, &DMatrix::from_column_slice(grad_h.len(), 1, grad_h))
}

/// One bias-corrected Adam update in place.
pub fn adam_step(params: &mut EncoderParams, grads: &EncoderGrads, config: &TrainConfig) -> Result<()> {
    if grads.layers.len() != params.layers.len()
        || grads.layers.iter().zip(&params.layers).any(|(g, p)| !g.same_shape(p))
    {
        return Err(Error::InvalidArgument("gradient shapes do not match the encoder".into()));
    }
    let adam = &mut params.adam;
    adam.step += 1;
    let t = adam.step as i32;
    let (b1, b2) = (config.beta1, config.beta2);
    let correction1 = 1.0 - b1.powi(t);
    let correction2 = 1.0 - b2.powi(t);
    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / correction1;
        let v_hat = *v / correction2;
        *p -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    };
    for (((layer, grad), m), v) in params.layers.iter_mut().zip(&grads.layers).zip(&mut adam.first).zip(&mut adam.second)
    {
        for (((p, &g), m), v) in layer
            .weights
            .iter_mut()
            .zip(grad.weights.iter())
            .zip(m.weights.iter_mut())
            .zip(v.weights.iter_mut())
        {
            update(p, g, m, v);
        }
        for (((p, &g), m), v) in layer.bias.iter_mut().zip(grad.bias.iter()).zip(m.bias.iter_mut()).zip(v.bias.iter_mut()) {
            update(p, g, m, v);
        }
    }
    Ok(())
}
