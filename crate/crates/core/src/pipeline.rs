//! Comparator training and classifier inference.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data_io::Dataset;
use crate::encoder::{adam_step, init_encoder_scaled, EncoderGrads, EncoderParams, TrainConfig};
use crate::error::{Error, Result};
use crate::gradient::pair_gradient_from_jacobians;
use crate::measurement::{sample_shadow, sample_swap_test};
use crate::quantum::{initial_state, FieldVector, IsingSpec, Propagator, StateVector};

/// Attempts per pair before the stratum is declared impossible.
const MAX_PAIR_ATTEMPTS: usize = 1000;

/// Images encoded per forward pass outside of training.
const ENCODE_CHUNK: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledImage {
    /// Normalized pixels in `[−1, 1]`.
    pub pixels: Vec<f64>,
    pub label: usize,
}

/// Reference states of one class; its observable is their mean projector.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassObservable {
    pub class_id: usize,
    pub reference_states: Vec<StateVector>,
}

impl ClassObservable {
    /// `O = (1/N_S) Σ_k |Ψ_k⟩⟨Ψ_k|`.
    pub fn operator(&self) -> Result<DMatrix<C64>> {
        let first = self.reference_states.first().ok_or(Error::Empty("reference states"))?;
        let dim = first.dim();
        let mut op = DMatrix::<C64>::zeros(dim, dim);
        for psi in &self.reference_states {
            let v = psi.amplitudes();
            op.ger(C64::new(1.0, 0.0), v, &v.conjugate(), C64::new(1.0, 0.0));
        }
        Ok(op / C64::new(self.reference_states.len() as f64, 0.0))
    }

    /// Mean fidelity of `psi` with the reference states.
    pub fn exact_score(&self, psi: &StateVector) -> Result<f64> {
        if self.reference_states.is_empty() {
            return Err(Error::Empty("reference states"));
        }
        let mut total = 0.0;
        for r in &self.reference_states {
            total += r.inner(psi)?.norm_sqr();
        }
        Ok(total / self.reference_states.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelMetadata {
    pub dataset: String,
    pub n_features: usize,
    pub n_classes: usize,
    /// Reference states per class; 0 until observables are built.
    pub n_samples: usize,
    pub seed: u64,
    pub config: TrainConfig,
    /// Training draws a fresh pair set every epoch.
    pub resampled_pairs: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub encoder: EncoderParams,
    /// Coupling, qubit count and evolution time; fields are filled per image.
    pub spec_template: IsingSpec,
    pub observables: Vec<ClassObservable>,
    pub metadata: ModelMetadata,
}

/// Zero-field template with `J = 1`.
pub fn spec_template(n_qubits: usize, time: f64) -> Result<IsingSpec> {
    IsingSpec::with_unit_coupling(vec![0.0; n_qubits], time)
}

/// Default evolution time `t·J = 2·N_q`.
pub fn default_time(n_qubits: usize) -> f64 {
    2.0 * n_qubits as f64
}

fn stack_pixels<'a>(images: impl ExactSizeIterator<Item = &'a [f64]>, n_features: usize) -> Result<DMatrix<f64>> {
    let n = images.len();
    let mut data = Vec::with_capacity(n * n_features);
    for pixels in images {
        if pixels.len() != n_features {
            return Err(Error::DimensionMismatch { expected: n_features, found: pixels.len() });
        }
        data.extend_from_slice(pixels);
    }
    Ok(DMatrix::from_vec(n_features, n, data))
}

/// Encoder fields for each image.
pub fn encode_fields(encoder: &EncoderParams, images: &[&LabeledImage]) -> Result<Vec<FieldVector>> {
    let mut out = Vec::with_capacity(images.len());
    for chunk in images.chunks(ENCODE_CHUNK) {
        let x = stack_pixels(chunk.iter().map(|i| i.pixels.as_slice()), encoder.n_features())?;
        let (h, _) = encoder.forward_batch(x)?;
        for col in h.column_iter() {
            out.push(FieldVector::new(col.iter().copied().collect())?);
        }
    }
    Ok(out)
}

fn evolve_fields(template: &IsingSpec, fields: FieldVector, psi0: &StateVector) -> Result<StateVector> {
    Propagator::new(&template.with_fields(fields)?)?.evolve(psi0)
}

impl TrainedModel {
    pub fn n_qubits(&self) -> usize {
        self.spec_template.n_qubits()
    }

    pub fn n_classes(&self) -> usize {
        self.metadata.n_classes
    }

    /// Final states `e^{−iH(h(x))t}|0…0⟩` for each image.
    pub fn encode_states(&self, images: &[&LabeledImage]) -> Result<Vec<StateVector>> {
        let psi0 = initial_state(self.n_qubits())?;
        encode_fields(&self.encoder, images)?
            .into_iter()
            .map(|h| evolve_fields(&self.spec_template, h, &psi0))
            .collect()
    }

    pub fn encode_state(&self, image: &LabeledImage) -> Result<StateVector> {
        Ok(self.encode_states(&[image])?.remove(0))
    }

    fn check_complete(&self) -> Result<()> {
        if self.observables.len() != self.metadata.n_classes || self.observables.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "model has {} observables for {} classes",
                self.observables.len(),
                self.metadata.n_classes
            )));
        }
        Ok(())
    }
}

/// Draws `n_pairs` index pairs of distinct images. Each pair is same-class
/// with probability `same_class_fraction`; within a stratum every admissible
/// pair is equally likely.
pub fn sample_training_pairs<R: Rng + ?Sized>(
    dataset: &[LabeledImage],
    n_pairs: usize,
    same_class_fraction: f64,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if !(0.0..=1.0).contains(&same_class_fraction) {
        return Err(Error::OutOfRange { value: same_class_fraction, lo: 0.0, hi: 1.0 });
    }
    if dataset.len() < 2 {
        return Err(Error::InsufficientClass { class: 0, available: dataset.len(), required: 2 });
    }
    let n_classes = dataset.iter().map(|i| i.label).max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, item) in dataset.iter().enumerate() {
        members[item.label].push(i);
    }
    let populated = members.iter().filter(|m| !m.is_empty()).count();
    if same_class_fraction < 1.0 && populated < 2 {
        return Err(Error::InvalidArgument("different-class pairs need at least two classes".into()));
    }
    // same-class pairs are uniform over ordered pairs, so classes are weighted by n(n−1)
    let weights: Vec<f64> = members.iter().map(|m| (m.len() * m.len().saturating_sub(1)) as f64).collect();
    let same_class = WeightedIndex::new(&weights).ok();

    let mut pairs = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let want_same = rng.random::<f64>() < same_class_fraction;
        let mut found = None;
        for _ in 0..MAX_PAIR_ATTEMPTS {
            if want_same {
                let Some(dist) = &same_class else { break };
                let class = &members[dist.sample(rng)];
                let picked = index::sample(rng, class.len(), 2);
                found = Some((class[picked.index(0)], class[picked.index(1)]));
                break;
            }
            let a = rng.random_range(0..dataset.len());
            let b = rng.random_range(0..dataset.len());
            if dataset[a].label != dataset[b].label {
                found = Some((a, b));
                break;
            }
        }
        let pair = found.ok_or_else(|| {
            Error::Sampling(format!(
                "no {} pair found after {MAX_PAIR_ATTEMPTS} attempts",
                if want_same { "same-class" } else { "different-class" }
            ))
        })?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Mean loss and parameter gradients over a batch.
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub loss: f64,
    pub grads: EncoderGrads,
    pub fidelities: Vec<f64>,
}

/// `C = (1/B) Σ |F − δ|` over the batch, with exact fidelities.
pub fn comparator_batch(
    encoder: &EncoderParams,
    pairs: &[(&LabeledImage, &LabeledImage)],
    spec_template: &IsingSpec,
) -> Result<BatchOutcome> {
    comparator_batch_impl(encoder, pairs, spec_template, None::<(u64, &mut ChaCha8Rng)>)
}

/// As [`comparator_batch`], but the loss and its sign use swap-test
/// estimates from `shots` shots. The fidelity derivative stays exact.
pub fn comparator_batch_sampled<R: Rng + ?Sized>(
    encoder: &EncoderParams,
    pairs: &[(&LabeledImage, &LabeledImage)],
    spec_template: &IsingSpec,
    shots: u64,
    rng: &mut R,
) -> Result<BatchOutcome> {
    comparator_batch_impl(encoder, pairs, spec_template, Some((shots, rng)))
}

fn comparator_batch_impl<R: Rng + ?Sized>(
    encoder: &EncoderParams,
    pairs: &[(&LabeledImage, &LabeledImage)],
    spec_template: &IsingSpec,
    mut sampling: Option<(u64, &mut R)>,
) -> Result<BatchOutcome> {
    if pairs.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let n_q = spec_template.n_qubits();
    if encoder.n_outputs() != n_q {
        return Err(Error::DimensionMismatch { expected: n_q, found: encoder.n_outputs() });
    }
    let b = pairs.len();
    // columns 0..B hold first images, B..2B second images
    let images = pairs.iter().map(|p| p.0.pixels.as_slice()).chain(pairs.iter().map(|p| p.1.pixels.as_slice()));
    let x = stack_pixels(images.collect::<Vec<_>>().into_iter(), encoder.n_features())?;
    let (h, cache) = encoder.forward_batch(x)?;
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("encoder produced non-finite fields".into()));
    }

    let psi0 = initial_state(n_q)?;
    let jacobian = |col: usize| -> Result<_> {
        let fields = FieldVector::new(h.column(col).iter().copied().collect())?;
        Propagator::new(&spec_template.with_fields(fields)?)?.jacobian(&psi0)
    };
    let mut grad_h = DMatrix::<f64>::zeros(n_q, 2 * b);
    let mut loss = 0.0;
    let mut fidelities = Vec::with_capacity(b);
    for (k, (first, second)) in pairs.iter().enumerate() {
        let (ja, jb) = (jacobian(k)?, jacobian(b + k)?);
        let g = pair_gradient_from_jacobians(&ja, &jb)?;
        let target = if first.label == second.label { 1.0 } else { 0.0 };
        let f = match sampling.as_mut() {
            Some((shots, rng)) => sample_swap_test(&ja.state, &jb.state, *shots, &mut **rng)?.fidelity_estimate,
            None => g.fidelity,
        };
        fidelities.push(f);
        let deviation = f - target;
        loss += deviation.abs();
        let sign = if deviation > 0.0 {
            1.0
        } else if deviation < 0.0 {
            -1.0
        } else {
            0.0
        };
        let scale = sign / b as f64;
        for j in 0..n_q {
            grad_h[(j, k)] = scale * g.d_first.as_slice()[j];
            grad_h[(j, b + k)] = scale * g.d_second.as_slice()[j];
        }
    }
    let grads = encoder.backward_batch(&cache, &grad_h)?;
    Ok(BatchOutcome { loss: loss / b as f64, grads, fidelities })
}

/// Result of [`train_comparator`]: a model without observables and the mean
/// batch loss of every epoch.
#[derive(Clone, Debug)]
pub struct TrainingRun {
    pub model: TrainedModel,
    pub loss_history: Vec<f64>,
}

/// Trains the encoder for `epochs × ceil(n_pairs / batch_size)` Adam steps,
/// drawing a fresh pair set each epoch.
pub fn train_comparator(dataset: &Dataset, config: &TrainConfig, spec_template: &IsingSpec) -> Result<TrainingRun> {
    train_comparator_with(dataset, config, spec_template, |_, _| {})
}

/// As [`train_comparator`], calling `on_epoch(epoch, mean_loss)` after each
/// epoch.
pub fn train_comparator_with(
    dataset: &Dataset,
    config: &TrainConfig,
    spec_template: &IsingSpec,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainingRun> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let n_q = spec_template.n_qubits();
    let mut encoder = init_encoder_scaled(dataset.n_features, &config.hidden, n_q, config.seed, config.output_gain);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let pairs = sample_training_pairs(&dataset.items, config.n_pairs, config.same_class_fraction, &mut rng)?;
        let step_config = config.for_epoch(epoch);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in pairs.chunks(config.batch_size) {
            let batch: Vec<_> = chunk.iter().map(|&(a, b)| (&dataset.items[a], &dataset.items[b])).collect();
            let outcome = if config.swap_shots > 0 {
                comparator_batch_sampled(&encoder, &batch, spec_template, config.swap_shots, &mut rng)?
            } else {
                comparator_batch(&encoder, &batch, spec_template)?
            };
            adam_step(&mut encoder, &outcome.grads, &step_config)?;
            if !encoder.is_finite() {
                return Err(Error::Numerical(format!("non-finite encoder parameters in epoch {epoch}")));
            }
            total += outcome.loss;
            batches += 1;
        }
        let mean = total / batches as f64;
        on_epoch(epoch, mean);
        loss_history.push(mean);
    }
    let metadata = ModelMetadata {
        dataset: dataset.name.clone(),
        n_features: dataset.n_features,
        n_classes: dataset.n_classes,
        n_samples: 0,
        seed: config.seed,
        config: config.clone(),
        resampled_pairs: true,
    };
    let model = TrainedModel { encoder, spec_template: spec_template.clone(), observables: Vec::new(), metadata };
    Ok(TrainingRun { model, loss_history })
}

/// Draws `n_samples` distinct training images per class and stores their
/// encoded final states.
pub fn build_class_observables<R: Rng + ?Sized>(
    model: &TrainedModel,
    trainset: &Dataset,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<ClassObservable>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("N_S must be positive".into()));
    }
    let n_classes = model.metadata.n_classes.max(trainset.n_classes);
    let mut members: Vec<Vec<&LabeledImage>> = vec![Vec::new(); n_classes];
    for item in &trainset.items {
        members[item.label].push(item);
    }
    let mut observables = Vec::with_capacity(n_classes);
    for (class_id, class) in members.iter().enumerate() {
        if class.len() < n_samples {
            return Err(Error::InsufficientClass { class: class_id, available: class.len(), required: n_samples });
        }
        let chosen: Vec<&LabeledImage> = index::sample(rng, class.len(), n_samples).into_iter().map(|i| class[i]).collect();
        observables.push(ClassObservable { class_id, reference_states: model.encode_states(&chosen)? });
    }
    Ok(observables)
}

/// Attaches observables built from `trainset`.
pub fn with_observables<R: Rng + ?Sized>(
    mut model: TrainedModel,
    trainset: &Dataset,
    n_samples: usize,
    rng: &mut R,
) -> Result<TrainedModel> {
    model.observables = build_class_observables(&model, trainset, n_samples, rng)?;
    model.metadata.n_classes = model.observables.len();
    model.metadata.n_samples = n_samples;
    Ok(model)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    /// Classical shadow with the given number of snapshots.
    Shadow(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub label: usize,
    pub scores: Vec<f64>,
}

/// Index of the largest score; ties go to the smallest index.
pub fn argmax_label(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Per-model state reused across classifications.
struct Scorer<'a> {
    model: &'a TrainedModel,
    operators: Vec<DMatrix<C64>>,
}

impl<'a> Scorer<'a> {
    fn new(model: &'a TrainedModel, method: Method) -> Result<Self> {
        model.check_complete()?;
        let operators = match method {
            Method::Exact => Vec::new(),
            Method::Shadow(0) => return Err(Error::InvalidArgument("shadow classification needs M > 0".into())),
            Method::Shadow(_) => model.observables.iter().map(ClassObservable::operator).collect::<Result<_>>()?,
        };
        Ok(Self { model, operators })
    }

    fn scores<R: Rng + ?Sized>(&self, psi: &StateVector, method: Method, rng: &mut R) -> Result<Vec<f64>> {
        match method {
            Method::Exact => self.model.observables.iter().map(|o| o.exact_score(psi)).collect(),
            Method::Shadow(m) => {
                let rho = sample_shadow(psi, m, rng)?.density_estimate()?;
                Ok(self.operators.iter().map(|op| rho.component_mul(&op.transpose()).sum().re).collect())
            }
        }
    }
}

/// Scores `image` against every class observable and picks the best.
pub fn classify<R: Rng + ?Sized>(
    model: &TrainedModel,
    image: &LabeledImage,
    method: Method,
    rng: &mut R,
) -> Result<Classification> {
    let scorer = Scorer::new(model, method)?;
    let scores = scorer.scores(&model.encode_state(image)?, method, rng)?;
    Ok(Classification { label: argmax_label(&scores), scores })
}

/// Classifies every image. Shadow sampling for image `i` uses stream `i` of a
/// generator seeded with `seed`.
pub fn classify_all(
    model: &TrainedModel,
    images: &[LabeledImage],
    method: Method,
    seed: u64,
) -> Result<Vec<Classification>> {
    let scorer = Scorer::new(model, method)?;
    let mut out = Vec::with_capacity(images.len());
    for (c, chunk) in images.chunks(ENCODE_CHUNK).enumerate() {
        let refs: Vec<&LabeledImage> = chunk.iter().collect();
        for (k, psi) in model.encode_states(&refs)?.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((c * ENCODE_CHUNK + k) as u64);
            let scores = scorer.scores(psi, method, &mut rng)?;
            out.push(Classification { label: argmax_label(&scores), scores });
        }
    }
    Ok(out)
}

/// Fraction of correctly labeled images.
pub fn accuracy(labels: &[usize], predictions: &[Classification]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = labels.iter().zip(predictions).filter(|(l, p)| **l == p.label).count();
    hits as f64 / labels.len() as f64
}

pub fn test_accuracy(model: &TrainedModel, testset: &[LabeledImage], method: Method, seed: u64) -> Result<f64> {
    if testset.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let predictions = classify_all(model, testset, method, seed)?;
    let labels: Vec<usize> = testset.iter().map(|i| i.label).collect();
    Ok(accuracy(&labels, &predictions))
}
