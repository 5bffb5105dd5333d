//! Classical-only baseline: the same network trained with a mean-squared
//! error toward fixed class targets, read out by nearest class centroid.
//!
//! Class `c` targets the hypercube corner whose coordinate `j` is `+1` when
//! bit `N_q − 1 − j` of `c` is set and `−1` otherwise, so the `N_c` targets
//! are distinct whenever `2^{N_q} ≥ N_c`.

use hqnc_core::data_io::Dataset;
use hqnc_core::encoder::{adam_step, init_encoder_scaled, EncoderParams, TrainConfig};
use hqnc_core::pipeline::{encode_fields, LabeledImage};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ExperimentError, Result};

pub fn class_target(class: usize, n_outputs: usize) -> DVector<f64> {
    DVector::from_fn(n_outputs, |j, _| if (class >> (n_outputs - 1 - j)) & 1 == 1 { 1.0 } else { -1.0 })
}

#[derive(Clone, Debug)]
pub struct BaselineModel {
    pub encoder: EncoderParams,
    /// Mean network output of each class on the training set.
    pub centroids: Vec<DVector<f64>>,
    pub loss_history: Vec<f64>,
}

/// Trains with the same optimizer, step count and images per step as the
/// comparator: `epochs × ceil(n_pairs / batch_size)` Adam steps over batches
/// of `2 · batch_size` images.
pub fn train_baseline(train: &Dataset, n_outputs: usize, config: &TrainConfig) -> Result<BaselineModel> {
    config.validate()?;
    if train.is_empty() {
        return Err(ExperimentError::InvalidArgument("empty training set".into()));
    }
    if n_outputs < usize::BITS as usize && (1usize << n_outputs) < train.n_classes {
        return Err(ExperimentError::InvalidArgument(format!(
            "{} classes need at least {} outputs",
            train.n_classes,
            train.n_classes.next_power_of_two().trailing_zeros()
        )));
    }
    let mut encoder = init_encoder_scaled(train.n_features, &config.hidden, n_outputs, config.seed, config.output_gain);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let targets: Vec<DVector<f64>> = (0..train.n_classes).map(|c| class_target(c, n_outputs)).collect();
    let batch = 2 * config.batch_size;
    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let step_config = config.for_epoch(epoch);
        let mut total = 0.0;
        let mut remaining = 2 * config.n_pairs;
        let mut steps = 0;
        while remaining > 0 {
            let size = batch.min(remaining);
            remaining -= size;
            let picks: Vec<usize> = (0..size).map(|_| rng.random_range(0..train.len())).collect();
            let mut x = DMatrix::zeros(train.n_features, size);
            for (col, &i) in picks.iter().enumerate() {
                x.column_mut(col).copy_from_slice(&train.items[i].pixels);
            }
            let (y, cache) = encoder.forward_batch(x)?;
            let mut grad = y;
            let mut loss = 0.0;
            for (col, &i) in picks.iter().enumerate() {
                let mut c = grad.column_mut(col);
                c -= &targets[train.items[i].label];
                loss += c.norm_squared();
            }
            let scale = 1.0 / (size * n_outputs) as f64;
            grad *= 2.0 * scale;
            let grads = encoder.backward_batch(&cache, &grad)?;
            adam_step(&mut encoder, &grads, &step_config)?;
            if !encoder.is_finite() {
                return Err(hqnc_core::Error::Numerical("non-finite baseline parameters".into()).into());
            }
            total += loss * scale;
            steps += 1;
        }
        loss_history.push(total / steps as f64);
    }
    let centroids = class_centroids(&encoder, train)?;
    Ok(BaselineModel { encoder, centroids, loss_history })
}

fn outputs(encoder: &EncoderParams, images: &[LabeledImage]) -> Result<Vec<DVector<f64>>> {
    let refs: Vec<&LabeledImage> = images.iter().collect();
    Ok(encode_fields(encoder, &refs)?.into_iter().map(|h| DVector::from_vec(h.into_vec())).collect())
}

fn class_centroids(encoder: &EncoderParams, train: &Dataset) -> Result<Vec<DVector<f64>>> {
    let mut sums = vec![DVector::zeros(encoder.n_outputs()); train.n_classes];
    let mut counts = vec![0usize; train.n_classes];
    for (out, item) in outputs(encoder, &train.items)?.into_iter().zip(&train.items) {
        sums[item.label] += out;
        counts[item.label] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, n)| if n == 0 { DVector::from_element(s.len(), f64::INFINITY) } else { s / n as f64 })
        .collect())
}

impl BaselineModel {
    /// Nearest centroid; ties go to the smallest class index.
    pub fn predict(&self, images: &[LabeledImage]) -> Result<Vec<usize>> {
        Ok(outputs(&self.encoder, images)?
            .iter()
            .map(|y| {
                let mut best = (0, f64::INFINITY);
                for (c, centroid) in self.centroids.iter().enumerate() {
                    let d = (y - centroid).norm_squared();
                    if d < best.1 {
                        best = (c, d);
                    }
                }
                best.0
            })
            .collect())
    }

    pub fn accuracy(&self, images: &[LabeledImage]) -> Result<f64> {
        if images.is_empty() {
            return Err(ExperimentError::InvalidArgument("empty test set".into()));
        }
        let hits = self.predict(images)?.iter().zip(images).filter(|(p, i)| **p == i.label).count();
        Ok(hits as f64 / images.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, n_classes: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let items = (0..n)
            .map(|i| {
                let label = i % n_classes;
                let centre = -1.0 + 2.0 * label as f64 / n_classes.max(2) as f64;
                let pixels = (0..6).map(|_| (centre + rng.random_range(-0.05..0.05f64)).clamp(-1.0, 1.0)).collect();
                LabeledImage { pixels, label }
            })
            .collect();
        Dataset { name: "toy".into(), items, n_features: 6, n_classes }
    }

    fn config() -> TrainConfig {
        TrainConfig { batch_size: 16, n_pairs: 64, epochs: 10, hidden: vec![16], learning_rate: 1e-2, ..TrainConfig::default() }
    }

    #[test]
    fn targets_are_distinct_corners() {
        assert_eq!(class_target(0, 2).as_slice(), &[-1.0, -1.0]);
        assert_eq!(class_target(2, 2).as_slice(), &[1.0, -1.0]);
        let all: Vec<_> = (0..16).map(|c| class_target(c, 4)).collect();
        for a in 0..16 {
            for b in a + 1..16 {
                assert_ne!(all[a], all[b]);
            }
        }
    }

    #[test]
    fn single_class_is_trivially_right() {
        let data = toy(20, 1);
        let model = train_baseline(&data, 2, &config()).unwrap();
        assert_eq!(model.accuracy(&data.items).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_and_learns() {
        let data = toy(60, 3);
        let a = train_baseline(&data, 2, &config()).unwrap();
        let b = train_baseline(&data, 2, &config()).unwrap();
        assert_eq!(a.loss_history, b.loss_history);
        assert_eq!(a.accuracy(&data.items).unwrap(), 1.0);
        assert!(train_baseline(&toy(60, 5), 2, &config()).is_err());
    }
}
