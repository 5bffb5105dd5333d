//! Dataset ingestion, normalization and model checkpoints.

mod checkpoint;
mod csv_format;
mod idx;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use checkpoint::{load_model, read_model, save_model, write_model, CHECKPOINT_VERSION};
pub use csv_format::load_csv;
pub use idx::{load_idx, parse_idx, IMAGES_MAGIC, LABELS_MAGIC};

use crate::error::{Error, Result};
use crate::pipeline::LabeledImage;

/// Images with raw pixel values in `[0, 255]`, flattened channel-last and
/// row-major (`(row·width + col)·channels + channel`).
#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    pub name: String,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.height * self.width * self.channels
    }
}

/// Normalized images ready for the encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub items: Vec<LabeledImage>,
    pub n_features: usize,
    pub n_classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Number of images per class label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for item in &self.items {
            counts[item.label] += 1;
        }
        counts
    }

    /// Keeps the first `n` images.
    pub fn truncated(mut self, n: usize) -> Self {
        self.items.truncate(n);
        self
    }

    /// Shuffles with `seed` and moves `test_fraction` of the images to a
    /// second dataset.
    pub fn split(mut self, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(0.0..=1.0).contains(&test_fraction) {
            return Err(Error::OutOfRange { value: test_fraction, lo: 0.0, hi: 1.0 });
        }
        self.items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_test = (self.items.len() as f64 * test_fraction).round() as usize;
        let test_items = self.items.split_off(self.items.len() - n_test);
        let test = Dataset { items: test_items, ..self.clone_header() };
        Ok((self, test))
    }

    fn clone_header(&self) -> Dataset {
        Dataset { name: self.name.clone(), items: Vec::new(), n_features: self.n_features, n_classes: self.n_classes }
    }
}

/// `p ↦ p/127.5 − 1`, mapping `[0, 255]` onto `[−1, 1]`.
pub fn normalize_pixel(p: f64) -> f64 {
    p / 127.5 - 1.0
}

pub fn denormalize_pixel(x: f64) -> f64 {
    (x + 1.0) * 127.5
}

/// Rescales every pixel to `[−1, 1]`. The class count is one past the
/// largest label.
pub fn normalize(raw: RawDataset) -> Result<Dataset> {
    let n_features = raw.n_features();
    let n_classes = raw.labels.iter().max().map_or(0, |&m| m + 1);
    if raw.images.len() != raw.labels.len() {
        return Err(Error::CountMismatch { images: raw.images.len(), labels: raw.labels.len() });
    }
    let mut items = Vec::with_capacity(raw.images.len());
    for (pixels, label) in raw.images.into_iter().zip(raw.labels) {
        if pixels.len() != n_features {
            return Err(Error::DimensionMismatch { expected: n_features, found: pixels.len() });
        }
        if let Some(&bad) = pixels.iter().find(|p| !(0.0..=255.0).contains(*p)) {
            return Err(Error::OutOfRange { value: bad, lo: 0.0, hi: 255.0 });
        }
        let pixels = pixels.into_iter().map(normalize_pixel).collect();
        items.push(LabeledImage { pixels, label });
    }
    Ok(Dataset { name: raw.name, items, n_features, n_classes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(images: Vec<Vec<f64>>, labels: Vec<usize>) -> RawDataset {
        RawDataset { name: "t".into(), height: 1, width: 2, channels: 1, images, labels }
    }

    #[test]
    fn pixel_endpoints() {
        assert_eq!(normalize_pixel(0.0), -1.0);
        assert_eq!(normalize_pixel(255.0), 1.0);
        assert_eq!(normalize_pixel(127.5), 0.0);
    }

    #[test]
    fn normalize_checks_range_and_counts_classes() {
        let d = normalize(raw(vec![vec![0.0, 255.0], vec![127.5, 51.0]], vec![0, 3])).unwrap();
        assert_eq!(d.n_classes, 4);
        assert_eq!(d.n_features, 2);
        assert_eq!(d.items[0].pixels, vec![-1.0, 1.0]);
        assert_eq!(d.class_counts(), vec![1, 0, 0, 1]);
        let err = normalize(raw(vec![vec![0.0, 256.0]], vec![0])).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));
        assert!(normalize(raw(vec![vec![0.0]], vec![0])).is_err());
    }

    #[test]
    fn split_partitions_items() {
        let images: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 0.0]).collect();
        let d = normalize(raw(images, (0..10).map(|i| i % 2).collect())).unwrap();
        let (train, test) = d.clone().split(0.3, 1).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        let mut all: Vec<f64> = train.items.iter().chain(&test.items).map(|i| i.pixels[0]).collect();
        all.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = d.items.iter().map(|i| i.pixels[0]).collect();
        want.sort_by(f64::total_cmp);
        assert_eq!(all, want);
        assert_eq!(test.n_classes, 2);
    }
}
