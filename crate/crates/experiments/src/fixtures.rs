//! Small deterministic files in every supported format, for checking other
//! readers against this implementation.

use std::fs;
use std::path::{Path, PathBuf};

use hqnc_core::data_io::{save_model, Dataset, IMAGES_MAGIC, LABELS_MAGIC};
use hqnc_core::encoder::TrainConfig;
use hqnc_core::measurement::sample_shadow;
use hqnc_core::pipeline::{spec_template, train_comparator, with_observables, LabeledImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

fn idx_bytes(images: &[Vec<u8>], rows: u32, cols: u32, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::new();
    for w in [IMAGES_MAGIC, images.len() as u32, rows, cols] {
        img.extend_from_slice(&w.to_be_bytes());
    }
    for i in images {
        img.extend_from_slice(i);
    }
    let mut lab = Vec::new();
    for w in [LABELS_MAGIC, labels.len() as u32] {
        lab.extend_from_slice(&w.to_be_bytes());
    }
    lab.extend_from_slice(labels);
    (img, lab)
}

/// Two-class 4×4 images: class 0 dark with noise, class 1 bright.
pub fn toy_images(n: usize, seed: u64) -> (Vec<Vec<u8>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = (0..n)
        .map(|i| {
            let base: i32 = if i % 2 == 0 { 20 } else { 235 };
            (0..16).map(|_| (base + rng.random_range(-15..=15)).clamp(0, 255) as u8).collect()
        })
        .collect();
    let labels = (0..n).map(|i| (i % 2) as u8).collect();
    (images, labels)
}

pub fn toy_dataset(n: usize, seed: u64) -> Dataset {
    let (images, labels) = toy_images(n, seed);
    let items = images
        .into_iter()
        .zip(labels)
        .map(|(img, l)| LabeledImage {
            pixels: img.iter().map(|&p| hqnc_core::data_io::normalize_pixel(f64::from(p))).collect(),
            label: l as usize,
        })
        .collect();
    Dataset { name: "toy".into(), items, n_features: 16, n_classes: 2 }
}

/// Writes the fixtures into `dir` and returns their paths.
pub fn export_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let write = |written: &mut Vec<PathBuf>, name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
        Ok(())
    };

    let toy_dir = dir.join("toy");
    fs::create_dir_all(&toy_dir)?;
    for (prefix, n, seed) in [("train", 48, 1), ("t10k", 16, 5)] {
        let (images, labels) = toy_images(n, seed);
        let (img, lab) = idx_bytes(&images, 4, 4, &labels);
        write(&mut written, &format!("toy/{prefix}-images-idx3-ubyte"), &img)?;
        write(&mut written, &format!("toy/{prefix}-labels-idx1-ubyte"), &lab)?;
    }

    let (images, labels) = toy_images(8, 1);
    let csv: String = images
        .iter()
        .zip(&labels)
        .map(|(img, l)| {
            let px: Vec<String> = img.iter().map(|p| p.to_string()).collect();
            format!("{l},{}\n", px.join(","))
        })
        .collect();
    write(&mut written, "toy.csv", csv.as_bytes())?;

    let data = toy_dataset(40, 2);
    let config = TrainConfig {
        batch_size: 16,
        n_pairs: 64,
        epochs: 3,
        seed: 7,
        hidden: vec![8],
        learning_rate: 1e-2,
        ..TrainConfig::default()
    };
    let run = train_comparator(&data, &config, &spec_template(2, 4.0)?)?;
    let model = with_observables(run.model, &data, 2, &mut ChaCha8Rng::seed_from_u64(3))?;
    let path = dir.join("toy.hqnc");
    save_model(&model, &path)?;
    written.push(path);

    let psi = model.encode_state(&data.items[0])?;
    let shadows = sample_shadow(&psi, 16, &mut ChaCha8Rng::seed_from_u64(4))?;
    let mut bytes = Vec::new();
    shadows.write_to(&mut bytes)?;
    write(&mut written, "toy.shdw", &bytes)?;
    Ok(written)
}
