//! Locating and loading the benchmark datasets.
//!
//! A dataset is named either by a known name (`mnist`, `fashion`), looked up
//! under the data directory, or by a path. A directory path must hold the four
//! IDX files; a `.csv` path is read as the training split and a sibling file
//! with `train` replaced by `test` in its name, if present, as the test split.

use std::env;
use std::path::{Path, PathBuf};

use hqnc_core::data_io::{load_csv, load_idx, normalize, Dataset};

use crate::error::{ExperimentError, Result};

/// Environment variable overriding the data directory.
pub const DATA_DIR_ENV: &str = "HQNC_DATA_DIR";

/// Images per class shape for CSV exports, keyed by file stem prefix.
const CSV_SHAPES: &[(&str, (usize, usize, usize))] =
    &[("sat6", (28, 28, 4)), ("blood", (28, 28, 3)), ("toy", (4, 4, 1))];

/// `$HQNC_DATA_DIR`, else `./data`, else `/root/data`.
pub fn data_dir() -> PathBuf {
    if let Ok(dir) = env::var(DATA_DIR_ENV) {
        return PathBuf::from(dir);
    }
    let local = PathBuf::from("data");
    if local.is_dir() {
        return local;
    }
    PathBuf::from("/root/data")
}

fn canonical_name(name: &str) -> Option<&'static str> {
    match name.to_ascii_lowercase().as_str() {
        "mnist" => Some("mnist"),
        "fashion" | "fashion-mnist" | "fashion_mnist" | "fmnist" => Some("fashion"),
        _ => None,
    }
}

/// Train and test splits of a dataset.
#[derive(Clone, Debug)]
pub struct Splits {
    pub train: Dataset,
    pub test: Dataset,
}

fn idx_split(dir: &Path, prefix: &str, name: &str) -> Result<Dataset> {
    let images = dir.join(format!("{prefix}-images-idx3-ubyte"));
    let labels = dir.join(format!("{prefix}-labels-idx1-ubyte"));
    for p in [&images, &labels] {
        if !p.is_file() {
            return Err(ExperimentError::MissingData(format!("{} not found", p.display())));
        }
    }
    let mut raw = load_idx(images, labels)?;
    raw.name = name.to_string();
    Ok(normalize(raw)?)
}

fn align_classes(mut splits: Splits) -> Splits {
    let n = splits.train.n_classes.max(splits.test.n_classes);
    splits.train.n_classes = n;
    splits.test.n_classes = n;
    splits
}

fn csv_shape(path: &Path) -> (usize, usize, usize) {
    let stem = path.file_stem().map(|s| s.to_string_lossy().to_ascii_lowercase()).unwrap_or_default();
    CSV_SHAPES.iter().find(|(prefix, _)| stem.starts_with(prefix)).map_or((28, 28, 1), |&(_, shape)| shape)
}

/// Loads a dataset by name or path. CSV files without a test sibling are
/// split 6:1 with `seed`.
pub fn load(spec: &str, seed: u64) -> Result<Splits> {
    if let Some(name) = canonical_name(spec) {
        let dir = data_dir().join(name);
        let train = idx_split(&dir, "train", name)?;
        let test = idx_split(&dir, "t10k", name)?;
        return Ok(align_classes(Splits { train, test }));
    }
    let path = PathBuf::from(spec);
    if path.is_dir() {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let train = idx_split(&path, "train", &name)?;
        let test = idx_split(&path, "t10k", &name)?;
        return Ok(align_classes(Splits { train, test }));
    }
    if path.is_file() {
        let (h, w, c) = csv_shape(&path);
        let train = normalize(load_csv(&path, h, w, c)?)?;
        let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let sibling = path.with_file_name(file_name.replace("train", "test"));
        if file_name.contains("train") && sibling.is_file() {
            let test = normalize(load_csv(&sibling, h, w, c)?)?;
            return Ok(align_classes(Splits { train, test }));
        }
        let (train, test) = train.split(1.0 / 7.0, seed)?;
        return Ok(Splits { train, test });
    }
    Err(ExperimentError::MissingData(format!(
        "dataset {spec:?} not found (known names: mnist, fashion; data directory {}; set {DATA_DIR_ENV})",
        data_dir().display()
    )))
}
