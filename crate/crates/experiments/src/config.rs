//! Run settings shared by every subcommand, with `key = value` file support.

use std::fs;
use std::path::{Path, PathBuf};

use hqnc_core::encoder::{LrSchedule, TrainConfig, DEFAULT_HIDDEN_WIDTH};
use hqnc_core::quantum::MAX_QUBITS;
use hqnc_core::pipeline::Method;

use crate::error::{ExperimentError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Exact,
    Shadow,
    Both,
}

impl MethodChoice {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "exact" => Ok(Self::Exact),
            "shadow" => Ok(Self::Shadow),
            "both" => Ok(Self::Both),
            other => Err(ExperimentError::InvalidArgument(format!("method {other:?}: expected exact, shadow or both"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Shadow => "shadow",
            Self::Both => "both",
        }
    }

    /// Methods to evaluate, each with its label.
    pub fn methods(self, shadow_m: usize) -> Vec<(&'static str, Method)> {
        let exact = ("exact", Method::Exact);
        let shadow = ("shadow", Method::Shadow(shadow_m));
        match self {
            Self::Exact => vec![exact],
            Self::Shadow => vec![shadow],
            Self::Both => vec![exact, shadow],
        }
    }
}

/// Every tunable of an experiment. `None` for qubits or time selects the
/// dataset default (4 qubits for MNIST-like data, 3 otherwise; `t·J = 2·N_q`).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset: String,
    pub qubits: Option<usize>,
    pub time: Option<f64>,
    pub n_samples: usize,
    pub n_train: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_schedule: LrSchedule,
    pub output_gain: f64,
    pub same_class_fraction: f64,
    pub method: MethodChoice,
    /// Swap-test shots per training pair; 0 trains on exact fidelities.
    pub shots: u64,
    pub shadow_m: usize,
    pub runs: usize,
    pub seed: u64,
    /// Evaluate on at most this many test images; 0 uses all.
    pub test_limit: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            dataset: "mnist".into(),
            qubits: None,
            time: None,
            n_samples: 100,
            n_train: train.n_pairs,
            hidden_layers: 1,
            hidden_width: DEFAULT_HIDDEN_WIDTH,
            epochs: train.epochs,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
            lr_schedule: train.lr_schedule,
            output_gain: train.output_gain,
            same_class_fraction: train.same_class_fraction,
            method: MethodChoice::Exact,
            shots: 0,
            shadow_m: 5000,
            runs: 1,
            seed: 0,
            test_limit: 0,
            out: PathBuf::from("results"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| ExperimentError::InvalidArgument(format!("{key} = {value:?} is not valid")))
}

fn parse_optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" || value.is_empty() {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

impl RunConfig {
    pub fn n_qubits(&self) -> usize {
        self.qubits.unwrap_or_else(|| {
            let name = self.dataset.to_ascii_lowercase();
            if name.contains("sat6") || name.contains("blood") {
                3
            } else {
                4
            }
        })
    }

    pub fn evolution_time(&self) -> f64 {
        self.time.unwrap_or(2.0 * self.n_qubits() as f64)
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            lr_schedule: self.lr_schedule,
            batch_size: self.batch_size,
            n_pairs: self.n_train,
            epochs: self.epochs,
            seed,
            hidden: vec![self.hidden_width; self.hidden_layers],
            same_class_fraction: self.same_class_fraction,
            swap_shots: self.shots,
            output_gain: self.output_gain,
            ..TrainConfig::default()
        }
    }

    /// Seed of run `k`.
    pub fn run_seed(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ExperimentError::InvalidArgument(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1".into());
        }
        if !(1..=MAX_QUBITS).contains(&self.n_qubits()) {
            return bad(format!("{} qubits: expected 1 to {MAX_QUBITS}", self.n_qubits()));
        }
        if self.hidden_layers > 4 {
            return bad(format!("{} hidden layers: at most 4 supported", self.hidden_layers));
        }
        if let Some(t) = self.time {
            if !(t >= 0.0) || !t.is_finite() {
                return bad(format!("time {t} must be finite and non-negative"));
            }
        }
        if self.method != MethodChoice::Exact && self.shadow_m == 0 {
            return bad("shadow_m must be positive".into());
        }
        self.train_config(self.seed).validate().map_err(|e| ExperimentError::InvalidArgument(e.to_string()))
    }

    /// Applies one `key = value` setting. Keys mirror the command-line flags
    /// with dashes or underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "dataset" => self.dataset = value.to_string(),
            "qubits" => self.qubits = parse_optional(&key, value)?,
            "time" => self.time = parse_optional(&key, value)?,
            "n_samples" => self.n_samples = parse(&key, value)?,
            "n_train" => self.n_train = parse(&key, value)?,
            "hidden_layers" => self.hidden_layers = parse(&key, value)?,
            "hidden_width" => self.hidden_width = parse(&key, value)?,
            "epochs" => self.epochs = parse(&key, value)?,
            "batch_size" => self.batch_size = parse(&key, value)?,
            "learning_rate" => self.learning_rate = parse(&key, value)?,
            "lr_schedule" => self.lr_schedule = value.parse().map_err(|e: hqnc_core::Error| ExperimentError::InvalidArgument(e.to_string()))?,
            "output_gain" => self.output_gain = parse(&key, value)?,
            "same_class_fraction" => self.same_class_fraction = parse(&key, value)?,
            "method" => self.method = MethodChoice::parse(value)?,
            "shots" => self.shots = parse(&key, value)?,
            "shadow_m" => self.shadow_m = parse(&key, value)?,
            "runs" => self.runs = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "test_limit" => self.test_limit = parse(&key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(ExperimentError::InvalidArgument(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Applies every line of a `key = value` file. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (key, value) in parse_settings(text)? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&read_settings_file(path)?)
    }

    /// Settings in file form; reading them back reproduces `self`.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let auto = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        [
            ("dataset", self.dataset.clone()),
            ("qubits", auto(self.qubits.map(|q| q.to_string()))),
            ("time", auto(self.time.map(|t| format!("{t:?}")))),
            ("n_samples", self.n_samples.to_string()),
            ("n_train", self.n_train.to_string()),
            ("hidden_layers", self.hidden_layers.to_string()),
            ("hidden_width", self.hidden_width.to_string()),
            ("epochs", self.epochs.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("learning_rate", format!("{:?}", self.learning_rate)),
            ("lr_schedule", self.lr_schedule.as_str().to_string()),
            ("output_gain", format!("{:?}", self.output_gain)),
            ("same_class_fraction", format!("{:?}", self.same_class_fraction)),
            ("method", self.method.as_str().into()),
            ("shots", self.shots.to_string()),
            ("shadow_m", self.shadow_m.to_string()),
            ("runs", self.runs.to_string()),
            ("seed", self.seed.to_string()),
            ("test_limit", self.test_limit.to_string()),
            ("out", self.out.display().to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Splits `key = value` lines into normalized pairs. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_settings(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ExperimentError::InvalidArgument(format!("line {}: expected key = value", n + 1)))?;
        pairs.push((key.trim().replace('-', "_"), value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn read_settings_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| ExperimentError::InvalidArgument(format!("config file {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let cfg = RunConfig { qubits: Some(3), time: Some(0.1), learning_rate: 3e-4, ..RunConfig::default() };
        let text: String = cfg.to_pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let mut back = RunConfig::default();
        back.apply_text(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parsing() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\n\nn-samples = 7\nmethod = both\n").unwrap();
        assert_eq!((cfg.n_samples, cfg.method), (7, MethodChoice::Both));
        assert!(cfg.apply_text("bogus = 1").is_err());
        assert!(cfg.apply_text("runs = x").is_err());
        assert!(cfg.apply_text("runs").is_err());
    }

    #[test]
    fn dataset_defaults() {
        let mut cfg = RunConfig::default();
        assert_eq!((cfg.n_qubits(), cfg.evolution_time()), (4, 8.0));
        cfg.dataset = "data/sat6_train.csv".into();
        assert_eq!((cfg.n_qubits(), cfg.evolution_time()), (3, 6.0));
    }
}
