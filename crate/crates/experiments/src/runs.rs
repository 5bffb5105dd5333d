//! Training, evaluation and the experiment sweeps.

use std::str::FromStr;

use hqnc_core::data_io::Dataset;
use hqnc_core::pipeline::{
    spec_template, test_accuracy, train_comparator_with, with_observables, LabeledImage, Method, TrainedModel,
};
use hqnc_core::quantum::{initial_state, fidelity, IsingSpec, Propagator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::datasets::Splits;
use crate::error::{ExperimentError, Result};
use crate::results::ExperimentResult;

/// Stream offsets separating the generators of one seeded run.
const OBSERVABLE_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for the shadow sampling of an evaluation.
pub fn eval_seed(seed: u64) -> u64 {
    stream_rng(seed, EVAL_STREAM).random()
}

#[derive(Clone, Debug)]
pub struct TrainedRun {
    pub model: TrainedModel,
    pub loss_history: Vec<f64>,
}

/// Trains the comparator with `cfg` and `seed`, then builds `N_S`-sample
/// observables from the training set.
pub fn train_model(train: &Dataset, cfg: &RunConfig, seed: u64) -> Result<TrainedRun> {
    train_model_verbose(train, cfg, seed, false)
}

pub fn train_model_verbose(train: &Dataset, cfg: &RunConfig, seed: u64, verbose: bool) -> Result<TrainedRun> {
    cfg.validate()?;
    let spec = spec_template(cfg.n_qubits(), cfg.evolution_time())?;
    let run = train_comparator_with(train, &cfg.train_config(seed), &spec, |epoch, loss| {
        if verbose {
            eprintln!("  seed {seed} epoch {}: loss {loss:.4}", epoch + 1);
        }
    })?;
    let model = with_observables(run.model, train, cfg.n_samples, &mut stream_rng(seed, OBSERVABLE_STREAM))?;
    Ok(TrainedRun { model, loss_history: run.loss_history })
}

/// Rebuilds the observables of `model` with `n_samples` references.
pub fn rebuild_observables(model: &TrainedModel, train: &Dataset, n_samples: usize, seed: u64) -> Result<TrainedModel> {
    Ok(with_observables(model.clone(), train, n_samples, &mut stream_rng(seed, OBSERVABLE_STREAM))?)
}

pub fn test_subset<'a>(test: &'a Dataset, cfg: &RunConfig) -> &'a [LabeledImage] {
    if cfg.test_limit == 0 {
        &test.items
    } else {
        &test.items[..cfg.test_limit.min(test.items.len())]
    }
}

pub fn evaluate(model: &TrainedModel, test: &Dataset, cfg: &RunConfig, method: Method, seed: u64) -> Result<f64> {
    Ok(test_accuracy(model, test_subset(test, cfg), method, eval_seed(seed))?)
}

fn config_pairs(cfg: &RunConfig, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut pairs = cfg.to_pairs();
    pairs.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    pairs
}

/// Mean test accuracy over `cfg.runs` seeds for each configured method.
pub fn run_headline(splits: &Splits, cfg: &RunConfig) -> Result<ExperimentResult> {
    let methods = cfg.method.methods(cfg.shadow_m);
    let mut acc: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
    for k in 0..cfg.runs {
        let seed = cfg.run_seed(k);
        let run = train_model(&splits.train, cfg, seed)?;
        for (i, &(_, method)) in methods.iter().enumerate() {
            acc[i].push(evaluate(&run.model, &splits.test, cfg, method, seed)?);
        }
    }
    let mut result = ExperimentResult::new("headline", &["dataset", "method"], config_pairs(cfg, &[]));
    for ((name, _), values) in methods.iter().zip(&acc) {
        result.push(vec![cfg.dataset.clone(), name.to_string()], values)?;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    NSamples,
    Time,
    NQubits,
    HiddenLayers,
    NTrain,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::NSamples => "n_samples",
            Self::Time => "time",
            Self::NQubits => "qubits",
            Self::HiddenLayers => "hidden_layers",
            Self::NTrain => "n_train",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "n_samples" | "ns" => Ok(Self::NSamples),
            "time" | "t" => Ok(Self::Time),
            "qubits" | "n_qubits" => Ok(Self::NQubits),
            "hidden_layers" | "n_hidden_layers" => Ok(Self::HiddenLayers),
            "n_train" => Ok(Self::NTrain),
            other => Err(ExperimentError::InvalidArgument(format!(
                "unknown sweep axis {other:?}: expected n_samples, time, qubits, hidden_layers or n_train"
            ))),
        }
    }
}

fn check_grid(axis: SweepAxis, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(ExperimentError::InvalidArgument("sweep grid is empty".into()));
    }
    let integral = !matches!(axis, SweepAxis::Time);
    for &v in grid {
        let ok = v.is_finite() && v >= 0.0 && (!integral || v.fract() == 0.0);
        let positive = matches!(axis, SweepAxis::HiddenLayers | SweepAxis::Time) || v >= 1.0;
        if !ok || !positive {
            return Err(ExperimentError::InvalidArgument(format!("grid value {v} is invalid for axis {}", axis.name())));
        }
    }
    Ok(())
}

/// One headline-style measurement per grid value, other settings from `cfg`.
///
/// The `N_S` axis trains once per seed and rebuilds only the observables.
pub fn sweep(splits: &Splits, axis: SweepAxis, grid: &[f64], cfg: &RunConfig) -> Result<ExperimentResult> {
    check_grid(axis, grid)?;
    cfg.validate()?;
    let methods = cfg.method.methods(cfg.shadow_m);
    // acc[g][m] holds one accuracy per seed
    let mut acc = vec![vec![Vec::new(); methods.len()]; grid.len()];
    for k in 0..cfg.runs {
        let seed = cfg.run_seed(k);
        let shared = match axis {
            SweepAxis::NSamples => Some(train_model(&splits.train, cfg, seed)?),
            _ => None,
        };
        for (g, &value) in grid.iter().enumerate() {
            let mut point = cfg.clone();
            let model = match axis {
                SweepAxis::NSamples => {
                    let base = &shared.as_ref().expect("trained above").model;
                    rebuild_observables(base, &splits.train, value as usize, seed)?
                }
                _ => {
                    match axis {
                        SweepAxis::Time => point.time = Some(value),
                        SweepAxis::NQubits => {
                            point.qubits = Some(value as usize);
                            // keep the time rule t·J = 2·N_q unless a time was pinned
                            point.time = cfg.time;
                        }
                        SweepAxis::HiddenLayers => point.hidden_layers = value as usize,
                        SweepAxis::NTrain => point.n_train = value as usize,
                        SweepAxis::NSamples => unreachable!(),
                    }
                    train_model(&splits.train, &point, seed)?.model
                }
            };
            for (m, &(_, method)) in methods.iter().enumerate() {
                acc[g][m].push(evaluate(&model, &splits.test, cfg, method, seed)?);
            }
        }
    }
    let id = format!("sweep_{}", axis.name());
    let mut result =
        ExperimentResult::new(&id, &[axis.name(), "method"], config_pairs(cfg, &[("axis", axis.name().into())]));
    for (g, &value) in grid.iter().enumerate() {
        for (m, (name, _)) in methods.iter().enumerate() {
            result.push(vec![format!("{value}"), name.to_string()], &acc[g][m])?;
        }
    }
    Ok(result)
}

/// `count` points evenly spaced in `log10` between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
}

/// Default grid of `t·J/N_q` values.
pub fn default_decay_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 41)
}

/// Mean fidelity between `|0…0⟩` evolved under two independent random field
/// vectors uniform in `[−W, W]^{N_q}`, for each `t·J/N_q` in `grid`.
pub fn fidelity_decay<R: Rng + ?Sized>(
    n_qubits: usize,
    disorder: f64,
    trials: usize,
    grid: &[f64],
    rng: &mut R,
) -> Result<ExperimentResult> {
    if !(disorder >= 0.0) || trials == 0 || grid.is_empty() {
        return Err(ExperimentError::InvalidArgument("need W ≥ 0, trials ≥ 1 and a nonempty grid".into()));
    }
    let psi0 = initial_state(n_qubits)?;
    let mut values = vec![Vec::with_capacity(trials); grid.len()];
    for _ in 0..trials {
        let mut draw = || -> Result<Propagator> {
            let fields = (0..n_qubits)
                .map(|_| if disorder > 0.0 { rng.random_range(-disorder..=disorder) } else { 0.0 })
                .collect();
            Ok(Propagator::new(&IsingSpec::with_unit_coupling(fields, 0.0)?)?)
        };
        let (p1, p2) = (draw()?, draw()?);
        for (g, &x) in grid.iter().enumerate() {
            let t = x * n_qubits as f64;
            values[g].push(fidelity(&p1.evolve_for(&psi0, t)?, &p2.evolve_for(&psi0, t)?)?);
        }
    }
    let config = vec![
        ("n_qubits".to_string(), n_qubits.to_string()),
        ("disorder".to_string(), format!("{disorder:?}")),
        ("trials".to_string(), trials.to_string()),
    ];
    let mut result = ExperimentResult::new("fidelity_decay", &["t_over_nq"], config);
    for (x, v) in grid.iter().zip(&values) {
        result.push(vec![format!("{x}")], v)?;
    }
    Ok(result)
}
