use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hqnc_core::data_io::{load_model, save_model};
use hqnc_core::pipeline::Method;
use hqnc_experiments::baseline::train_baseline;
use hqnc_experiments::config::{parse_settings, read_settings_file, RunConfig};
use hqnc_experiments::datasets::{self, Splits};
use hqnc_experiments::fixtures::export_fixtures;
use hqnc_experiments::error::Result;
use hqnc_experiments::pca::pca_separability;
use hqnc_experiments::results::{write_config, ExperimentResult, ResultRow};
use hqnc_experiments::runs::{
    default_decay_grid, evaluate, fidelity_decay, run_headline, sweep, test_subset, train_model_verbose, SweepAxis,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "hqnc", version, about = "Hybrid Ising-chain image classifier experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Args, Clone, Default)]
struct Common {
    /// `key = value` settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset name (mnist, fashion) or path to an IDX directory or CSV file.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    qubits: Option<usize>,
    /// Evolution time t·J (default 2·N_q).
    #[arg(long)]
    time: Option<f64>,
    /// Reference states per class observable.
    #[arg(long)]
    n_samples: Option<usize>,
    /// Training pairs per epoch.
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    hidden_layers: Option<usize>,
    #[arg(long)]
    hidden_width: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Peak learning rate.
    #[arg(long)]
    learning_rate: Option<f64>,
    /// constant or cosine.
    #[arg(long)]
    lr_schedule: Option<String>,
    /// Output-layer initialization gain relative to Glorot.
    #[arg(long)]
    output_gain: Option<f64>,
    /// Fraction of training pairs drawn from the same class.
    #[arg(long)]
    same_class_fraction: Option<f64>,
    /// exact, shadow or both.
    #[arg(long)]
    method: Option<String>,
    /// Swap-test shots per training pair (0 = exact fidelities).
    #[arg(long)]
    shots: Option<u64>,
    /// Snapshots per shadow classification.
    #[arg(long)]
    shadow_m: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate on at most this many test images (0 = all).
    #[arg(long)]
    test_limit: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn flag_settings(&self) -> Vec<(&'static str, String)> {
        [
            ("dataset", self.dataset.clone()),
            ("qubits", show(&self.qubits)),
            ("time", show(&self.time)),
            ("n_samples", show(&self.n_samples)),
            ("n_train", show(&self.n_train)),
            ("hidden_layers", show(&self.hidden_layers)),
            ("hidden_width", show(&self.hidden_width)),
            ("epochs", show(&self.epochs)),
            ("batch_size", show(&self.batch_size)),
            ("learning_rate", show(&self.learning_rate)),
            ("lr_schedule", self.lr_schedule.clone()),
            ("output_gain", show(&self.output_gain)),
            ("same_class_fraction", show(&self.same_class_fraction)),
            ("method", self.method.clone()),
            ("shots", show(&self.shots)),
            ("shadow_m", show(&self.shadow_m)),
            ("runs", show(&self.runs)),
            ("seed", show(&self.seed)),
            ("test_limit", show(&self.test_limit)),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let flags = self.flag_settings();
        if let Some(path) = &self.config {
            for (key, value) in parse_settings(&read_settings_file(path)?)? {
                if !flags.iter().any(|(k, _)| *k == key) {
                    cfg.set(&key, &value)?;
                }
            }
        }
        for (key, value) in &flags {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn show<T: ToString>(value: &Option<T>) -> Option<String> {
    value.as_ref().map(T::to_string)
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and save its checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        /// Checkpoint path (default <out>/model.hqnc).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Evaluate a saved checkpoint on the test split.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
    },
    /// Mean test accuracy over several seeds.
    Headline {
        #[command(flatten)]
        common: Common,
    },
    /// Accuracy along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// n_samples, time, qubits, hidden_layers or n_train.
        #[arg(long)]
        axis: String,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
    },
    /// Mean fidelity of two disordered chains over time.
    FidelityDecay {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        disorder: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Comma-separated disorder strengths evaluated at t·J/N_q = 100.
        #[arg(long, value_delimiter = ',')]
        disorder_grid: Vec<f64>,
    },
    /// Hybrid model against the classical-only baseline.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
    /// PCA projections of encoder fields and class scores.
    Pca {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to analyse (trains one when absent).
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Write small IDX, CSV and checkpoint fixtures.
    ExportFixtures {
        #[command(flatten)]
        common: Common,
    },
}

fn load_splits(cfg: &RunConfig) -> Result<Splits> {
    eprintln!("loading {}", cfg.dataset);
    datasets::load(&cfg.dataset, cfg.seed)
}

fn report(result: &ExperimentResult, out: &Path) -> Result<()> {
    let path = result.save(out)?;
    println!("{}", result.header().join(","));
    for row in &result.rows {
        println!("{},{:.6},{:.6},{}", row.params.join(","), row.mean, row.sem, row.runs);
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train { common, model } => {
            let cfg = common.resolve()?;
            let splits = load_splits(&cfg)?;
            let run = train_model_verbose(&splits.train, &cfg, cfg.seed, true)?;
            fs::create_dir_all(&cfg.out)?;
            let path = model.unwrap_or_else(|| cfg.out.join("model.hqnc"));
            save_model(&run.model, &path)?;
            let mut losses = ExperimentResult::new("loss_history", &["epoch"], cfg.to_pairs());
            for (e, l) in run.loss_history.iter().enumerate() {
                losses.push(vec![(e + 1).to_string()], &[*l])?;
            }
            losses.save(&cfg.out)?;
            for (name, method) in cfg.method.methods(cfg.shadow_m) {
                println!("{name} accuracy {:.4}", evaluate(&run.model, &splits.test, &cfg, method, cfg.seed)?);
            }
            eprintln!("saved {}", path.display());
        }
        Command::Eval { common, model } => {
            let mut cfg = common.resolve()?;
            let model = load_model(&model)?;
            if common.dataset.is_none() && common.config.is_none() {
                cfg.dataset = model.metadata.dataset.clone();
            }
            let splits = load_splits(&cfg)?;
            for (name, method) in cfg.method.methods(cfg.shadow_m) {
                println!("{name} accuracy {:.4}", evaluate(&model, &splits.test, &cfg, method, cfg.seed)?);
            }
        }
        Command::Headline { common } => {
            let cfg = common.resolve()?;
            report(&run_headline(&load_splits(&cfg)?, &cfg)?, &cfg.out)?;
        }
        Command::Sweep { common, axis, grid } => {
            let cfg = common.resolve()?;
            let axis: SweepAxis = axis.parse()?;
            report(&sweep(&load_splits(&cfg)?, axis, &grid, &cfg)?, &cfg.out)?;
        }
        Command::FidelityDecay { common, disorder, trials, disorder_grid } => {
            let cfg = common.resolve()?;
            let n_qubits = common.qubits.unwrap_or(8);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            report(&fidelity_decay(n_qubits, disorder, trials, &default_decay_grid(), &mut rng)?, &cfg.out)?;
            if !disorder_grid.is_empty() {
                let mut inset = ExperimentResult::new("fidelity_decay_disorder", &["disorder"], cfg.to_pairs());
                for &w in &disorder_grid {
                    let r = fidelity_decay(n_qubits, w, trials, &[100.0], &mut rng)?;
                    let row = &r.rows[0];
                    inset.rows.push(ResultRow { params: vec![w.to_string()], ..row.clone() });
                }
                report(&inset, &cfg.out)?;
            }
        }
        Command::Baseline { common } => {
            let cfg = common.resolve()?;
            let splits = load_splits(&cfg)?;
            let test = test_subset(&splits.test, &cfg);
            let (mut hybrid, mut classical) = (Vec::new(), Vec::new());
            for k in 0..cfg.runs {
                let seed = cfg.run_seed(k);
                let run = train_model_verbose(&splits.train, &cfg, seed, true)?;
                hybrid.push(evaluate(&run.model, &splits.test, &cfg, Method::Exact, seed)?);
                let base = train_baseline(&splits.train, cfg.n_qubits(), &cfg.train_config(seed))?;
                classical.push(base.accuracy(test)?);
            }
            let mut result = ExperimentResult::new("baseline", &["model"], cfg.to_pairs());
            result.push(vec!["hybrid".into()], &hybrid)?;
            result.push(vec!["classical".into()], &classical)?;
            report(&result, &cfg.out)?;
        }
        Command::Pca { common, model, k } => {
            let cfg = common.resolve()?;
            let splits = load_splits(&cfg)?;
            let model = match model {
                Some(path) => load_model(path)?,
                None => train_model_verbose(&splits.train, &cfg, cfg.seed, true)?.model,
            };
            let (fields, scores) = pca_separability(test_subset(&splits.test, &cfg), &model, k)?;
            fs::create_dir_all(&cfg.out)?;
            fields.write_csv(&cfg.out.join("pca_fields.csv"))?;
            scores.write_csv(&cfg.out.join("pca_scores.csv"))?;
            write_config(&cfg.out.join("pca.config"), &cfg.to_pairs())?;
            for (name, table) in [("fields", &fields), ("scores", &scores)] {
                let (within, between) = table.within_between();
                println!("{name}: within-class {within:.4}, between-class {between:.4}");
            }
        }
        Command::ExportFixtures { common } => {
            let cfg = common.resolve()?;
            for path in export_fixtures(&cfg.out)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
