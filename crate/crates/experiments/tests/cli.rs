use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hqnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqnc")).args(args).env("HQNC_DATA_DIR", "/nonexistent-data-dir").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn fixtures() -> TempDir {
    let dir = TempDir::new().unwrap();
    let out = hqnc(&["export-fixtures", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

const SMALL: &[&str] = &[
    "--qubits", "2", "--epochs", "4", "--n-train", "96", "--batch-size", "16", "--hidden-width", "8",
    "--learning-rate", "0.01", "--n-samples", "4",
];

fn with_small<'a>(head: &[&'a str]) -> Vec<&'a str> {
    head.iter().copied().chain(SMALL.iter().copied()).collect()
}

#[test]
fn export_writes_every_format() {
    let dir = fixtures();
    for name in ["toy/train-images-idx3-ubyte", "toy/t10k-labels-idx1-ubyte", "toy.csv", "toy.hqnc", "toy.shdw"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
}

#[test]
fn train_then_eval_round_trip() {
    let dir = fixtures();
    let data = dir.path().join("toy");
    let out_dir = dir.path().join("run");
    let model = out_dir.join("model.hqnc");
    let args = with_small(&["train", "--dataset", data.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    let out = hqnc(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trained = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(trained.contains("exact accuracy"));
    assert!(model.is_file());
    assert!(out_dir.join("loss_history.csv").is_file());
    assert!(out_dir.join("loss_history.config").is_file());

    let out = hqnc(&["eval", "--model", model.to_str().unwrap(), "--dataset", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), trained);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = fixtures();
    let data = dir.path().join("toy");
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("dataset = {}\nmethod = bogus\n", data.display())).unwrap();
    let out = hqnc(&["headline", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let out_dir = dir.path().join("headline");
    let mut args = with_small(&["headline", "--config", cfg.to_str().unwrap(), "--method", "exact"]);
    args.extend(["--runs", "2", "--out", out_dir.to_str().unwrap()]);
    let out = hqnc(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("headline.csv")).unwrap();
    assert!(csv.starts_with("dataset,method,mean,sem,runs"), "{csv}");
    assert!(csv.contains(",exact,"));
    assert!(csv.trim_end().ends_with(",2"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&hqnc(&["train", "--method", "nonsense", "--dataset", "mnist"])), 2);
    assert_eq!(code(&hqnc(&["train", "--qubits", "0"])), 2);
    assert_eq!(code(&hqnc(&["sweep", "--axis", "colour", "--grid", "1"])), 2);
    assert_eq!(code(&hqnc(&["no-such-command"])), 2);
    assert_eq!(code(&hqnc(&["train", "--lr-schedule", "linear"])), 2);
    assert_eq!(code(&hqnc(&["train", "--dataset", "mnist"])), 3);
    assert_eq!(code(&hqnc(&["train", "--dataset", "/no/such/file.csv"])), 3);
    assert_eq!(code(&hqnc(&["eval", "--model", "/no/such/model.hqnc", "--dataset", "mnist"])), 3);

    let dir = fixtures();
    let data = dir.path().join("toy");
    let nan_dir = dir.path().join("nan");
    let args = ["train", "--dataset", data.to_str().unwrap(), "--qubits", "2", "--hidden-width", "8"];
    let mut args = args.to_vec();
    args.extend(["--n-train", "64", "--batch-size", "16", "--epochs", "2", "--learning-rate", "1e300"]);
    args.extend(["--out", nan_dir.to_str().unwrap()]);
    assert_eq!(code(&hqnc(&args)), 4);
}

#[test]
fn fidelity_decay_writes_both_tables() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = hqnc(&["fidelity-decay", "--qubits", "3", "--trials", "4", "--disorder-grid", "0,1", "--out", out_dir]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let main = fs::read_to_string(Path::new(out_dir).join("fidelity_decay.csv")).unwrap();
    assert_eq!(main.lines().count(), 42);
    let inset = fs::read_to_string(Path::new(out_dir).join("fidelity_decay_disorder.csv")).unwrap();
    assert_eq!(inset.lines().count(), 3);
}

#[test]
fn analysis_commands_on_fixtures() {
    let dir = fixtures();
    let data = dir.path().join("toy");
    let out_dir = dir.path().join("analysis");
    let common = with_small(&["--dataset", data.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);

    let mut args = vec!["sweep", "--axis", "n_samples", "--grid", "1,4"];
    args.extend(&common);
    let out = hqnc(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("sweep_n_samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");

    let mut args = vec!["baseline"];
    args.extend(&common);
    let out = hqnc(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("baseline.csv").is_file());

    let model = dir.path().join("toy.hqnc");
    let mut args = vec!["pca", "--k", "2", "--model", model.to_str().unwrap()];
    args.extend(&common);
    let out = hqnc(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("pca_fields.csv").is_file());
    assert!(out_dir.join("pca_scores.csv").is_file());
}
