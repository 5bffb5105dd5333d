//! Aggregated experiment tables and their CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{ExperimentError, Result};

/// Mean and standard error of the mean (`s/√n`, with `s` the sample standard
/// deviation; 0 for a single value).
pub fn mean_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub params: Vec<String>,
    pub mean: f64,
    pub sem: f64,
    pub runs: usize,
}

/// One table per experiment: parameter columns, then mean, sem and runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub experiment_id: String,
    pub param_names: Vec<String>,
    pub rows: Vec<ResultRow>,
    /// `key = value` pairs sufficient to rerun the experiment.
    pub config: Vec<(String, String)>,
}

impl ExperimentResult {
    pub fn new(experiment_id: &str, param_names: &[&str], config: Vec<(String, String)>) -> Self {
        Self {
            experiment_id: experiment_id.to_string(),
            param_names: param_names.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            config,
        }
    }

    /// Appends the mean and SEM of `values`.
    pub fn push(&mut self, params: Vec<String>, values: &[f64]) -> Result<()> {
        if params.len() != self.param_names.len() {
            return Err(ExperimentError::InvalidArgument(format!(
                "row has {} parameters, table has {}",
                params.len(),
                self.param_names.len()
            )));
        }
        if values.is_empty() {
            return Err(ExperimentError::InvalidArgument("row needs at least one run".into()));
        }
        let (mean, sem) = mean_sem(values);
        self.rows.push(ResultRow { params, mean, sem, runs: values.len() });
        Ok(())
    }

    /// Row whose parameters equal `params`.
    pub fn find(&self, params: &[&str]) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.params.iter().map(String::as_str).eq(params.iter().copied()))
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = self.param_names.clone();
        h.extend(["mean", "sem", "runs"].map(String::from));
        h
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut rec = row.params.clone();
            rec.extend([format!("{}", row.mean), format!("{}", row.sem), row.runs.to_string()]);
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<id>.csv` and the `<id>.config` sidecar into `dir`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.experiment_id));
        self.write_csv(&csv_path)?;
        write_config(&dir.join(format!("{}.config", self.experiment_id)), &self.config)?;
        Ok(csv_path)
    }
}

pub fn write_config(path: &Path, config: &[(String, String)]) -> Result<()> {
    let text: String = config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    fs::write(path, text)?;
    Ok(())
}

/// Reads a CSV written by [`ExperimentResult::write_csv`], checking that the
/// header ends in `mean, sem, runs`.
pub fn read_csv(path: &Path, experiment_id: &str) -> Result<ExperimentResult> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let n = header.len();
    if n < 3 || header[n - 3..] != ["mean", "sem", "runs"] {
        return Err(ExperimentError::InvalidArgument(format!("unexpected header {header:?}")));
    }
    let bad = |what: &str| ExperimentError::InvalidArgument(format!("bad {what} in {}", path.display()));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| bad("row"));
        rows.push(ResultRow {
            params: (0..n - 3).map(|i| field(i).map(String::from)).collect::<Result<_>>()?,
            mean: field(n - 3)?.parse().map_err(|_| bad("mean"))?,
            sem: field(n - 2)?.parse().map_err(|_| bad("sem"))?,
            runs: field(n - 1)?.parse().map_err(|_| bad("runs"))?,
        });
    }
    Ok(ExperimentResult {
        experiment_id: experiment_id.to_string(),
        param_names: header[..n - 3].to_vec(),
        rows,
        config: Vec::new(),
    })
}
