//! Principal component analysis of standardized features.

use std::path::Path;

use hqnc_core::pipeline::{classify_all, encode_fields, LabeledImage, Method, TrainedModel};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{ExperimentError, Result};

/// Features with a standard deviation at or below this are dropped.
const MIN_STD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PcaModel {
    /// Indices of the retained (non-constant) input features.
    pub kept: Vec<usize>,
    pub mean: DVector<f64>,
    pub scale: DVector<f64>,
    /// `k × kept.len()`, one unit component per row.
    pub components: DMatrix<f64>,
    /// Covariance eigenvalues of the components, descending.
    pub eigenvalues: Vec<f64>,
}

/// Fits `k` components after centering and scaling every feature to unit
/// variance. Constant features are dropped.
pub fn pca_fit(data: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let n = data.len();
    if n < 2 {
        return Err(ExperimentError::InvalidArgument("PCA needs at least two rows".into()));
    }
    let dim = data[0].len();
    if data.iter().any(|r| r.len() != dim) {
        return Err(ExperimentError::InvalidArgument("PCA rows have different lengths".into()));
    }
    let x = DMatrix::from_fn(n, dim, |i, j| data[i][j]);
    let mean_all = x.row_mean().transpose();
    let std_all = DVector::from_fn(dim, |j, _| {
        (x.column(j).iter().map(|v| (v - mean_all[j]).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    });
    let kept: Vec<usize> = (0..dim).filter(|&j| std_all[j] > MIN_STD).collect();
    if k == 0 || k > kept.len() {
        return Err(ExperimentError::InvalidArgument(format!(
            "k = {k} components requested from {} non-constant features",
            kept.len()
        )));
    }
    let mean = DVector::from_iterator(kept.len(), kept.iter().map(|&j| mean_all[j]));
    let scale = DVector::from_iterator(kept.len(), kept.iter().map(|&j| std_all[j]));
    let z = DMatrix::from_fn(n, kept.len(), |i, c| (x[(i, kept[c])] - mean[c]) / scale[c]);
    let cov = z.tr_mul(&z) / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let components = DMatrix::from_fn(k, kept.len(), |r, c| eig.eigenvectors[(c, order[r])]);
    let eigenvalues = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok(PcaModel { kept, mean, scale, components, eigenvalues })
}

/// Coordinates of each row along the components.
pub fn pca_project(model: &PcaModel, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    data.iter()
        .map(|row| {
            if model.kept.iter().any(|&j| j >= row.len()) {
                return Err(ExperimentError::InvalidArgument("row shorter than the fitted data".into()));
            }
            let z = DVector::from_fn(model.kept.len(), |c, _| (row[model.kept[c]] - model.mean[c]) / model.scale[c]);
            Ok((&model.components * z).iter().copied().collect())
        })
        .collect()
}

/// Projected points with their true labels.
#[derive(Clone, Debug)]
pub struct ProjectionTable {
    pub labels: Vec<usize>,
    pub points: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl ProjectionTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let k = self.points.first().map_or(0, Vec::len);
        let mut header = vec!["label".to_string()];
        header.extend((1..=k).map(|i| format!("pc{i}")));
        w.write_record(header)?;
        for (label, point) in self.labels.iter().zip(&self.points) {
            let mut rec = vec![label.to_string()];
            rec.extend(point.iter().map(|v| v.to_string()));
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Mean squared distance to the own-class centroid and mean squared
    /// distance between class centroids and the overall centroid.
    pub fn within_between(&self) -> (f64, f64) {
        let k = self.points.first().map_or(0, Vec::len);
        let n_classes = self.labels.iter().max().map_or(0, |m| m + 1);
        let mut sums = vec![vec![0.0; k]; n_classes];
        let mut counts = vec![0usize; n_classes];
        let mut total = vec![0.0; k];
        for (l, p) in self.labels.iter().zip(&self.points) {
            counts[*l] += 1;
            for j in 0..k {
                sums[*l][j] += p[j];
                total[j] += p[j];
            }
        }
        let n = self.points.len() as f64;
        let overall: Vec<f64> = total.iter().map(|t| t / n).collect();
        let centroids: Vec<Vec<f64>> =
            sums.iter().zip(&counts).map(|(s, &c)| s.iter().map(|v| v / c.max(1) as f64).collect()).collect();
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let within = self.labels.iter().zip(&self.points).map(|(l, p)| dist(p, &centroids[*l])).sum::<f64>() / n;
        let between = self.labels.iter().map(|l| dist(&centroids[*l], &overall)).sum::<f64>() / n;
        (within, between)
    }
}

fn project_table(labels: Vec<usize>, rows: Vec<Vec<f64>>, k: usize) -> Result<ProjectionTable> {
    let model = pca_fit(&rows, k)?;
    let points = pca_project(&model, &rows)?;
    Ok(ProjectionTable { labels, points, eigenvalues: model.eigenvalues })
}

/// PCA of the encoder fields and of the exact class-score vectors.
pub fn pca_separability(
    images: &[LabeledImage],
    model: &TrainedModel,
    k: usize,
) -> Result<(ProjectionTable, ProjectionTable)> {
    let labels: Vec<usize> = images.iter().map(|i| i.label).collect();
    let refs: Vec<&LabeledImage> = images.iter().collect();
    let fields: Vec<Vec<f64>> = encode_fields(&model.encoder, &refs)?.into_iter().map(|h| h.into_vec()).collect();
    let scores: Vec<Vec<f64>> = classify_all(model, images, Method::Exact, 0)?.into_iter().map(|c| c.scores).collect();
    Ok((project_table(labels.clone(), fields, k.min(model.n_qubits()))?, project_table(labels, scores, k)?))
}
