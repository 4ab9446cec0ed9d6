//! Statistical learning on flattened feature vectors: PCA pruning,
//! penalized LDA for visualization, a deterministic linear SVM, and
//! stratified k-fold cross-validation.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Feature matrix (one row per sample) with integer class labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
    /// Where the features came from, e.g. "image-space" or "rcdt-space".
    pub space: String,
}

impl LabeledDataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<usize>, space: impl Into<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Domain("row count does not match label count".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("features contain non-finite values".into()));
        }
        Ok(Self { features, labels, space: space.into() })
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }
}

/// Principal components of a centered sample covariance; rank-deficient
/// directions (eigenvalue <= 1e-10 of the largest) are discarded.
#[derive(Debug, Clone)]
pub struct Pca {
    /// d x r, orthonormal columns, ordered by decreasing eigenvalue.
    pub components: DMatrix<f64>,
    /// r eigenvalues, nonincreasing.
    pub eigenvalues: Vec<f64>,
    pub mean: DVector<f64>,
}

const RANK_CUTOFF_REL: f64 = 1e-10;

pub fn pca_fit(data: &DMatrix<f64>) -> Result<Pca> {
    let n = data.nrows();
    let d = data.ncols();
    if n < 2 {
        return Err(Error::Domain("PCA needs at least 2 samples".into()));
    }
    let mean = data.row_mean().transpose();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }

    // Eigendecompose whichever of X'X / XX' is smaller; same nonzero
    // spectrum either way.
    let (mut pairs, from_gram): (Vec<(f64, DVector<f64>)>, bool) = if d <= n {
        let cov = centered.transpose() * &centered / (n as f64 - 1.0);
        let eig = cov.symmetric_eigen();
        (
            eig.eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &l)| (l, eig.eigenvectors.column(i).into_owned()))
                .collect(),
            false,
        )
    } else {
        let gram = &centered * centered.transpose() / (n as f64 - 1.0);
        let eig = gram.symmetric_eigen();
        (
            eig.eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &l)| (l, eig.eigenvectors.column(i).into_owned()))
                .collect(),
            true,
        )
    };
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let lambda_max = pairs.first().map_or(0.0, |p| p.0).max(0.0);
    let cutoff = RANK_CUTOFF_REL * lambda_max;
    let kept: Vec<(f64, DVector<f64>)> =
        pairs.into_iter().filter(|(l, _)| *l > cutoff && *l > 0.0).collect();

    let r = kept.len();
    let mut components = DMatrix::zeros(d, r);
    let mut eigenvalues = Vec::with_capacity(r);
    for (col, (l, v)) in kept.into_iter().enumerate() {
        let dir = if from_gram {
            let raw = centered.transpose() * v;
            let norm = raw.norm();
            raw / norm
        } else {
            v
        };
        components.set_column(col, &dir);
        eigenvalues.push(l);
    }
    Ok(Pca { components, eigenvalues, mean })
}

impl Pca {
    /// Projects rows of `data` onto the retained components.
    pub fn project(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        let mut centered = data.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        centered * &self.components
    }

    /// Like [`Pca::project`], but scales each coordinate to unit variance.
    /// The fixed-margin hinge trainer needs scale-balanced features, so the
    /// classification pipeline trains on these whitened projections.
    pub fn project_whitened(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        let mut projected = self.project(data);
        for (c, &ev) in self.eigenvalues.iter().enumerate() {
            projected.column_mut(c).scale_mut(1.0 / ev.sqrt());
        }
        projected
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Cumulative fraction of variance captured by the leading components.
pub fn cpv_curve(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    if eigenvalues.iter().any(|&l| l < 0.0) {
        return Err(Error::Domain("eigenvalues must be nonnegative".into()));
    }
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::Domain("all-zero eigenvalue list has no variance".into()));
    }
    let mut acc = 0.0;
    Ok(eigenvalues
        .iter()
        .map(|&l| {
            acc += l;
            acc / total
        })
        .collect())
}

/// Number of leading components needed to reach the given cumulative
/// variance fraction.
pub fn components_for_cpv(eigenvalues: &[f64], target: f64) -> Result<usize> {
    let curve = cpv_curve(eigenvalues)?;
    Ok(curve.iter().position(|&c| c >= target).map_or(curve.len(), |p| p + 1))
}

/// Penalized LDA: top `C - 1` generalized eigenvectors of
/// `S_b v = mu (S_w + lambda * trace(S_w) / d * I) v`, unit norm, sign fixed
/// so the largest-magnitude entry is positive. Intended to run inside a
/// PCA-pruned subspace.
pub fn plda_fit(data: &DMatrix<f64>, labels: &[usize], lambda: f64) -> Result<DMatrix<f64>> {
    let n = data.nrows();
    let d = data.ncols();
    if n != labels.len() {
        return Err(Error::Domain("row count does not match label count".into()));
    }
    let classes: Vec<usize> = {
        let mut c: Vec<usize> = labels.to_vec();
        c.sort_unstable();
        c.dedup();
        c
    };
    if classes.len() < 2 {
        return Err(Error::Domain("pLDA needs at least two classes".into()));
    }
    for &c in &classes {
        if labels.iter().filter(|&&l| l == c).count() < 2 {
            return Err(Error::Domain(format!("class {c} has fewer than 2 samples")));
        }
    }

    let global_mean = data.row_mean().transpose();
    let mut s_w = DMatrix::zeros(d, d);
    let mut s_b = DMatrix::zeros(d, d);
    for &c in &classes {
        let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let nc = rows.len() as f64;
        let mut class_mean = DVector::zeros(d);
        for &i in &rows {
            class_mean += data.row(i).transpose();
        }
        class_mean /= nc;
        for &i in &rows {
            let diff = data.row(i).transpose() - &class_mean;
            s_w += &diff * diff.transpose();
        }
        let between = &class_mean - &global_mean;
        s_b += nc * &between * between.transpose();
    }

    let ridge = lambda * s_w.trace() / d as f64;
    let mut m = s_w;
    for i in 0..d {
        m[(i, i)] += ridge.max(1e-12);
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Domain("penalized within-class scatter is not PD".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Domain("failed to invert Cholesky factor".into()))?;
    let whitened = &l_inv * s_b * l_inv.transpose();
    let sym = (&whitened + whitened.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let r = classes.len() - 1;
    let mut directions = DMatrix::zeros(d, r);
    for (col, &idx) in order.iter().take(r).enumerate() {
        let mut v = l_inv.transpose() * eig.eigenvectors.column(idx);
        let norm = v.norm();
        if norm > 0.0 {
            v /= norm;
        }
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[lead] < 0.0 {
            v = -v;
        }
        directions.set_column(col, &v);
    }
    Ok(directions)
}

/// Separating hyperplane `sign(w . x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: DVector<f64>,
    pub bias: f64,
}

pub const DEFAULT_SVM_C: f64 = 10.0;
pub const DEFAULT_SVM_EPOCHS: usize = 200;

/// Primal hinge-loss subgradient training, deterministic given the seed.
///
/// Per epoch `e` (1-based) the step is `1 / (C * e)`; samples are visited in
/// a seed-fixed shuffled order, margin violations trigger a perceptron-style
/// update and the weights shrink by `1 - step / C` once per epoch.
pub fn svm_train(
    data: &DMatrix<f64>,
    labels: &[usize],
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearModel> {
    let n = data.nrows();
    let d = data.ncols();
    if n != labels.len() {
        return Err(Error::Domain("row count does not match label count".into()));
    }
    if c <= 0.0 {
        return Err(Error::Domain("C must be positive".into()));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Domain("svm_train expects binary labels in {0, 1}".into()));
    }
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(Error::Domain("both classes must be present".into()));
    }

    let signs: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut w = DVector::zeros(d);
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for epoch in 1..=epochs {
        order.shuffle(&mut rng);
        let step = 1.0 / (c * epoch as f64);
        for &i in &order {
            let x = data.row(i).transpose();
            let y = signs[i];
            if y * (w.dot(&x) + b) < 1.0 {
                w += step * y * x;
                b += step * y;
            }
        }
        w *= (1.0 - step / c).max(0.0);
    }
    Ok(LinearModel { weights: w, bias: b })
}

impl LinearModel {
    /// Predicted label for one feature vector; an exact zero score maps to
    /// class 1.
    pub fn predict_one(&self, x: &DVector<f64>) -> Result<usize> {
        if x.len() != self.weights.len() {
            return Err(Error::Domain(format!(
                "feature dimension {} does not match model dimension {}",
                x.len(),
                self.weights.len()
            )));
        }
        Ok(if self.weights.dot(x) + self.bias >= 0.0 { 1 } else { 0 })
    }

    pub fn predict(&self, data: &DMatrix<f64>) -> Result<Vec<usize>> {
        (0..data.nrows()).map(|i| self.predict_one(&data.row(i).transpose())).collect()
    }

    pub fn accuracy(&self, data: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
        let pred = self.predict(data)?;
        let correct = pred.iter().zip(labels).filter(|(p, l)| p == l).count();
        Ok(correct as f64 / labels.len() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct CvResult {
    pub mean_accuracy: f64,
    pub std_dev: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Stratified k-fold cross-validation of the PCA + linear SVM pipeline.
///
/// Folds are carved from a seeded shuffle within each class. Per fold the
/// PCA pruning is fit on the training split only, the test split is
/// projected into it, and a fresh SVM is trained with the defaults.
pub fn cross_validate(
    data: &DMatrix<f64>,
    labels: &[usize],
    folds: usize,
    seed: u64,
) -> Result<CvResult> {
    let n = data.nrows();
    if folds < 2 {
        return Err(Error::Domain("need at least 2 folds".into()));
    }
    if n < folds {
        return Err(Error::Domain("fewer samples than folds".into()));
    }
    let classes: Vec<usize> = {
        let mut c = labels.to_vec();
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut assignment = vec![0usize; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &c in &classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        if members.len() < folds {
            return Err(Error::Domain(format!(
                "class {c} has {} members, fewer than {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }

    let mut fold_accuracies = Vec::with_capacity(folds);
    for fold in 0..folds {
        let train_rows: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
        let test_rows: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        let train = data.select_rows(train_rows.as_slice());
        let test = data.select_rows(test_rows.as_slice());
        let train_labels: Vec<usize> = train_rows.iter().map(|&i| labels[i]).collect();
        let test_labels: Vec<usize> = test_rows.iter().map(|&i| labels[i]).collect();

        let pca = pca_fit(&train)?;
        let train_p = pca.project_whitened(&train);
        let test_p = pca.project_whitened(&test);
        let model = svm_train(
            &train_p,
            &train_labels,
            DEFAULT_SVM_C,
            DEFAULT_SVM_EPOCHS,
            seed ^ (fold as u64).wrapping_mul(0x9e3779b97f4a7c15),
        )?;
        fold_accuracies.push(model.accuracy(&test_p, &test_labels)?);
    }
    let mean = fold_accuracies.iter().sum::<f64>() / folds as f64;
    let var = fold_accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / folds as f64;
    Ok(CvResult { mean_accuracy: mean, std_dev: var.sqrt(), fold_accuracies })
}
